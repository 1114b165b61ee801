#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artex/common.hpp"

namespace artex {

enum class AddressKind : std::uint8_t { ExternallyOwned, Contract };

struct Address {
    std::array<std::uint8_t, 20> bytes{};
    AddressKind kind = AddressKind::ExternallyOwned;

    std::string hex() const;  // 0x-prefixed, lowercase
    static std::optional<Address> parse(std::string_view hex, AddressKind kind = AddressKind::ExternallyOwned);

    bool is_zero() const;
    // System source for genesis funding and token mints.
    static Address zero();
    // Burn address that accumulates gas fees; keeps conservation checkable.
    static Address gas_sink();

    friend auto operator<=>(const Address& a, const Address& b) { return a.bytes <=> b.bytes; }
    friend bool operator==(const Address& a, const Address& b) { return a.bytes == b.bytes; }
};

struct KeyPair {
    std::array<std::uint8_t, 32> priv{};
    std::array<std::uint8_t, 32> pub{};
    Address address;

    // address is a pure function of pub; used as the possession check when "signing".
    static Address derive_address(const std::array<std::uint8_t, 32>& pub);
};

enum class TokenStandard : std::uint8_t { Fungible, NonFungible, Rwa3643 };

const char* token_standard_name(TokenStandard s);
std::optional<TokenStandard> token_standard_from(std::string_view name);

// Initial distribution at deployment. NFT standards use nft_holders,
// Fungible uses fungible_holdings; mints are recorded as txs from the zero address.
struct TokenInit {
    std::map<std::uint64_t, Address> nft_holders;
    std::map<Address, Amount> fungible_holdings;
    std::map<std::string, std::string> metadata;
    std::vector<Address> registry_agents;  // Rwa3643: additional trusted registrars
};

struct TokenContract {
    Address address;
    TokenStandard standard = TokenStandard::Fungible;
    Address issuer;
    std::map<std::string, std::string> metadata;
    // Rwa3643 only: permitted holder -> salted identity claim hash. Claim hashes are
    // stored in contract state; the registration *event* is a public transaction.
    std::map<Address, Hash32> identity_registry;
    std::set<Address> registry_agents;

    std::map<std::uint64_t, Address> nft_owner;
    std::map<Address, Amount> balances;
    Amount total_supply = 0;

    bool permissioned() const { return standard == TokenStandard::Rwa3643; }
    bool non_fungible() const { return standard != TokenStandard::Fungible; }
};

struct TokenOp {
    Address contract;
    std::optional<std::uint64_t> token_id;
    Amount amount = 0;

    // Ownership moves only with amount >= 1; amount == 0 marks a contract
    // event (deployment when to == contract, identity registration otherwise).
    bool moves_token() const { return amount >= 1; }
};

struct LedgerTransaction {
    std::string hash;  // hex sha256, unique per ledger instance
    Address from;
    Address to;
    Amount value = 0;
    std::optional<TokenOp> token_op;
    Amount gas_fee = 0;
    std::uint64_t block_height = 0;
    std::uint64_t timestamp = 0;

    bool is_system() const { return from.is_zero(); }
};

struct Block {
    std::uint64_t height = 0;
    std::uint64_t timestamp = 0;
    std::vector<LedgerTransaction> txs;
};

class Ledger;

/// Explorer-style read surface: sealed transactions only, no keys, no
/// exchange records. Every answer is derived by folding sealed history.
class PublicLedgerView {
public:
    explicit PublicLedgerView(const Ledger& ledger) : ledger_(&ledger) {}

    Amount native_balance(const Address& a) const;
    Address token_owner(const Address& contract, std::uint64_t token_id) const;
    Amount token_balance(const Address& contract, const Address& holder) const;
    std::set<Address> registered_addresses(const Address& contract) const;

    // Ordered as sealed. Unknown addresses yield an empty history; unknown
    // contracts are an error (the two cases are distinguishable only for contracts).
    std::vector<LedgerTransaction> address_history(const Address& a) const;
    std::vector<LedgerTransaction> token_history(const Address& contract,
                                                 std::optional<std::uint64_t> token_id) const;
    std::vector<LedgerTransaction> all_transactions() const;
    std::uint64_t height() const;

private:
    const Ledger* ledger_;
};

/// Deterministic in-memory account ledger: native currency, token contracts,
/// flat per-tx gas, explicit block time. Single writer per instance.
class Ledger {
public:
    explicit Ledger(SimClock& clock, Amount gas_fee = 0);

    KeyPair create_account(Rng& rng);

    // Setup-phase faucet; allowed only before the first block is sealed.
    const LedgerTransaction& genesis_fund(const Address& to, Amount amount);

    const TokenContract& deploy_token(const KeyPair& issuer, TokenStandard standard,
                                      const TokenInit& init);
    const LedgerTransaction& register_identity(const Address& contract, const KeyPair& registrar,
                                               const Address& subject, const Hash32& claim_hash);

    const LedgerTransaction& transfer_native(const KeyPair& signer, const Address& to, Amount amount);
    const LedgerTransaction& transfer_token(const KeyPair& signer, const Address& contract,
                                            std::optional<std::uint64_t> token_id, Amount amount,
                                            const Address& to, Amount native_value = 0);

    void advance_time(std::uint64_t seconds);
    void advance_to(std::uint64_t timestamp);
    std::uint64_t seal_block();

    PublicLedgerView view() const { return PublicLedgerView(*this); }

    // Trusted-side accessors (live state, includes pending txs).
    Amount balance(const Address& a) const;
    const TokenContract* find_contract(const Address& a) const;
    const TokenContract& contract(const Address& a) const;
    Amount gas_fee() const { return gas_fee_; }
    std::uint64_t now() const { return clock_->now; }
    std::uint64_t height() const { return next_height_ - 1; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<LedgerTransaction>& pending() const { return pending_; }
    bool has_pending() const { return !pending_.empty(); }
    Amount genesis_total() const { return genesis_total_; }
    std::uint64_t transaction_count() const { return seq_; }

    // Newline-delimited JSON, one sealed transaction per line. This is the
    // public artifact the adversary consumes.
    void dump_ndjson(std::ostream& out) const;
    std::string dump_ndjson() const;

private:
    friend class PublicLedgerView;

    const LedgerTransaction& submit(Address from, Address to, Amount value,
                                    std::optional<TokenOp> op, Amount gas);
    void charge_gas(const Address& payer);
    void verify_signer(const KeyPair& signer) const;
    TokenContract& contract_mut(const Address& a);

    SimClock* clock_;
    Amount gas_fee_;
    std::uint64_t seq_ = 0;
    std::uint64_t next_height_ = 1;
    std::uint64_t deploy_nonce_ = 0;
    Amount genesis_total_ = 0;

    std::map<Address, Amount> balances_;
    std::map<Address, TokenContract> contracts_;
    std::set<Address> known_addresses_;
    std::set<std::string> tx_hashes_;
    std::vector<Block> blocks_;
    std::vector<LedgerTransaction> pending_;
};

// Dump serialization, shared by Ledger::dump_ndjson and the tests.
std::string transaction_to_json(const LedgerTransaction& tx);

}  // namespace artex
