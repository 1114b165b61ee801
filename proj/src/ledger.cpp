#include "artex/ledger.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "artex/sha256.hpp"

namespace artex {

using ordered_json = nlohmann::ordered_json;

std::string Address::hex() const { return "0x" + to_hex(bytes); }

std::optional<Address> Address::parse(std::string_view hex, AddressKind kind) {
    Address a;
    a.kind = kind;
    if (!from_hex(hex, a.bytes)) return std::nullopt;
    return a;
}

bool Address::is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

Address Address::zero() { return Address{}; }

Address Address::gas_sink() {
    Address a;
    a.bytes.fill(0xff);
    return a;
}

Address KeyPair::derive_address(const std::array<std::uint8_t, 32>& pub) {
    Hash32 h = sha256(std::span<const std::uint8_t>(pub.data(), pub.size()));
    Address a;
    std::copy_n(h.begin(), 20, a.bytes.begin());
    a.kind = AddressKind::ExternallyOwned;
    return a;
}

const char* token_standard_name(TokenStandard s) {
    switch (s) {
        case TokenStandard::Fungible: return "fungible";
        case TokenStandard::NonFungible: return "non_fungible";
        case TokenStandard::Rwa3643: return "rwa3643";
    }
    return "?";
}

std::optional<TokenStandard> token_standard_from(std::string_view name) {
    if (name == "fungible") return TokenStandard::Fungible;
    if (name == "non_fungible") return TokenStandard::NonFungible;
    if (name == "rwa3643") return TokenStandard::Rwa3643;
    return std::nullopt;
}

Ledger::Ledger(SimClock& clock, Amount gas_fee) : clock_(&clock), gas_fee_(gas_fee) {
    known_addresses_.insert(Address::zero());
    known_addresses_.insert(Address::gas_sink());
}

KeyPair Ledger::create_account(Rng& rng) {
    for (int attempt = 0; attempt < 4; ++attempt) {
        KeyPair kp;
        rng.fill(kp.priv);
        kp.pub = sha256(std::span<const std::uint8_t>(kp.priv.data(), kp.priv.size()));
        kp.address = KeyPair::derive_address(kp.pub);
        if (known_addresses_.insert(kp.address).second) return kp;
    }
    throw error(errc::unknown_address, "address collision");
}

const LedgerTransaction& Ledger::genesis_fund(const Address& to, Amount amount) {
    if (!blocks_.empty())
        throw error(errc::called_after_setup, "genesis funding after first sealed block");
    genesis_total_ = checked_add(genesis_total_, amount);
    balances_[to] = checked_add(balances_[to], amount);
    known_addresses_.insert(to);
    return submit(Address::zero(), to, amount, std::nullopt, 0);
}

const TokenContract& Ledger::deploy_token(const KeyPair& issuer, TokenStandard standard,
                                          const TokenInit& init) {
    verify_signer(issuer);
    if (balance(issuer.address) < gas_fee_)
        throw error(errc::insufficient_gas, "issuer cannot cover deployment gas");

    HashWriter w;
    w.str("artex.contract");
    w.bytes(issuer.address.bytes);
    w.u64(deploy_nonce_++);
    Hash32 h = w.digest();
    Address addr;
    std::copy_n(h.begin(), 20, addr.bytes.begin());
    addr.kind = AddressKind::Contract;
    if (!known_addresses_.insert(addr).second)
        throw error(errc::unknown_address, "contract address collision");

    TokenContract c;
    c.address = addr;
    c.standard = standard;
    c.issuer = issuer.address;
    c.metadata = init.metadata;
    c.registry_agents.insert(init.registry_agents.begin(), init.registry_agents.end());
    if (c.permissioned()) {
        HashWriter cw;
        cw.str("issuer-claim");
        cw.bytes(issuer.address.bytes);
        c.identity_registry[issuer.address] = cw.digest();
        for (const auto& [id, holder] : init.nft_holders)
            if (!c.identity_registry.count(holder))
                throw error(errc::identity_not_registered, "initial holder not in identity registry");
    }

    charge_gas(issuer.address);
    submit(issuer.address, addr, 0, TokenOp{addr, std::nullopt, 0}, gas_fee_);

    if (standard == TokenStandard::Fungible) {
        for (const auto& [holder, amount] : init.fungible_holdings) {
            if (amount == 0) continue;
            c.balances[holder] = checked_add(c.balances[holder], amount);
            c.total_supply = checked_add(c.total_supply, amount);
            submit(Address::zero(), holder, 0, TokenOp{addr, std::nullopt, amount}, 0);
        }
    } else {
        for (const auto& [id, holder] : init.nft_holders) {
            c.nft_owner[id] = holder;
            c.total_supply = checked_add(c.total_supply, 1);
            submit(Address::zero(), holder, 0, TokenOp{addr, id, 1}, 0);
        }
    }

    auto [it, inserted] = contracts_.emplace(addr, std::move(c));
    (void)inserted;
    return it->second;
}

const LedgerTransaction& Ledger::register_identity(const Address& contract_addr,
                                                   const KeyPair& registrar, const Address& subject,
                                                   const Hash32& claim_hash) {
    verify_signer(registrar);
    TokenContract& c = contract_mut(contract_addr);
    if (!c.permissioned())
        throw error(errc::wrong_standard, "identity registry requires rwa3643");
    if (registrar.address != c.issuer && !c.registry_agents.count(registrar.address))
        throw error(errc::not_authorized, "registrar is not issuer or trusted agent");
    if (balance(registrar.address) < gas_fee_)
        throw error(errc::insufficient_gas, "registrar cannot cover gas");

    // Idempotent: re-registering overwrites the claim, registry keeps one entry.
    c.identity_registry[subject] = claim_hash;
    known_addresses_.insert(subject);
    charge_gas(registrar.address);
    return submit(registrar.address, subject, 0, TokenOp{contract_addr, std::nullopt, 0}, gas_fee_);
}

const LedgerTransaction& Ledger::transfer_native(const KeyPair& signer, const Address& to,
                                                 Amount amount) {
    verify_signer(signer);
    Amount need = checked_add(amount, gas_fee_);
    if (balance(signer.address) < need)
        throw error(errc::insufficient_funds, "balance below amount + gas");
    balances_[signer.address] -= amount;
    balances_[to] = checked_add(balances_[to], amount);
    known_addresses_.insert(to);
    charge_gas(signer.address);
    return submit(signer.address, to, amount, std::nullopt, gas_fee_);
}

const LedgerTransaction& Ledger::transfer_token(const KeyPair& signer, const Address& contract_addr,
                                                std::optional<std::uint64_t> token_id, Amount amount,
                                                const Address& to, Amount native_value) {
    verify_signer(signer);
    TokenContract& c = contract_mut(contract_addr);
    if (contracts_.count(to))
        throw error(errc::invalid_recipient, "token recipient is a contract address");

    Amount need = checked_add(native_value, gas_fee_);
    if (balance(signer.address) < need)
        throw error(errc::insufficient_gas, "balance below attached value + gas");

    if (c.permissioned()) {
        if (!c.identity_registry.count(signer.address) || !c.identity_registry.count(to))
            throw error(errc::identity_not_registered, "sender and recipient must be registered");
    }

    Amount moved = amount;
    if (c.non_fungible()) {
        if (!token_id) throw error(errc::unknown_token, "token id required");
        auto it = c.nft_owner.find(*token_id);
        if (it == c.nft_owner.end()) throw error(errc::unknown_token, "no such token id");
        if (it->second != signer.address) throw error(errc::not_owner, "signer does not own token");
        it->second = to;
        moved = 1;
    } else {
        if (token_id) throw error(errc::unknown_token, "fungible transfer takes no token id");
        if (amount == 0) throw error(errc::not_owner, "zero-amount token transfer");
        Amount have = 0;
        if (auto it = c.balances.find(signer.address); it != c.balances.end()) have = it->second;
        if (have < amount) throw error(errc::not_owner, "token balance too low");
        c.balances[signer.address] -= amount;
        c.balances[to] = checked_add(c.balances[to], amount);
        if (c.balances[signer.address] == 0) c.balances.erase(signer.address);
    }

    balances_[signer.address] -= native_value;
    balances_[to] = checked_add(balances_[to], native_value);
    known_addresses_.insert(to);
    charge_gas(signer.address);
    return submit(signer.address, to, native_value, TokenOp{contract_addr, token_id, moved}, gas_fee_);
}

void Ledger::advance_time(std::uint64_t seconds) { clock_->now += seconds; }

void Ledger::advance_to(std::uint64_t timestamp) {
    if (timestamp > clock_->now) clock_->now = timestamp;
}

std::uint64_t Ledger::seal_block() {
    Block b;
    b.height = next_height_++;
    b.timestamp = clock_->now;
    b.txs = std::move(pending_);
    pending_.clear();
    for (auto& tx : b.txs) {
        tx.block_height = b.height;
        tx.timestamp = b.timestamp;
    }
    blocks_.push_back(std::move(b));
    return blocks_.back().height;
}

Amount Ledger::balance(const Address& a) const {
    auto it = balances_.find(a);
    return it == balances_.end() ? 0 : it->second;
}

const TokenContract* Ledger::find_contract(const Address& a) const {
    auto it = contracts_.find(a);
    return it == contracts_.end() ? nullptr : &it->second;
}

const TokenContract& Ledger::contract(const Address& a) const {
    const TokenContract* c = find_contract(a);
    if (!c) throw error(errc::unknown_contract, "no contract at " + a.hex());
    return *c;
}

TokenContract& Ledger::contract_mut(const Address& a) {
    auto it = contracts_.find(a);
    if (it == contracts_.end()) throw error(errc::unknown_contract, "no contract at " + a.hex());
    return it->second;
}

void Ledger::charge_gas(const Address& payer) {
    if (gas_fee_ == 0) return;
    balances_[payer] -= gas_fee_;
    balances_[Address::gas_sink()] = checked_add(balances_[Address::gas_sink()], gas_fee_);
}

void Ledger::verify_signer(const KeyPair& signer) const {
    if (KeyPair::derive_address(signer.pub) != signer.address)
        throw error(errc::not_authorized, "keypair does not match address");
}

const LedgerTransaction& Ledger::submit(Address from, Address to, Amount value,
                                        std::optional<TokenOp> op, Amount gas) {
    LedgerTransaction tx;
    tx.from = from;
    tx.to = to;
    tx.value = value;
    tx.token_op = op;
    tx.gas_fee = gas;
    tx.timestamp = clock_->now;

    HashWriter w;
    w.str("artex.tx");
    w.u64(seq_++);
    w.bytes(from.bytes);
    w.bytes(to.bytes);
    w.u64(value);
    w.u8(op ? 1 : 0);
    if (op) {
        w.bytes(op->contract.bytes);
        w.u8(op->token_id ? 1 : 0);
        w.u64(op->token_id.value_or(0));
        w.u64(op->amount);
    }
    w.u64(gas);
    tx.hash = to_hex(w.digest());
    if (!tx_hashes_.insert(tx.hash).second)
        throw error(errc::unknown_address, "transaction hash collision");

    pending_.push_back(std::move(tx));
    return pending_.back();
}

std::string transaction_to_json(const LedgerTransaction& tx) {
    ordered_json j;
    j["hash"] = tx.hash;
    j["from"] = tx.from.hex();
    j["to"] = tx.to.hex();
    j["value"] = tx.value;
    if (tx.token_op) {
        ordered_json op;
        op["contract"] = tx.token_op->contract.hex();
        if (tx.token_op->token_id)
            op["token_id"] = *tx.token_op->token_id;
        else
            op["token_id"] = nullptr;
        op["amount"] = tx.token_op->amount;
        j["token_op"] = op;
    } else {
        j["token_op"] = nullptr;
    }
    j["gas_fee"] = tx.gas_fee;
    j["block_height"] = tx.block_height;
    j["timestamp"] = tx.timestamp;
    return j.dump();
}

void Ledger::dump_ndjson(std::ostream& out) const {
    for (const auto& b : blocks_)
        for (const auto& tx : b.txs) out << transaction_to_json(tx) << '\n';
}

std::string Ledger::dump_ndjson() const {
    std::ostringstream ss;
    dump_ndjson(ss);
    return ss.str();
}

// ---------------------------------------------------------------------------
// PublicLedgerView: every query folds sealed history, nothing else.

namespace {

struct FoldState {
    std::map<Address, Amount> balances;
    std::map<Address, std::map<std::uint64_t, Address>> nft;
    std::map<Address, std::map<Address, Amount>> fungible;
    std::map<Address, std::set<Address>> registered;
    std::set<Address> contracts;

    void apply(const LedgerTransaction& tx) {
        if (tx.from.is_zero()) {
            balances[tx.to] += tx.value;
        } else {
            balances[tx.from] -= tx.value + tx.gas_fee;
            balances[tx.to] += tx.value;
            balances[Address::gas_sink()] += tx.gas_fee;
        }
        if (!tx.token_op) return;
        const TokenOp& op = *tx.token_op;
        contracts.insert(op.contract);
        if (!op.moves_token()) {
            if (tx.to != op.contract) registered[op.contract].insert(tx.to);
            return;
        }
        if (op.token_id) {
            nft[op.contract][*op.token_id] = tx.to;
        } else {
            if (!tx.from.is_zero()) fungible[op.contract][tx.from] -= op.amount;
            fungible[op.contract][tx.to] += op.amount;
        }
    }
};

FoldState fold(const std::vector<Block>& blocks) {
    FoldState s;
    for (const auto& b : blocks)
        for (const auto& tx : b.txs) s.apply(tx);
    return s;
}

}  // namespace

Amount PublicLedgerView::native_balance(const Address& a) const {
    FoldState s = fold(ledger_->blocks_);
    auto it = s.balances.find(a);
    return it == s.balances.end() ? 0 : it->second;
}

Address PublicLedgerView::token_owner(const Address& contract, std::uint64_t token_id) const {
    FoldState s = fold(ledger_->blocks_);
    auto c = s.nft.find(contract);
    if (!s.contracts.count(contract)) throw error(errc::unknown_contract, "unknown contract");
    if (c == s.nft.end() || !c->second.count(token_id))
        throw error(errc::unknown_token, "unknown token id");
    return c->second.at(token_id);
}

Amount PublicLedgerView::token_balance(const Address& contract, const Address& holder) const {
    FoldState s = fold(ledger_->blocks_);
    if (!s.contracts.count(contract)) throw error(errc::unknown_contract, "unknown contract");
    auto c = s.fungible.find(contract);
    if (c == s.fungible.end()) return 0;
    auto it = c->second.find(holder);
    return it == c->second.end() ? 0 : it->second;
}

std::set<Address> PublicLedgerView::registered_addresses(const Address& contract) const {
    FoldState s = fold(ledger_->blocks_);
    if (!s.contracts.count(contract)) throw error(errc::unknown_contract, "unknown contract");
    auto it = s.registered.find(contract);
    return it == s.registered.end() ? std::set<Address>{} : it->second;
}

std::vector<LedgerTransaction> PublicLedgerView::address_history(const Address& a) const {
    std::vector<LedgerTransaction> out;
    for (const auto& b : ledger_->blocks_)
        for (const auto& tx : b.txs)
            if (tx.from == a || tx.to == a) out.push_back(tx);
    return out;
}

std::vector<LedgerTransaction> PublicLedgerView::token_history(
    const Address& contract, std::optional<std::uint64_t> token_id) const {
    bool known = false;
    std::vector<LedgerTransaction> out;
    for (const auto& b : ledger_->blocks_) {
        for (const auto& tx : b.txs) {
            if (!tx.token_op || tx.token_op->contract != contract) continue;
            known = true;
            if (!tx.token_op->moves_token()) continue;
            if (token_id && tx.token_op->token_id != token_id) continue;
            out.push_back(tx);
        }
    }
    if (!known) throw error(errc::unknown_contract, "unknown contract");
    return out;
}

std::vector<LedgerTransaction> PublicLedgerView::all_transactions() const {
    std::vector<LedgerTransaction> out;
    for (const auto& b : ledger_->blocks_)
        for (const auto& tx : b.txs) out.push_back(tx);
    return out;
}

std::uint64_t PublicLedgerView::height() const { return ledger_->height(); }

}  // namespace artex
