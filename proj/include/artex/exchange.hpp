#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artex/auction.hpp"
#include "artex/common.hpp"
#include "artex/identity.hpp"
#include "artex/ledger.hpp"
#include "artex/settlement.hpp"

namespace artex {

enum class WalletRole : std::uint8_t {
    SellerToken,
    SellerPayout,
    BuyerPayment,
    ExchangeIntake,
    ExchangePayment,
    ExchangeTreasury,
    FreshDelivery,
    DecoyPool,
    Noise,
};

const char* wallet_role_name(WalletRole r);

struct Wallet {
    KeyPair keys;
    WalletRole role = WalletRole::Noise;
    std::optional<MemberId> owner;  // private metadata; never exported

    const Address& address() const { return keys.address; }
};

struct Disclosure {
    // required
    std::optional<Address> token_contract;
    std::optional<std::uint64_t> token_id;
    std::optional<TokenStandard> token_standard;
    std::optional<Amount> token_amount;
    // optional
    std::optional<std::string> token_info;
    std::optional<std::string> creator;  // pseudonym or address, seller's choice
    std::optional<std::string> image_url;

    bool complete() const {
        return token_contract && token_standard && token_amount;
    }
};

// Serialized public listing: exactly the disclosure fields, nothing else.
std::string disclosure_to_json(const Disclosure& d);

enum class ListingState : std::uint8_t {
    Draft,
    AwaitingDeposit,
    UnderReview,
    Listed,
    InAuction,
    AuctionEnded,
    AwaitingPayment,
    Settling,
    Completed,
    Rejected,
    Defaulted,
    Returned,
};

const char* listing_state_name(ListingState s);
bool listing_transition_legal(ListingState from, ListingState to);

struct ListingTransition {
    std::uint64_t listing_id = 0;
    ListingState from = ListingState::Draft;
    ListingState to = ListingState::Draft;
    std::uint64_t at = 0;
};

struct TokenRef {
    Address contract;
    std::optional<std::uint64_t> token_id;
    Amount amount = 1;
};

struct Listing {
    std::uint64_t id = 0;
    MemberId seller;
    TokenRef token;
    Disclosure disclosure;
    ListingState state = ListingState::Draft;

    Wallet intake;                       // per-listing custody wallet
    std::optional<Address> deposit_source;
    std::vector<Address> payment_addresses;  // issued to the winner on request
    std::optional<MemberId> winner;
    Amount price = 0;

    std::uint64_t deposit_deadline = 0;
    std::uint64_t payment_deadline = 0;
    bool delivery_done = false;
    bool payout_done = false;
    bool refunds_done = false;
};

enum class NotificationKind : std::uint8_t {
    AuctionEndedSeller,
    AuctionWonBuyer,
    AuctionEndedOther,  // losing bidders: bare end-of-auction notice
    PaymentAddresses,
    SettlementComplete,
    ListingRejected,
    Returned,
};

const char* notification_kind_name(NotificationKind k);

struct Notification {
    MemberId recipient;
    NotificationKind kind = NotificationKind::AuctionEndedOther;
    std::uint64_t listing_id = 0;
    std::optional<Amount> final_price;
    std::vector<Address> payment_addresses;
    std::vector<std::string> payment_options;
    std::uint64_t at = 0;
};

struct ExchangeConfig {
    std::uint32_t fee_bps = 0;
    std::uint64_t deposit_timeout_s = 7 * 86400;
    std::uint64_t payment_timeout_s = 7 * 86400;
    // On: reproduce the literal routing templates (payouts leave the very
    // wallets that received the payments). Off: payouts are drawn from an
    // operational pool disjoint from this listing's payment wallets.
    bool strict_routing_fidelity = false;
    std::size_t payment_pool_size = 6;
    Amount pool_float = 0;  // per pool wallet, funded from treasury at setup
    std::optional<Amount> delivery_dust_override;  // default: one tx worth of gas
    double installment_jitter_frac = 0.10;
    std::string authority_credential = "authority-credential";
    std::set<Address> contract_blacklist;
};

/// The exchange orchestrator: listing lifecycle, auction hand-off, payment
/// monitoring, payout scheduling, fresh-wallet delivery and the private
/// record store. One logical event loop; call pump() after each sealed block.
class Exchange {
public:
    Exchange(SimClock& clock, Ledger& ledger, IdentityService& members, ExchangeConfig cfg,
             Rng rng);

    // -- setup ---------------------------------------------------------------
    const Address& treasury_address() const { return treasury_.address(); }
    const Address& agent_address() const { return agent_.address; }
    // Creates the operational wallet pool and floats it from the treasury.
    void prepare_pool();

    // -- listing lifecycle: deposit intake, review, publication ----------------
    std::uint64_t create_listing(const std::string& session, const TokenRef& token,
                                 const Disclosure& disclosure);
    void confirm_deposit(std::uint64_t listing_id);
    ListingState review_listing(std::uint64_t listing_id);
    void return_token(std::uint64_t listing_id);

    // -- auction ----------------------------------------------------------------
    void open_auction(std::uint64_t listing_id, std::uint64_t window_s,
                      AuctionPolicy policy = AuctionPolicy::HiddenAscending,
                      std::optional<Amount> reserve = std::nullopt);
    BidResponse place_bid(const std::string& session, std::uint64_t listing_id, Amount amount);
    std::optional<AuctionOutcome> close_auction(std::uint64_t listing_id);

    // -- post-auction and settlement --------------------------------------------
    void notify_results(std::uint64_t listing_id, std::size_t requested_addresses);
    const PaymentPlan& propose_payment_plan(const std::string& session, std::uint64_t listing_id,
                                            std::vector<PaymentLeg> legs);
    ListingState monitor_payments(std::uint64_t listing_id);
    const PayoutPlan& request_settlement(const std::string& session, std::uint64_t listing_id,
                                         const std::vector<Address>& payout_wallets,
                                         std::size_t installments = 1,
                                         std::uint64_t spacing_s = 0);
    const SettlementRecord& investigator_disclosure(const std::string& credential,
                                                    std::uint64_t listing_id) const;
    const SettlementRecord& investigator_disclosure_by_token(
        const std::string& credential, const Address& contract,
        std::optional<std::uint64_t> token_id) const;

    // Drives deadlines, payment observation, delivery, scheduled payout legs,
    // refunds and completion. Idempotent; run after every sealed block.
    void pump();
    // Earliest pending scheduled action, if any (lets the driver sleep to it).
    std::optional<std::uint64_t> next_due() const;

    // -- read surface ----------------------------------------------------------
    const Listing& listing(std::uint64_t id) const;
    const Auction& auction(std::uint64_t id) const;
    const std::map<std::uint64_t, Listing>& listings() const { return listings_; }
    const std::vector<ListingTransition>& transition_log() const { return transitions_; }
    const std::vector<Notification>& inbox(const MemberId& m) const;
    const std::vector<SecureChannelMessage>& secure_channel(const MemberId& m) const;
    const std::map<std::uint64_t, SettlementRecord>& records() const { return records_; }
    const std::map<Address, WalletRole>& wallet_roles() const { return roles_; }
    const std::map<std::uint64_t, Auction>& auctions() const { return auctions_; }
    // test/audit surface: every private key this exchange controls, hex
    std::vector<std::string> private_key_hexes() const;
    // (listing id, tx hash) for every ledger tx this exchange submitted;
    // listing id 0 marks setup traffic (pool floats).
    const std::vector<std::pair<std::uint64_t, std::string>>& tx_log() const { return tx_log_; }
    std::string export_settlement_records() const;  // private audit artifact

private:
    Listing& listing_mut(std::uint64_t id);
    void transition(Listing& l, ListingState to);
    Wallet& make_wallet(WalletRole role, std::optional<MemberId> owner);
    const Wallet& wallet_at(const Address& a) const;
    void float_gas(const Address& to, Amount txs_worth, std::uint64_t listing_id);
    Amount delivery_dust() const;
    void notify(Notification n);
    void start_settling(Listing& l);
    void deliver_token(Listing& l);
    void schedule_payouts(Listing& l);
    void execute_due_payouts();
    void finish_if_complete(Listing& l);
    Address pick_payout_source(const Listing& l, std::size_t leg_index, Amount needed);
    Hash32 exchange_claim() const;

    SimClock* clock_;
    Ledger* ledger_;
    IdentityService* members_;
    ExchangeConfig cfg_;
    Rng rng_;

    Wallet treasury_;
    KeyPair agent_;  // registry agent keys for permissioned tokens
    std::vector<Address> pool_;
    std::size_t pool_cursor_ = 0;

    std::uint64_t next_listing_ = 1;
    std::map<std::uint64_t, Listing> listings_;
    std::map<std::uint64_t, Auction> auctions_;
    std::map<std::uint64_t, PaymentPlan> payment_plans_;
    std::map<std::uint64_t, PayoutPlan> payout_plans_;
    std::map<std::uint64_t, SettlementRecord> records_;
    std::map<Address, Wallet> wallets_;  // all exchange-created wallets
    std::map<Address, WalletRole> roles_;
    std::map<MemberId, std::vector<Notification>> inboxes_;
    std::map<MemberId, std::vector<SecureChannelMessage>> channels_;
    std::vector<ListingTransition> transitions_;
    std::set<std::string> consumed_txs_;
    std::vector<std::pair<std::uint64_t, std::string>> tx_log_;

    struct Scheduled {
        std::uint64_t due = 0;
        std::uint64_t listing_id = 0;
        std::size_t leg_index = 0;
    };
    std::vector<Scheduled> schedule_;
};

}  // namespace artex
