#include "artex/exchange.hpp"

#include <algorithm>

#include <json.hpp>

#include "artex/sha256.hpp"

namespace artex {

using ordered_json = nlohmann::ordered_json;

const char* wallet_role_name(WalletRole r) {
    switch (r) {
        case WalletRole::SellerToken: return "seller_token";
        case WalletRole::SellerPayout: return "seller_payout";
        case WalletRole::BuyerPayment: return "buyer_payment";
        case WalletRole::ExchangeIntake: return "exchange_intake";
        case WalletRole::ExchangePayment: return "exchange_payment";
        case WalletRole::ExchangeTreasury: return "exchange_treasury";
        case WalletRole::FreshDelivery: return "fresh_delivery";
        case WalletRole::DecoyPool: return "decoy_pool";
        case WalletRole::Noise: return "noise";
    }
    return "?";
}

const char* listing_state_name(ListingState s) {
    switch (s) {
        case ListingState::Draft: return "Draft";
        case ListingState::AwaitingDeposit: return "AwaitingDeposit";
        case ListingState::UnderReview: return "UnderReview";
        case ListingState::Listed: return "Listed";
        case ListingState::InAuction: return "InAuction";
        case ListingState::AuctionEnded: return "AuctionEnded";
        case ListingState::AwaitingPayment: return "AwaitingPayment";
        case ListingState::Settling: return "Settling";
        case ListingState::Completed: return "Completed";
        case ListingState::Rejected: return "Rejected";
        case ListingState::Defaulted: return "Defaulted";
        case ListingState::Returned: return "Returned";
    }
    return "?";
}

bool listing_transition_legal(ListingState from, ListingState to) {
    using S = ListingState;
    switch (from) {
        case S::Draft: return to == S::AwaitingDeposit;
        case S::AwaitingDeposit: return to == S::UnderReview || to == S::Rejected;
        case S::UnderReview: return to == S::Listed || to == S::Rejected;
        case S::Listed: return to == S::InAuction;
        case S::InAuction: return to == S::AuctionEnded;
        case S::AuctionEnded: return to == S::AwaitingPayment || to == S::Returned;
        case S::AwaitingPayment: return to == S::Settling || to == S::Defaulted;
        case S::Settling: return to == S::Completed;
        case S::Rejected: return to == S::Returned;
        case S::Defaulted: return to == S::Returned;
        case S::Completed:
        case S::Returned: return false;
    }
    return false;
}

const char* notification_kind_name(NotificationKind k) {
    switch (k) {
        case NotificationKind::AuctionEndedSeller: return "auction_ended_seller";
        case NotificationKind::AuctionWonBuyer: return "auction_won_buyer";
        case NotificationKind::AuctionEndedOther: return "auction_ended";
        case NotificationKind::PaymentAddresses: return "payment_addresses";
        case NotificationKind::SettlementComplete: return "settlement_complete";
        case NotificationKind::ListingRejected: return "listing_rejected";
        case NotificationKind::Returned: return "returned";
    }
    return "?";
}

std::string disclosure_to_json(const Disclosure& d) {
    ordered_json j;
    j["token_contract"] = d.token_contract ? ordered_json(d.token_contract->hex()) : ordered_json(nullptr);
    j["token_id"] = d.token_id ? ordered_json(*d.token_id) : ordered_json(nullptr);
    j["token_standard"] =
        d.token_standard ? ordered_json(token_standard_name(*d.token_standard)) : ordered_json(nullptr);
    j["token_amount"] = d.token_amount ? ordered_json(*d.token_amount) : ordered_json(nullptr);
    if (d.token_info) j["token_info"] = *d.token_info;
    if (d.creator) j["creator"] = *d.creator;
    if (d.image_url) j["image_url"] = *d.image_url;
    return j.dump();
}

Exchange::Exchange(SimClock& clock, Ledger& ledger, IdentityService& members, ExchangeConfig cfg,
                   Rng rng)
    : clock_(&clock), ledger_(&ledger), members_(&members), cfg_(std::move(cfg)), rng_(rng) {
    treasury_.keys = ledger_->create_account(rng_);
    treasury_.role = WalletRole::ExchangeTreasury;
    roles_[treasury_.address()] = WalletRole::ExchangeTreasury;
    agent_ = ledger_->create_account(rng_);
}

Wallet& Exchange::make_wallet(WalletRole role, std::optional<MemberId> owner) {
    Wallet w;
    w.keys = ledger_->create_account(rng_);
    w.role = role;
    w.owner = std::move(owner);
    Address a = w.address();
    roles_[a] = role;
    auto [it, ok] = wallets_.emplace(a, std::move(w));
    (void)ok;
    return it->second;
}

const Wallet& Exchange::wallet_at(const Address& a) const {
    if (a == treasury_.address()) return treasury_;
    auto it = wallets_.find(a);
    if (it == wallets_.end()) throw error(errc::unknown_address, "not an exchange wallet");
    return it->second;
}

void Exchange::float_gas(const Address& to, Amount txs_worth, std::uint64_t listing_id) {
    Amount amount = ledger_->gas_fee() * txs_worth;
    if (amount == 0) return;
    if (ledger_->balance(treasury_.address()) < checked_add(amount, ledger_->gas_fee()))
        throw error(errc::treasury_insufficient, "treasury cannot float gas");
    const auto& tx = ledger_->transfer_native(treasury_.keys, to, amount);
    tx_log_.emplace_back(listing_id, tx.hash);
}

Amount Exchange::delivery_dust() const {
    return cfg_.delivery_dust_override.value_or(ledger_->gas_fee());
}

Hash32 Exchange::exchange_claim() const {
    HashWriter w;
    w.str("exchange-claim");
    w.bytes(agent_.address.bytes);
    return w.digest();
}

void Exchange::prepare_pool() {
    while (pool_.size() < cfg_.payment_pool_size) {
        Wallet& w = make_wallet(WalletRole::ExchangePayment, std::nullopt);
        pool_.push_back(w.address());
        if (cfg_.pool_float > 0) {
            if (ledger_->balance(treasury_.address()) <
                checked_add(cfg_.pool_float, ledger_->gas_fee()))
                throw error(errc::treasury_insufficient, "treasury cannot float the pool");
            const auto& tx = ledger_->transfer_native(treasury_.keys, w.address(), cfg_.pool_float);
            tx_log_.emplace_back(0, tx.hash);
        }
    }
}

void Exchange::transition(Listing& l, ListingState to) {
    if (!listing_transition_legal(l.state, to))
        throw error(errc::wrong_state, std::string("illegal transition ") +
                                           listing_state_name(l.state) + " -> " +
                                           listing_state_name(to));
    transitions_.push_back(ListingTransition{l.id, l.state, to, clock_->now});
    l.state = to;
}

Listing& Exchange::listing_mut(std::uint64_t id) {
    auto it = listings_.find(id);
    if (it == listings_.end()) throw error(errc::no_record, "unknown listing");
    return it->second;
}

const Listing& Exchange::listing(std::uint64_t id) const {
    auto it = listings_.find(id);
    if (it == listings_.end()) throw error(errc::no_record, "unknown listing");
    return it->second;
}

const Auction& Exchange::auction(std::uint64_t id) const {
    auto it = auctions_.find(id);
    if (it == auctions_.end()) throw error(errc::no_record, "no auction for listing");
    return it->second;
}

const std::vector<Notification>& Exchange::inbox(const MemberId& m) const {
    static const std::vector<Notification> empty;
    auto it = inboxes_.find(m);
    return it == inboxes_.end() ? empty : it->second;
}

const std::vector<SecureChannelMessage>& Exchange::secure_channel(const MemberId& m) const {
    static const std::vector<SecureChannelMessage> empty;
    auto it = channels_.find(m);
    return it == channels_.end() ? empty : it->second;
}

void Exchange::notify(Notification n) {
    n.at = clock_->now;
    inboxes_[n.recipient].push_back(std::move(n));
}

std::vector<std::string> Exchange::private_key_hexes() const {
    std::vector<std::string> out;
    out.push_back(to_hex(treasury_.keys.priv));
    out.push_back(to_hex(agent_.priv));
    for (const auto& [addr, w] : wallets_) out.push_back(to_hex(w.keys.priv));
    return out;
}

std::uint64_t Exchange::create_listing(const std::string& session, const TokenRef& token,
                                       const Disclosure& disclosure) {
    const MemberRecord& member = members_->authenticate_full(session);

    Disclosure d = disclosure;
    d.token_contract = token.contract;
    if (!d.token_standard)
        throw error(errc::missing_disclosure, "token_standard is required");
    if (*d.token_standard != TokenStandard::Fungible) {
        if (!token.token_id) throw error(errc::missing_disclosure, "token_id required for non-fungible");
        d.token_id = token.token_id;
        d.token_amount = 1;  // non-fungible listings always sell exactly one
    } else {
        d.token_id.reset();
        d.token_amount = token.amount;
    }
    if (!d.complete()) throw error(errc::missing_disclosure, "required disclosure fields missing");

    Listing l;
    l.id = next_listing_++;
    l.seller = member.id;
    l.token = token;
    if (*d.token_standard != TokenStandard::Fungible) l.token.amount = 1;
    l.disclosure = d;
    l.intake = make_wallet(WalletRole::ExchangeIntake, std::nullopt);
    l.deposit_deadline = clock_->now + cfg_.deposit_timeout_s;

    // The intake wallet makes exactly one outbound token transfer in its life
    // (delivery or return); float that much gas up front.
    float_gas(l.intake.address(), 1, l.id);

    if (*d.token_standard == TokenStandard::Rwa3643) {
        if (const TokenContract* c = ledger_->find_contract(token.contract)) {
            if (c->permissioned()) {
                const auto& tx = ledger_->register_identity(token.contract, agent_,
                                                            l.intake.address(), exchange_claim());
                tx_log_.emplace_back(l.id, tx.hash);
            }
        }
        // unknown contracts fall through; the compliance review rejects them
    }

    transition(l, ListingState::AwaitingDeposit);
    auto [it, ok] = listings_.emplace(l.id, std::move(l));
    (void)ok;
    return it->first;
}

void Exchange::confirm_deposit(std::uint64_t listing_id) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::AwaitingDeposit)
        throw error(errc::wrong_state, "listing is not awaiting a deposit");
    if (clock_->now > l.deposit_deadline)
        throw error(errc::deposit_timeout, "deposit window has closed");

    const LedgerTransaction* match = nullptr;
    bool saw_any = false;
    for (const auto& b : ledger_->blocks()) {
        for (const auto& tx : b.txs) {
            if (tx.to != l.intake.address() || !tx.token_op || !tx.token_op->moves_token())
                continue;
            if (consumed_txs_.count(tx.hash)) continue;
            saw_any = true;
            if (tx.token_op->contract != l.token.contract) continue;
            if (l.token.token_id && tx.token_op->token_id != l.token.token_id) continue;
            if (!l.token.token_id && tx.token_op->token_id) continue;
            if (tx.token_op->amount != l.token.amount) continue;
            match = &tx;
            break;
        }
        if (match) break;
    }
    if (!match)
        throw error(errc::deposit_mismatch,
                    saw_any ? "deposited token does not match the listing"
                            : "no deposit observed");

    consumed_txs_.insert(match->hash);
    l.deposit_source = match->from;

    SettlementRecord rec;
    rec.listing_id = l.id;
    rec.seller = l.seller;
    rec.token_contract = l.token.contract;
    rec.token_id = l.token.token_id;
    rec.token_amount = l.token.amount;
    rec.deposit_source = match->from;
    rec.intake_wallet = l.intake.address();
    rec.deposit_tx = match->hash;
    rec.deposited_at = match->timestamp;
    records_[l.id] = std::move(rec);

    transition(l, ListingState::UnderReview);
}

ListingState Exchange::review_listing(std::uint64_t listing_id) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::UnderReview)
        throw error(errc::wrong_state, "listing is not under review");

    const TokenContract* c = ledger_->find_contract(l.token.contract);
    bool ok = c != nullptr;
    if (ok && c->standard != *l.disclosure.token_standard) ok = false;  // declared standard must hold
    if (ok && cfg_.contract_blacklist.count(l.token.contract)) ok = false;

    if (ok) {
        transition(l, ListingState::Listed);
        return l.state;
    }
    transition(l, ListingState::Rejected);
    notify(Notification{l.seller, NotificationKind::ListingRejected, l.id, std::nullopt, {}, {}, 0});
    return_token(l.id);
    return ListingState::Rejected;
}

void Exchange::open_auction(std::uint64_t listing_id, std::uint64_t window_s, AuctionPolicy policy,
                            std::optional<Amount> reserve) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::Listed)
        throw error(errc::wrong_state, "only a listed token can go to auction");
    Auction a;
    a.listing_id = listing_id;
    a.policy = policy;
    a.opens_at = clock_->now;
    a.closes_at = clock_->now + window_s;
    a.reserve_price = reserve;
    auctions_[listing_id] = std::move(a);
    transition(l, ListingState::InAuction);
}

BidResponse Exchange::place_bid(const std::string& session, std::uint64_t listing_id,
                                Amount amount) {
    const MemberRecord& member = members_->authenticate_full(session);
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::InAuction)
        throw error(errc::auction_closed, "listing is not in auction");
    auto it = auctions_.find(listing_id);
    if (it == auctions_.end()) throw error(errc::no_record, "no auction for listing");
    return artex::place_bid(it->second, member.id, amount, clock_->now);
}

std::optional<AuctionOutcome> Exchange::close_auction(std::uint64_t listing_id) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::InAuction)
        throw error(errc::wrong_state, "listing is not in auction");
    auto it = auctions_.find(listing_id);
    if (it == auctions_.end()) throw error(errc::no_record, "no auction for listing");

    const auto& outcome = artex::close_auction(it->second, clock_->now);
    transition(l, ListingState::AuctionEnded);
    if (outcome) {
        l.winner = outcome->winner;
        l.price = outcome->price;
    } else {
        return_token(listing_id);
    }
    return outcome;
}

void Exchange::notify_results(std::uint64_t listing_id, std::size_t requested_addresses) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::AuctionEnded)
        throw error(errc::wrong_state, "auction has not ended");
    if (!l.winner) throw error(errc::no_winner, "auction closed without a winner");

    // Seller learns the final price, never the counterparty.
    notify(Notification{l.seller, NotificationKind::AuctionEndedSeller, l.id, l.price, {}, {}, 0});

    std::size_t k = std::max<std::size_t>(1, requested_addresses);
    std::vector<Address> addrs;
    if (cfg_.strict_routing_fidelity) {
        for (std::size_t i = 0; i < k; ++i) {
            Wallet& w = make_wallet(WalletRole::ExchangePayment, std::nullopt);
            // strict mode pays the seller out of these wallets later; give
            // them gas headroom for payout, dust and refund traffic
            float_gas(w.address(), 8, l.id);
            addrs.push_back(w.address());
        }
    } else {
        if (pool_.empty()) prepare_pool();
        for (std::size_t i = 0; i < k; ++i) {
            addrs.push_back(pool_[pool_cursor_ % pool_.size()]);
            ++pool_cursor_;
        }
    }
    l.payment_addresses = addrs;

    notify(Notification{*l.winner, NotificationKind::AuctionWonBuyer, l.id, l.price, {},
                        {"single_payment", "split_sources", "installments"}, 0});
    notify(Notification{*l.winner, NotificationKind::PaymentAddresses, l.id, std::nullopt, addrs,
                        {}, 0});

    // Everyone else: the bare fact that the auction ended.
    std::set<MemberId> losers;
    if (auto it = auctions_.find(listing_id); it != auctions_.end())
        for (const Bid& b : it->second.bids)
            if (b.bidder != *l.winner) losers.insert(b.bidder);
    for (const auto& m : losers)
        notify(Notification{m, NotificationKind::AuctionEndedOther, l.id, std::nullopt, {}, {}, 0});

    l.payment_deadline = clock_->now + cfg_.payment_timeout_s;
    transition(l, ListingState::AwaitingPayment);

    auto rec = records_.find(l.id);
    if (rec != records_.end()) {
        rec->second.buyer = *l.winner;
        rec->second.price = l.price;
        rec->second.fee = static_cast<Amount>((static_cast<unsigned __int128>(l.price) * cfg_.fee_bps) / 10000);
    }
}

void Exchange::return_token(std::uint64_t listing_id) {
    Listing& l = listing_mut(listing_id);
    bool no_bids_end = l.state == ListingState::AuctionEnded && !l.winner;
    if (l.state != ListingState::Rejected && l.state != ListingState::Defaulted && !no_bids_end)
        throw error(errc::wrong_state, "nothing to return in this state");
    if (!l.deposit_source) throw error(errc::wrong_state, "no deposit was made");

    const Wallet& intake = wallet_at(l.intake.address());
    const auto& tx = ledger_->transfer_token(intake.keys, l.token.contract, l.token.token_id,
                                             l.token.amount, *l.deposit_source, 0);
    tx_log_.emplace_back(l.id, tx.hash);
    transition(l, ListingState::Returned);
    notify(Notification{l.seller, NotificationKind::Returned, l.id, std::nullopt, {}, {}, 0});
}

}  // namespace artex
