#include <algorithm>

#include <json.hpp>

#include "artex/exchange.hpp"
#include "artex/sha256.hpp"

namespace artex {

using ordered_json = nlohmann::ordered_json;

const PaymentPlan& Exchange::propose_payment_plan(const std::string& session,
                                                  std::uint64_t listing_id,
                                                  std::vector<PaymentLeg> legs) {
    const MemberRecord& member = members_->authenticate_full(session);
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::AwaitingPayment)
        throw error(errc::wrong_state, "listing is not awaiting payment");
    if (!l.winner || member.id != *l.winner)
        throw error(errc::not_winner, "only the auction winner can propose a payment plan");
    if (legs.empty()) throw error(errc::sum_mismatch, "payment plan has no legs");

    Amount total = 0;
    for (const auto& leg : legs) {
        total = checked_add(total, leg.amount);
        bool known = std::find(l.payment_addresses.begin(), l.payment_addresses.end(), leg.dest) !=
                     l.payment_addresses.end();
        if (!known)
            throw error(errc::unknown_destination, "leg destination was not issued for this listing");
    }
    if (total != l.price) throw error(errc::sum_mismatch, "legs do not sum to the winning price");

    PaymentPlan plan;
    plan.listing_id = listing_id;
    plan.legs = std::move(legs);
    plan.created_at = clock_->now;
    plan.deadline = l.payment_deadline;
    auto [it, ok] = payment_plans_.insert_or_assign(listing_id, std::move(plan));
    (void)ok;
    return it->second;
}

ListingState Exchange::monitor_payments(std::uint64_t listing_id) {
    Listing& l = listing_mut(listing_id);
    if (l.state != ListingState::AwaitingPayment) return l.state;  // idempotent verdict

    auto pit = payment_plans_.find(listing_id);
    if (pit == payment_plans_.end()) {
        if (clock_->now >= l.payment_deadline) {
            transition(l, ListingState::Defaulted);
            return_token(listing_id);
        }
        return l.state;
    }
    PaymentPlan& plan = pit->second;

    for (auto& leg : plan.legs) {
        if (leg.observed) continue;
        for (const auto& b : ledger_->blocks()) {
            for (const auto& tx : b.txs) {
                if (tx.token_op || tx.from != leg.source || tx.to != leg.dest) continue;
                if (tx.value < leg.amount) continue;
                if (tx.timestamp < plan.created_at) continue;
                if (consumed_txs_.count(tx.hash)) continue;
                leg.observed = true;
                leg.observed_tx = tx.hash;
                leg.observed_value = tx.value;
                consumed_txs_.insert(tx.hash);
                break;
            }
            if (leg.observed) break;
        }
    }

    bool all = std::all_of(plan.legs.begin(), plan.legs.end(),
                           [](const PaymentLeg& leg) { return leg.observed; });
    if (all) {
        start_settling(l);
        return l.state;
    }
    if (clock_->now >= plan.deadline) {
        // Refund whatever arrived, then hand the token back.
        for (auto& leg : plan.legs) {
            if (!leg.observed || leg.observed_value == 0) continue;
            const Wallet& holder = wallet_at(leg.dest);
            const auto& tx = ledger_->transfer_native(holder.keys, leg.source, leg.observed_value);
            tx_log_.emplace_back(l.id, tx.hash);
        }
        transition(l, ListingState::Defaulted);
        return_token(listing_id);
    }
    return l.state;
}

const PayoutPlan& Exchange::request_settlement(const std::string& session,
                                               std::uint64_t listing_id,
                                               const std::vector<Address>& payout_wallets,
                                               std::size_t installments, std::uint64_t spacing_s) {
    const MemberRecord& member = members_->authenticate_full(session);
    Listing& l = listing_mut(listing_id);
    if (member.id != l.seller)
        throw error(errc::not_seller, "only the seller can request settlement");
    if (!l.winner) throw error(errc::wrong_state, "winning price is not known yet");
    if (payout_wallets.empty()) throw error(errc::empty_wallet_set, "no payout wallets given");
    if (payout_plans_.count(listing_id))
        throw error(errc::wrong_state, "settlement already requested");

    auto rec = records_.find(listing_id);
    Amount fee = rec != records_.end() ? rec->second.fee : 0;
    Amount total = checked_sub(l.price, fee);

    std::size_t n = std::max<std::size_t>(1, installments);
    std::size_t leg_count = payout_wallets.size() * n;
    Amount base = total / leg_count;
    Amount remainder = total % leg_count;

    PayoutPlan plan;
    plan.listing_id = listing_id;
    plan.created_at = clock_->now;
    std::uint64_t prev_offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t w = 0; w < payout_wallets.size(); ++w) {
            std::size_t idx = i * payout_wallets.size() + w;
            PayoutLeg leg;
            leg.dest = payout_wallets[w];
            leg.amount = base + (idx < remainder ? 1 : 0);
            if (idx == 0 || spacing_s == 0) {
                leg.at_offset = idx == 0 ? 0 : idx;  // preserve ordering even without spacing
            } else {
                double jitter = (rng_.uniform01() * 2.0 - 1.0) * cfg_.installment_jitter_frac;
                auto off = static_cast<std::int64_t>(static_cast<double>(idx * spacing_s) *
                                                     (1.0 + jitter));
                leg.at_offset = off < 1 ? 1 : static_cast<std::uint64_t>(off);
            }
            if (idx > 0 && leg.at_offset <= prev_offset) leg.at_offset = prev_offset + 1;
            prev_offset = leg.at_offset;
            plan.legs.push_back(leg);
        }
    }

    auto [it, ok] = payout_plans_.emplace(listing_id, std::move(plan));
    (void)ok;
    if (l.state == ListingState::Settling) schedule_payouts(l);
    return it->second;
}

void Exchange::start_settling(Listing& l) {
    transition(l, ListingState::Settling);
    auto rec = records_.find(l.id);
    if (rec != records_.end()) {
        rec->second.settling_at = clock_->now;
        if (auto pit = payment_plans_.find(l.id); pit != payment_plans_.end())
            rec->second.payment_legs = pit->second.legs;
    }
    deliver_token(l);
    if (payout_plans_.count(l.id)) schedule_payouts(l);
}

void Exchange::deliver_token(Listing& l) {
    Wallet& fresh = make_wallet(WalletRole::FreshDelivery, l.winner);
    auto rec = records_.find(l.id);

    const TokenContract* c = ledger_->find_contract(l.token.contract);
    if (c && c->permissioned()) {
        try {
            const auto& tx = ledger_->register_identity(l.token.contract, agent_, fresh.address(),
                                                        exchange_claim());
            tx_log_.emplace_back(l.id, tx.hash);
        } catch (const error& e) {
            throw error(errc::delivery_failed,
                        std::string("identity registration for delivery wallet failed: ") + e.what());
        }
    }

    Amount dust = delivery_dust();
    if (dust > 0) {
        Address source = cfg_.strict_routing_fidelity
                             ? treasury_.address()
                             : pick_payout_source(l, 0, checked_add(dust, ledger_->gas_fee()));
        const Wallet& src = wallet_at(source);
        const auto& tx = ledger_->transfer_native(src.keys, fresh.address(), dust);
        tx_log_.emplace_back(l.id, tx.hash);
        if (rec != records_.end()) rec->second.dust_tx = tx.hash;
    }

    const Wallet& intake = wallet_at(l.intake.address());
    const auto& tx = ledger_->transfer_token(intake.keys, l.token.contract, l.token.token_id,
                                             l.token.amount, fresh.address(), 0);
    tx_log_.emplace_back(l.id, tx.hash);

    SecureChannelMessage msg;
    msg.recipient = *l.winner;
    msg.wallet = fresh.keys;
    msg.sent_at = clock_->now;
    channels_[*l.winner].push_back(msg);

    l.delivery_done = true;
    if (rec != records_.end()) {
        rec->second.delivery_wallet = fresh.address();
        rec->second.delivery_tx = tx.hash;
        rec->second.delivered_at = clock_->now;
    }
}

void Exchange::schedule_payouts(Listing& l) {
    const PayoutPlan& plan = payout_plans_.at(l.id);
    for (std::size_t j = 0; j < plan.legs.size(); ++j)
        schedule_.push_back(Scheduled{clock_->now + plan.legs[j].at_offset, l.id, j});
    std::sort(schedule_.begin(), schedule_.end(), [](const Scheduled& a, const Scheduled& b) {
        return std::tie(a.due, a.listing_id, a.leg_index) <
               std::tie(b.due, b.listing_id, b.leg_index);
    });
}

Address Exchange::pick_payout_source(const Listing& l, std::size_t leg_index, Amount needed) {
    if (cfg_.strict_routing_fidelity) {
        if (l.payment_addresses.empty())
            throw error(errc::treasury_insufficient, "no payment wallets to route from");
        Address a = l.payment_addresses[leg_index % l.payment_addresses.size()];
        if (ledger_->balance(a) < needed)
            throw error(errc::treasury_insufficient, "strict routing source underfunded");
        return a;
    }
    if (pool_.empty()) prepare_pool();
    // any pool wallet not issued to this listing, first fit from the cursor
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        const Address& a = pool_[(pool_cursor_ + i) % pool_.size()];
        bool is_payment = std::find(l.payment_addresses.begin(), l.payment_addresses.end(), a) !=
                          l.payment_addresses.end();
        if (is_payment) continue;
        if (ledger_->balance(a) >= needed) {
            ++pool_cursor_;
            return a;
        }
    }
    if (ledger_->balance(treasury_.address()) >= needed) return treasury_.address();
    throw error(errc::treasury_insufficient, "no payout source can cover the leg");
}

void Exchange::execute_due_payouts() {
    for (auto& item : schedule_) {
        if (item.due > clock_->now) break;
        auto pit = payout_plans_.find(item.listing_id);
        if (pit == payout_plans_.end()) continue;
        PayoutLeg& leg = pit->second.legs[item.leg_index];
        if (leg.executed) continue;
        Listing& l = listing_mut(item.listing_id);
        if (l.state != ListingState::Settling) continue;

        Address source =
            pick_payout_source(l, item.leg_index, checked_add(leg.amount, ledger_->gas_fee()));
        const Wallet& src = wallet_at(source);
        const auto& tx = ledger_->transfer_native(src.keys, leg.dest, leg.amount);
        tx_log_.emplace_back(l.id, tx.hash);
        leg.executed = true;
        leg.executed_tx = tx.hash;
        leg.source = source;

        bool all = std::all_of(pit->second.legs.begin(), pit->second.legs.end(),
                               [](const PayoutLeg& x) { return x.executed; });
        if (all) l.payout_done = true;
    }
    std::erase_if(schedule_, [this](const Scheduled& s) { return s.due <= clock_->now; });
}

void Exchange::finish_if_complete(Listing& l) {
    if (l.state != ListingState::Settling || !l.delivery_done || !l.payout_done) return;

    auto rec = records_.find(l.id);
    if (!l.refunds_done) {
        if (auto pit = payment_plans_.find(l.id); pit != payment_plans_.end()) {
            for (const auto& leg : pit->second.legs) {
                Amount extra = leg.surplus();
                if (extra == 0) continue;
                const Wallet& holder = wallet_at(leg.dest);
                const auto& tx = ledger_->transfer_native(holder.keys, leg.source, extra);
                tx_log_.emplace_back(l.id, tx.hash);
                if (rec != records_.end())
                    rec->second.refunds.push_back(RefundRecord{leg.source, extra, tx.hash});
            }
        }
        l.refunds_done = true;
    }

    transition(l, ListingState::Completed);
    if (rec != records_.end()) {
        rec->second.completed_at = clock_->now;
        if (auto pit = payment_plans_.find(l.id); pit != payment_plans_.end())
            rec->second.payment_legs = pit->second.legs;
        if (auto oit = payout_plans_.find(l.id); oit != payout_plans_.end())
            rec->second.payout_legs = oit->second.legs;
    }
    notify(Notification{l.seller, NotificationKind::SettlementComplete, l.id, l.price, {}, {}, 0});
    notify(Notification{*l.winner, NotificationKind::SettlementComplete, l.id, l.price, {}, {}, 0});
}

void Exchange::pump() {
    // Deterministic order: listings ascending, then the payout schedule.
    for (auto& [id, l] : listings_) {
        if (l.state == ListingState::AwaitingDeposit && clock_->now > l.deposit_deadline) {
            transition(l, ListingState::Rejected);  // nothing arrived, nothing to return
            notify(Notification{l.seller, NotificationKind::ListingRejected, id, std::nullopt, {},
                                {}, 0});
        }
    }
    for (auto& [id, l] : listings_)
        if (l.state == ListingState::AwaitingPayment) monitor_payments(id);
    execute_due_payouts();
    for (auto& [id, l] : listings_) finish_if_complete(l);
}

std::optional<std::uint64_t> Exchange::next_due() const {
    std::optional<std::uint64_t> due;
    for (const auto& s : schedule_)
        if (!due || s.due < *due) due = s.due;
    for (const auto& [id, l] : listings_) {
        if (l.state == ListingState::AwaitingDeposit)
            if (!due || l.deposit_deadline + 1 < *due) due = l.deposit_deadline + 1;
        if (l.state == ListingState::AwaitingPayment)
            if (!due || l.payment_deadline < *due) due = l.payment_deadline;
    }
    return due;
}

const SettlementRecord& Exchange::investigator_disclosure(const std::string& credential,
                                                          std::uint64_t listing_id) const {
    if (credential != cfg_.authority_credential)
        throw error(errc::not_authorized, "authority credential mismatch");
    auto it = records_.find(listing_id);
    if (it == records_.end() || it->second.settling_at == 0)
        throw error(errc::no_record, "no settlement record for listing");
    return it->second;
}

const SettlementRecord& Exchange::investigator_disclosure_by_token(
    const std::string& credential, const Address& contract,
    std::optional<std::uint64_t> token_id) const {
    if (credential != cfg_.authority_credential)
        throw error(errc::not_authorized, "authority credential mismatch");
    for (const auto& [id, rec] : records_) {
        if (rec.settling_at == 0) continue;
        if (rec.token_contract == contract && rec.token_id == token_id) return rec;
    }
    throw error(errc::no_record, "no settlement record for token");
}

std::string Exchange::export_settlement_records() const {
    ordered_json arr = ordered_json::array();
    for (const auto& [id, rec] : records_) {
        if (rec.settling_at == 0) continue;
        ordered_json j;
        j["listing_id"] = rec.listing_id;
        j["seller"] = rec.seller;
        j["buyer"] = rec.buyer;
        j["token_contract"] = rec.token_contract.hex();
        j["token_id"] = rec.token_id ? ordered_json(*rec.token_id) : ordered_json(nullptr);
        j["token_amount"] = rec.token_amount;
        j["price"] = rec.price;
        j["fee"] = rec.fee;
        j["deposit_source"] = rec.deposit_source.hex();
        j["intake_wallet"] = rec.intake_wallet.hex();
        j["delivery_wallet"] = rec.delivery_wallet.hex();
        j["deposit_tx"] = rec.deposit_tx;
        j["delivery_tx"] = rec.delivery_tx;
        ordered_json pays = ordered_json::array();
        for (const auto& leg : rec.payment_legs) {
            pays.push_back({{"source", leg.source.hex()},
                            {"dest", leg.dest.hex()},
                            {"amount", leg.amount},
                            {"observed_value", leg.observed_value},
                            {"tx", leg.observed_tx}});
        }
        j["payment_legs"] = pays;
        ordered_json outs = ordered_json::array();
        for (const auto& leg : rec.payout_legs) {
            outs.push_back({{"source", leg.source.hex()},
                            {"dest", leg.dest.hex()},
                            {"amount", leg.amount},
                            {"tx", leg.executed_tx}});
        }
        j["payout_legs"] = outs;
        ordered_json refunds = ordered_json::array();
        for (const auto& rf : rec.refunds)
            refunds.push_back({{"to", rf.to.hex()}, {"amount", rf.amount}, {"tx", rf.tx}});
        j["refunds"] = refunds;
        j["deposited_at"] = rec.deposited_at;
        j["settling_at"] = rec.settling_at;
        j["delivered_at"] = rec.delivered_at;
        j["completed_at"] = rec.completed_at;
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace artex
