#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "artex/common.hpp"
#include "artex/identity.hpp"
#include "artex/ledger.hpp"

namespace artex {

struct PaymentLeg {
    Address source;  // buyer payment wallet
    Address dest;    // exchange payment wallet issued for this listing
    Amount amount = 0;
    std::uint64_t at_offset = 0;  // buyer's intended schedule, informational

    // filled by payment monitoring
    std::string observed_tx;
    Amount observed_value = 0;
    bool observed = false;

    Amount surplus() const { return observed ? observed_value - amount : 0; }
};

struct PaymentPlan {
    std::uint64_t listing_id = 0;
    std::vector<PaymentLeg> legs;
    std::uint64_t created_at = 0;
    std::uint64_t deadline = 0;

    Amount total() const {
        Amount t = 0;
        for (const auto& l : legs) t = checked_add(t, l.amount);
        return t;
    }
};

struct PayoutLeg {
    Address dest;  // seller-chosen wallet (may be the original token wallet)
    Amount amount = 0;
    std::uint64_t at_offset = 0;  // relative to settlement start, jitter applied

    Address source;  // chosen at execution time per routing mode
    std::string executed_tx;
    bool executed = false;
};

struct PayoutPlan {
    std::uint64_t listing_id = 0;
    std::vector<PayoutLeg> legs;
    std::uint64_t created_at = 0;

    Amount total() const {
        Amount t = 0;
        for (const auto& l : legs) t = checked_add(t, l.amount);
        return t;
    }
};

// Off-ledger delivery of the fresh wallet and its private key. Lives only in
// the per-member secure channel queue; never serialized into public artifacts.
struct SecureChannelMessage {
    MemberId recipient;
    KeyPair wallet;  // FreshDelivery wallet holding the purchased token
    std::uint64_t sent_at = 0;
};

struct RefundRecord {
    Address to;
    Amount amount = 0;
    std::string tx;
};

// The exchange's private record of one completed (or failed) trade; the
// investigator-disclosure surface and the harness ground-truth source.
struct SettlementRecord {
    std::uint64_t listing_id = 0;
    MemberId seller;
    MemberId buyer;
    Address token_contract;
    std::optional<std::uint64_t> token_id;
    Amount token_amount = 0;
    Amount price = 0;
    Amount fee = 0;

    Address deposit_source;   // seller wallet that made the deposit
    Address intake_wallet;    // per-listing custody wallet
    Address delivery_wallet;  // fresh wallet handed to the buyer

    std::vector<PaymentLeg> payment_legs;
    std::vector<PayoutLeg> payout_legs;
    std::vector<RefundRecord> refunds;
    std::string deposit_tx;
    std::string delivery_tx;
    std::string dust_tx;

    std::uint64_t deposited_at = 0;
    std::uint64_t settling_at = 0;
    std::uint64_t delivered_at = 0;
    std::uint64_t completed_at = 0;
};

}  // namespace artex
