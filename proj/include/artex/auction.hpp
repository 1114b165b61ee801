#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "artex/common.hpp"
#include "artex/identity.hpp"

namespace artex {

enum class AuctionPolicy : std::uint8_t { HiddenAscending, SealedBid };

struct Bid {
    MemberId bidder;
    Amount amount = 0;
    std::uint64_t at = 0;
};

struct AuctionOutcome {
    MemberId winner;
    Amount price = 0;
};

struct BidResponse {
    bool accepted = false;
    // Whether the caller's latest bid currently leads. The only feedback a
    // bidder ever receives; SealedBid reveals nothing and always says false.
    bool leading = false;
};

/// Hidden-bid auction over a fixed window. Bidding is entirely off-chain:
/// no ledger transaction is ever emitted from here.
struct Auction {
    std::uint64_t listing_id = 0;
    AuctionPolicy policy = AuctionPolicy::HiddenAscending;
    std::uint64_t opens_at = 0;
    std::uint64_t closes_at = 0;
    std::optional<Amount> reserve_price;
    std::vector<Bid> bids;
    std::optional<AuctionOutcome> outcome;

    bool open_at(std::uint64_t now) const { return now >= opens_at && now < closes_at; }
};

// Winner = highest amount, earliest bid wins ties. Empty when there are no
// bids or the best bid is below the reserve.
std::optional<AuctionOutcome> pick_winner(const std::vector<Bid>& bids,
                                          std::optional<Amount> reserve_price);

BidResponse place_bid(Auction& auction, const MemberId& bidder, Amount amount, std::uint64_t now);

// Fixes the outcome; NotYetClosable before the window ends.
const std::optional<AuctionOutcome>& close_auction(Auction& auction, std::uint64_t now);

}  // namespace artex
