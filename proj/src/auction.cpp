#include "artex/auction.hpp"

namespace artex {

std::optional<AuctionOutcome> pick_winner(const std::vector<Bid>& bids,
                                          std::optional<Amount> reserve_price) {
    const Bid* best = nullptr;
    for (const Bid& b : bids) {
        if (!best || b.amount > best->amount) best = &b;
        // equal amounts: the earlier bid keeps the lead; list order breaks
        // same-timestamp ties deterministically
    }
    if (!best) return std::nullopt;
    if (reserve_price && best->amount < *reserve_price) return std::nullopt;
    return AuctionOutcome{best->bidder, best->amount};
}

BidResponse place_bid(Auction& auction, const MemberId& bidder, Amount amount, std::uint64_t now) {
    if (auction.outcome || now >= auction.closes_at || now < auction.opens_at)
        throw error(errc::auction_closed, "auction is not open");
    if (amount == 0) throw error(errc::bid_too_low, "bid must be positive");

    if (auction.policy == AuctionPolicy::HiddenAscending) {
        Amount current_max = 0;
        for (const Bid& b : auction.bids) current_max = std::max(current_max, b.amount);
        // The rejection deliberately carries no amount.
        if (amount <= current_max) throw error(errc::bid_too_low, "a higher bid exists");
    }

    auction.bids.push_back(Bid{bidder, amount, now});

    BidResponse r;
    r.accepted = true;
    if (auction.policy == AuctionPolicy::HiddenAscending) {
        auto lead = pick_winner(auction.bids, std::nullopt);
        r.leading = lead && lead->winner == bidder && lead->price == amount;
    }
    return r;
}

const std::optional<AuctionOutcome>& close_auction(Auction& auction, std::uint64_t now) {
    if (auction.outcome) return auction.outcome;
    if (now < auction.closes_at)
        throw error(errc::not_yet_closable, "auction window still open");
    auction.outcome = pick_winner(auction.bids, auction.reserve_price);
    return auction.outcome;
}

}  // namespace artex
