#include <doctest.h>

#include <algorithm>

#include "artex/auction.hpp"
#include "oracles.hpp"

using namespace artex;

namespace {
Auction open_auction(std::uint64_t opens, std::uint64_t window,
                     AuctionPolicy policy = AuctionPolicy::HiddenAscending) {
    Auction a;
    a.listing_id = 1;
    a.policy = policy;
    a.opens_at = opens;
    a.closes_at = opens + window;
    return a;
}
}  // namespace

TEST_CASE("winner equals the brute-force argmax on random bid lists") {
    Rng rng(2024);
    for (int round = 0; round < 200; ++round) {
        std::vector<Bid> bids;
        std::size_t n = rng.range(0, 6);
        for (std::size_t i = 0; i < n; ++i)
            bids.push_back(Bid{"m" + std::to_string(rng.range(0, 3)), rng.range(1, 20),
                               100 + i});
        auto expect = oracles::brute_force_winner(bids, std::nullopt);
        auto got = pick_winner(bids, std::nullopt);
        CHECK(got.has_value() == expect.has_value());
        if (got) {
            CHECK(got->winner == expect->winner);
            CHECK(got->price == expect->price);
        }
    }
}

TEST_CASE("arrival order of distinct amounts never changes the winner") {
    // exhaustive permutations at n <= 5
    std::vector<Amount> amounts = {3, 5, 4, 9, 7};
    std::vector<std::size_t> idx = {0, 1, 2, 3, 4};
    std::sort(idx.begin(), idx.end());
    do {
        std::vector<Bid> bids;
        for (std::size_t i = 0; i < idx.size(); ++i)
            bids.push_back(Bid{"m" + std::to_string(idx[i]), amounts[idx[i]], 100 + i});
        auto got = pick_winner(bids, std::nullopt);
        REQUIRE(got);
        CHECK(got->winner == "m3");  // holder of amount 9
        CHECK(got->price == 9);
    } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("bids of 1 then 1.1 display coins: the second leads") {
    const Amount coin = 1'000'000'000;
    Auction a = open_auction(1000, 3600);
    auto r1 = place_bid(a, "first", 1 * coin, 1100);
    CHECK(r1.accepted);
    CHECK(r1.leading);
    auto r2 = place_bid(a, "second", coin + coin / 10, 1200);
    CHECK(r2.accepted);
    CHECK(r2.leading);
    auto outcome = close_auction(a, a.closes_at);
    REQUIRE(outcome);
    CHECK(outcome->winner == "second");
    CHECK(outcome->price == coin + coin / 10);
}

TEST_CASE("equal amounts: the earlier bid keeps the lead") {
    Auction a = open_auction(0, 100, AuctionPolicy::SealedBid);  // sealed accepts equal bids
    place_bid(a, "early", 10, 1);
    place_bid(a, "late", 10, 2);
    auto outcome = close_auction(a, 100);
    REQUIRE(outcome);
    CHECK(outcome->winner == "early");
}

TEST_CASE("window edges") {
    SUBCASE("bid after the close is rejected") {
        Auction a = open_auction(0, 100);
        try {
            place_bid(a, "m", 5, 100);
            FAIL("expected AuctionClosed");
        } catch (const error& e) {
            CHECK(e.code() == errc::auction_closed);
        }
    }
    SUBCASE("zero-length window closes immediately with no bids") {
        Auction a = open_auction(50, 0);
        auto outcome = close_auction(a, 50);
        CHECK(!outcome);
    }
    SUBCASE("close before the window ends is refused") {
        Auction a = open_auction(0, 100);
        CHECK_THROWS_AS(close_auction(a, 99), error);
    }
}

TEST_CASE("ascending auctions refuse lower bids without leaking amounts") {
    Auction a = open_auction(0, 100);
    place_bid(a, "m1", 50, 1);
    try {
        place_bid(a, "m2", 40, 2);
        FAIL("expected BidTooLow");
    } catch (const error& e) {
        CHECK(e.code() == errc::bid_too_low);
        CHECK(std::string(e.what()).find("50") == std::string::npos);
        CHECK(std::string(e.what()).find("40") == std::string::npos);
    }
}

TEST_CASE("reserve price routes to no-winner") {
    Auction a = open_auction(0, 100);
    a.reserve_price = 100;
    place_bid(a, "m", 99, 1);
    CHECK(!close_auction(a, 100));
}

// The transcript a member sees depends only on their own bids and the leading
// flag: perturbing other bidders' amounts while preserving the ordering
// relative to the member's bids changes nothing for them.
TEST_CASE("hiding: a member's transcript is invariant to order-preserving perturbation") {
    SUBCASE("hand-built case") {
        auto run = [](Amount other1, Amount other2) {
            Auction a = open_auction(0, 1000);
            std::vector<std::pair<bool, bool>> transcript;  // m's responses
            auto mine = [&](Amount v, std::uint64_t t) {
                try {
                    BidResponse r = place_bid(a, "m", v, t);
                    transcript.emplace_back(r.accepted, r.leading);
                } catch (const error&) {
                    transcript.emplace_back(false, false);
                }
            };
            mine(10, 1);
            place_bid(a, "o", other1, 2);  // between m's 10 and m's 30
            mine(5, 3);                    // too low either way
            mine(30, 4);
            place_bid(a, "o", other2, 5);  // above 30 either way
            mine(20, 6);                   // too low either way
            return transcript;
        };
        CHECK(run(15, 40) == run(22, 55));
    }

    SUBCASE("seeded random sequences") {
        // m's bids sit on fixed levels 1000, 2000, ...; other bidders land in
        // the open gaps between levels. Two runs share the interleaving and
        // the gap index of every other-bid but not the exact amounts; as long
        // as relative order inside a gap is preserved, m cannot tell them apart.
        Rng rng(99);
        for (int round = 0; round < 100; ++round) {
            struct Step {
                bool mine;
                Amount level;  // m: level value, others: gap index
                Amount rank;   // order within the gap
            };
            std::vector<Step> script;
            std::size_t m_next = 1;
            Amount gap_rank = 0;
            std::size_t steps = 3 + rng.range(0, 5);
            for (std::size_t i = 0; i < steps; ++i) {
                if (rng.range(0, 1) == 0 && m_next <= 6) {
                    script.push_back(Step{true, 1000 * m_next, 0});
                    ++m_next;
                } else {
                    // a gap at or above the current level keeps both runs legal
                    Amount gap = rng.range(m_next > 1 ? m_next - 1 : 0, 6);
                    script.push_back(Step{false, gap, ++gap_rank});
                }
            }
            auto run = [&](Amount wiggle) {
                Auction a = open_auction(0, 100000);
                std::vector<std::pair<bool, bool>> transcript;
                std::uint64_t t = 1;
                for (const Step& s : script) {
                    if (s.mine) {
                        try {
                            BidResponse r = place_bid(a, "m", s.level, t++);
                            transcript.emplace_back(r.accepted, r.leading);
                        } catch (const error&) {
                            transcript.emplace_back(false, false);
                        }
                    } else {
                        // strictly inside gap (g, g+1), ordered by rank
                        Amount v = 1000 * s.level + 10 * s.rank + wiggle;
                        try {
                            place_bid(a, "other", v, t++);
                        } catch (const error&) {
                        }
                    }
                }
                return transcript;
            };
            CHECK(run(1) == run(7));
        }
    }
}

TEST_CASE("sealed-bid policy accepts any positive bid and reveals nothing") {
    Auction a = open_auction(0, 100, AuctionPolicy::SealedBid);
    auto r1 = place_bid(a, "m1", 50, 1);
    auto r2 = place_bid(a, "m2", 10, 2);  // lower, still accepted
    CHECK(r1.accepted);
    CHECK(r2.accepted);
    CHECK(!r1.leading);
    CHECK(!r2.leading);
    auto outcome = close_auction(a, 100);
    REQUIRE(outcome);
    CHECK(outcome->winner == "m1");
}
