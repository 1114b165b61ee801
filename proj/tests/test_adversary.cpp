#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "artex/adversary/analysis.hpp"
#include "artex/harness.hpp"
#include "oracles.hpp"
#include "world.hpp"

using namespace artex;
namespace adv = artex::adversary;
using testworld::World;

namespace {

constexpr Amount kCoin = 1'000'000'000;

// A hand-built naive trade: token S->B plus payment B->S in the same block.
std::string naive_dump(Address& seller_out, Address& buyer_out, Address& contract_out) {
    World w;
    auto seller = w.full_member("m-s", 0);
    auto buyer = w.full_member("m-b", 20 * kCoin);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();
    w.ledger.transfer_token(seller.wallet, contract, 1, 1, buyer.wallet.address, 0);
    w.ledger.transfer_native(buyer.wallet, seller.wallet.address, 10 * kCoin);
    w.settle();
    seller_out = seller.wallet.address;
    buyer_out = buyer.wallet.address;
    contract_out = contract;
    return w.ledger.dump_ndjson();
}

ScenarioConfig tiny_artex_config(int pattern, bool strict) {
    ScenarioConfig c;
    c.name = "tiny";
    c.seed = 77;
    c.gas_fee = 1000;
    c.strict_routing_fidelity = strict;
    c.payment_pool_size = 3;
    c.actors.buyer_wallets_each = 3;
    c.actors.seller_payout_wallets_each = 3;
    TradeConfig t;
    t.strategy = StrategyKind::ArtexPattern;
    t.pattern = pattern;
    t.price = 100 * kCoin;
    if (pattern >= 3) t.payment_splits = {50 * kCoin, 30 * kCoin, 20 * kCoin};
    c.trades.push_back(t);
    return c;
}

}  // namespace

TEST_CASE("custody traces") {
    SUBCASE("naive trade: chain of length one, mint excluded") {
        Address s, b, c;
        std::string dump = naive_dump(s, b, c);
        adv::PublicView view = adv::PublicView::from_ndjson_string(dump);
        REQUIRE(view.tokens().size() == 1);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        REQUIRE(chain.hops.size() == 1);
        CHECK(chain.hops[0].from == s.hex());
        CHECK(chain.hops[0].to == b.hex());
    }
    SUBCASE("exchange trade: deposit then delivery, length two") {
        ScenarioResult r = run_scenario(tiny_artex_config(2, false));
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        REQUIRE(view.tokens().size() == 1);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        REQUIRE(chain.hops.size() == 2);
        CHECK(chain.hops[0].to == chain.hops[1].from);  // intake relays
        // endpoint matches the explorer's current owner
        auto gt = r.ground_truth;
        REQUIRE(gt.size() == 1);
        CHECK(gt[0].token.contract == chain.token.contract);
    }
    SUBCASE("unknown token") {
        adv::PublicView view = adv::PublicView::from_ndjson_string("");
        CHECK_THROWS_AS(adv::trace_token(view, adv::TokenKey{"0xdead", 1}), error);
    }
}

TEST_CASE("direct-swap heuristic") {
    Address s, b, c;
    std::string dump = naive_dump(s, b, c);
    adv::PublicView view = adv::PublicView::from_ndjson_string(dump);
    adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
    adv::HeuristicConfig cfg;

    SUBCASE("same-block reverse payment scores exactly one") {
        CHECK(adv::heuristic_direct_swap(view, chain.hops[0], cfg) == 1.0);
    }
    SUBCASE("a window of zero seconds still catches the same-block pair") {
        cfg.time_window_s = 0;
        CHECK(adv::heuristic_direct_swap(view, chain.hops[0], cfg) == 1.0);
    }
    SUBCASE("reverse transfer outside the window scores exactly zero") {
        // rebuild with the payment a day later
        World w;
        auto seller = w.full_member("m-s", 0);
        auto buyer = w.full_member("m-b", 20 * kCoin);
        Address contract = w.deploy_nft(seller, 1);
        w.settle();
        w.ledger.transfer_token(seller.wallet, contract, 1, 1, buyer.wallet.address, 0);
        w.settle();
        w.clock.now += 2 * 86400;
        w.ledger.transfer_native(buyer.wallet, seller.wallet.address, 10 * kCoin);
        w.settle();
        adv::PublicView v2 = adv::PublicView::from_ndjson_string(w.ledger.dump_ndjson());
        adv::CustodyChain ch2 = adv::trace_token(v2, v2.tokens()[0]);
        adv::HeuristicConfig tight;
        tight.time_window_s = 86400;
        CHECK(adv::heuristic_direct_swap(v2, ch2.hops[0], tight) == 0.0);
    }
    SUBCASE("exchange-mediated hops have no reverse payment at all") {
        ScenarioResult r = run_scenario(tiny_artex_config(2, false));
        adv::PublicView v2 = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::CustodyChain ch2 = adv::trace_token(v2, v2.tokens()[0]);
        for (const auto& hop : ch2.hops)
            CHECK(adv::heuristic_direct_swap(v2, hop, cfg) == 0.0);
    }
}

TEST_CASE("fresh-wallet heuristic") {
    SUBCASE("the delivered wallet is flagged") {
        ScenarioResult r = run_scenario(tiny_artex_config(2, false));
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        CHECK(adv::heuristic_fresh_wallet(view, chain) == 1.0);
    }
    SUBCASE("a long-lived buyer wallet is not") {
        Address s, b, c;
        std::string dump = naive_dump(s, b, c);
        adv::PublicView view = adv::PublicView::from_ndjson_string(dump);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        CHECK(adv::heuristic_fresh_wallet(view, chain) == 0.0);
    }
    SUBCASE("noise wallets are funded at genesis, so none of them count as fresh") {
        ScenarioConfig c = tiny_artex_config(2, false);
        c.noise.wallets = 5;
        c.noise.count = 20;
        c.noise.min_amount = kCoin / 10;
        c.noise.max_amount = kCoin;
        ScenarioResult r = run_scenario(c);
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        std::size_t fresh = 0;
        for (const auto& w : r.noise_wallets)
            if (view.first_block_of(w) != 1) ++fresh;
        CHECK(fresh == 0);
    }
}

TEST_CASE("timing heuristic is the stated exponential") {
    CHECK(adv::heuristic_timing(1000, 1000, 3600) == 1.0);
    CHECK(adv::heuristic_timing(1000, 1000 + 3600, 3600) ==
          doctest::Approx(0.3679).epsilon(1e-3));
    CHECK(adv::heuristic_timing(1000 + 3600, 1000, 3600) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("amount matching agrees with the exhaustive oracle") {
    adv::HeuristicConfig cfg;

    auto check_agreement = [&](const std::string& dump) {
        adv::PublicView view = adv::PublicView::from_ndjson_string(dump);
        std::set<std::string> cluster = adv::exchange_cluster(view, cfg);
        for (const auto& token : view.tokens()) {
            adv::CustodyChain chain = adv::trace_token(view, token);
            if (chain.empty()) continue;
            adv::AmountMatchResult got = adv::heuristic_amount_match(view, chain, cfg);
            if (got.budget_exceeded) continue;
            auto expect = oracles::exhaustive_best_candidate(view, chain, cluster, cfg);
            REQUIRE(got.candidates.empty() == !expect.has_value());
            if (expect) {
                CHECK(got.candidates[0].inflows == expect->inflows);
                CHECK(got.candidates[0].outflows == expect->outflows);
                CHECK(got.candidates[0].score == expect->score);
            }
        }
    };

    SUBCASE("single strict pattern-1 trade: the flow-through pair is found") {
        ScenarioResult r = run_scenario(tiny_artex_config(1, true));
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        adv::AmountMatchResult got = adv::heuristic_amount_match(view, chain, cfg);
        REQUIRE(!got.candidates.empty());
        const auto& best = got.candidates[0];
        CHECK(best.in_sum == 100 * kCoin);
        CHECK(best.out_sum == 100 * kCoin);
        CHECK(best.inflows.size() == 1);
        CHECK(best.outflows.size() == 1);
        check_agreement(r.dump_ndjson);
    }
    SUBCASE("three concurrent pattern-3 trades") {
        const BundledScenario* s = find_scenario("artex_pattern3");
        REQUIRE(s);
        ScenarioResult r = run_scenario(s->config);
        check_agreement(r.dump_ndjson);
    }
    SUBCASE("an empty ledger neighbourhood yields no candidates") {
        Address s, b, c;
        std::string dump = naive_dump(s, b, c);
        adv::PublicView view = adv::PublicView::from_ndjson_string(dump);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        adv::AmountMatchResult got = adv::heuristic_amount_match(view, chain, cfg);
        CHECK(got.candidates.empty());
        CHECK(!got.budget_exceeded);
    }
    SUBCASE("a starved budget is reported, not fatal") {
        const BundledScenario* s = find_scenario("artex_pattern6_pool");
        REQUIRE(s);
        ScenarioResult r = run_scenario(s->config);
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::CustodyChain chain = adv::trace_token(view, view.tokens()[0]);
        adv::HeuristicConfig starved = cfg;
        starved.search_budget = 3;
        adv::AmountMatchResult got = adv::heuristic_amount_match(view, chain, starved);
        CHECK(got.budget_exceeded);
    }
}

TEST_CASE("rank_links end to end") {
    SUBCASE("naive and frontend scenarios: rank one is the true pair") {
        for (const char* name : {"naive_p2p", "frontend_hiding"}) {
            const BundledScenario* s = find_scenario(name);
            REQUIRE(s);
            ScenarioResult r = run_scenario(s->config);
            adv::Metrics m = adv::evaluate(r.analysis, r.ground_truth);
            CHECK(m.precision_at_1 == 1.0);
            CHECK(m.recall == 1.0);
        }
    }
    SUBCASE("an empty view yields an empty list") {
        adv::PublicView view = adv::PublicView::from_ndjson_string("");
        adv::HeuristicConfig cfg;
        CHECK(adv::rank_links(view, cfg).per_token.empty());
    }
    SUBCASE("outputs are a pure function of dump and config") {
        ScenarioResult r = run_scenario(tiny_artex_config(3, false));
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::HeuristicConfig cfg;
        std::string a = adv::hypotheses_to_json(adv::rank_links(view, cfg));
        std::string b = adv::hypotheses_to_json(adv::rank_links(view, cfg));
        CHECK(a == b);
    }
    SUBCASE("serial and parallel engines produce identical output") {
        const BundledScenario* s = find_scenario("artex_pattern6_pool");
        REQUIRE(s);
        ScenarioResult r = run_scenario(s->config);
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        adv::HeuristicConfig cfg = s->config.adversary;
        std::string serial = adv::hypotheses_to_json(adv::rank_links_serial(view, cfg));
        std::string parallel = adv::hypotheses_to_json(adv::rank_links_parallel(view, cfg));
        CHECK(serial == parallel);
    }
    SUBCASE("scores stay within the unit interval and ranks are ordered") {
        ScenarioResult r = run_scenario(tiny_artex_config(6, false));
        for (const auto& t : r.analysis.per_token) {
            double last = 2.0;
            for (const auto& h : t.hypotheses) {
                CHECK(h.score >= 0.0);
                CHECK(h.score <= 1.0);
                CHECK(h.score <= last);
                last = h.score;
                CHECK(!h.evidence.empty());
            }
        }
    }
    SUBCASE("every evidence hash exists in the view") {
        ScenarioResult r = run_scenario(tiny_artex_config(6, false));
        adv::PublicView view = adv::PublicView::from_ndjson_string(r.dump_ndjson);
        std::set<std::string> known;
        for (const auto& tx : view.txs()) known.insert(tx.hash);
        for (const auto& t : r.analysis.per_token)
            for (const auto& h : t.hypotheses)
                for (const auto& ev : h.evidence)
                    for (const auto& hash : ev.tx_hashes) CHECK(known.count(hash) == 1);
    }
}

TEST_CASE("evaluation metrics") {
    adv::GroundTruthEntry gt;
    gt.token = adv::TokenKey{"0xc0ffee", 1};
    gt.seller_wallets = {"0xaaa"};
    gt.buyer_wallets = {"0xbbb"};

    adv::AnalysisResult result;
    adv::TokenAnalysis ta;
    ta.token = gt.token;

    SUBCASE("all rank-one correct gives precision one") {
        adv::LinkHypothesis h;
        h.token = gt.token;
        h.seller_cluster = {"0xaaa"};
        h.buyer_cluster = {"0xbbb"};
        h.score = 0.9;
        ta.hypotheses.push_back(h);
        result.per_token.push_back(ta);
        adv::Metrics m = adv::evaluate(result, {gt});
        CHECK(m.precision_at_1 == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.mean_true_rank == 1.0);
    }
    SUBCASE("no hypotheses means zero recall") {
        result.per_token.push_back(ta);
        adv::Metrics m = adv::evaluate(result, {gt});
        CHECK(m.recall == 0.0);
        CHECK(m.precision_at_1 == 0.0);
    }
    SUBCASE("a wrong top pick with the true pair at rank two") {
        adv::LinkHypothesis wrong;
        wrong.token = gt.token;
        wrong.seller_cluster = {"0x999"};
        wrong.buyer_cluster = {"0x888"};
        wrong.score = 0.9;
        adv::LinkHypothesis right;
        right.token = gt.token;
        right.seller_cluster = {"0xaaa"};
        right.buyer_cluster = {"0xbbb"};
        right.score = 0.5;
        ta.hypotheses = {wrong, right};
        result.per_token.push_back(ta);
        adv::Metrics m = adv::evaluate(result, {gt});
        CHECK(m.precision_at_1 == 0.0);
        CHECK(m.recall == 1.0);
        CHECK(m.mean_true_rank == 2.0);
    }
}

TEST_CASE("the adversary operates on dump files alone") {
    namespace fs = std::filesystem;
    ScenarioResult r = run_scenario(tiny_artex_config(2, false));
    fs::path dir = fs::temp_directory_path() / "artex_adv_test";
    fs::create_directories(dir);
    fs::path dump_path = dir / "dump.ndjson";
    {
        std::ofstream out(dump_path);
        out << r.dump_ndjson;
    }
    adv::PublicView view = adv::PublicView::from_file(dump_path.string());
    CHECK(view.txs().size() > 0);
    adv::HeuristicConfig cfg;
    adv::AnalysisResult from_file = adv::rank_links(view, cfg);
    adv::AnalysisResult from_memory =
        adv::rank_links(adv::PublicView::from_ndjson_string(r.dump_ndjson), cfg);
    CHECK(adv::hypotheses_to_json(from_file) == adv::hypotheses_to_json(from_memory));
    fs::remove_all(dir);
}
