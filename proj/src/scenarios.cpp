#include "artex/harness.hpp"

namespace artex {

namespace {

constexpr Amount kCoin = 1'000'000'000;  // display scale: 1 coin = 10^9 units

ScenarioConfig base_config(const std::string& name, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = name;
    c.seed = seed;
    c.display_scale = kCoin;
    c.gas_fee = 1000;
    return c;
}

TradeConfig simple_trade(StrategyKind kind, Amount price, std::size_t actor,
                         std::uint64_t start_offset) {
    TradeConfig t;
    t.strategy = kind;
    t.price = price;
    t.seller = actor;
    t.buyer = actor;
    t.start_offset_s = start_offset;
    return t;
}

ScenarioConfig p2p_like(const std::string& name, StrategyKind kind, std::uint64_t seed) {
    ScenarioConfig c = base_config(name, seed);
    c.actors.sellers = 5;
    c.actors.buyers = 5;
    c.actors.buyer_wallets_each = 1;
    c.actors.seller_payout_wallets_each = 0;
    Amount prices[5] = {10 * kCoin, 12 * kCoin, 9 * kCoin, 15 * kCoin, 11 * kCoin};
    for (std::size_t i = 0; i < 5; ++i)
        c.trades.push_back(simple_trade(kind, prices[i], i, i * 4 * 3600));
    c.noise.wallets = 8;
    c.noise.count = 60;
    c.noise.min_amount = kCoin / 20;
    c.noise.max_amount = 5 * kCoin;
    return c;
}

TradeConfig artex_trade(int pattern, Amount price, std::size_t actor, std::uint64_t start_offset,
                        TokenStandard standard, std::vector<Amount> splits) {
    TradeConfig t;
    t.strategy = StrategyKind::ArtexPattern;
    t.pattern = pattern;
    t.token_standard = standard;
    t.price = price;
    t.seller = actor;
    t.buyer = actor;
    t.start_offset_s = start_offset;
    t.auction_window_s = 12 * 3600;
    t.payment_splits = std::move(splits);
    t.payout_installments = 1;
    t.payout_spacing_s = 12 * 3600;
    return t;
}

// The two pattern-comparison scenarios share everything except the routing
// pattern and the strict flag, so the measured gradient is apples to apples.
ScenarioConfig pattern_scenario(const std::string& name, int pattern, bool strict,
                                std::uint64_t seed) {
    ScenarioConfig c = base_config(name, seed);
    c.strict_routing_fidelity = strict;
    c.payment_pool_size = 6;
    c.actors.sellers = 5;
    c.actors.buyers = 5;
    c.actors.buyer_wallets_each = 3;
    c.actors.seller_payout_wallets_each = 3;
    const Amount price = 100 * kCoin;
    const std::vector<std::vector<Amount>> splits = {
        {50 * kCoin, 30 * kCoin, 20 * kCoin},
        {40 * kCoin, 35 * kCoin, 25 * kCoin},
        {34 * kCoin, 33 * kCoin, 33 * kCoin},
        {55 * kCoin, 28 * kCoin, 17 * kCoin},
        {46 * kCoin, 31 * kCoin, 23 * kCoin},
    };
    for (std::size_t i = 0; i < 5; ++i) {
        std::vector<Amount> s;
        if (pattern >= 3) s = splits[i];
        // tight stagger: the five settlements genuinely overlap in time
        c.trades.push_back(
            artex_trade(pattern, price, i, i * 3600, TokenStandard::Rwa3643, std::move(s)));
    }
    c.noise.wallets = 10;
    c.noise.count = 120;
    c.noise.min_amount = kCoin / 20;
    c.noise.max_amount = 5 * kCoin;
    return c;
}

ScenarioConfig pattern3_scenario(std::uint64_t seed) {
    ScenarioConfig c = base_config("artex_pattern3", seed);
    c.payment_pool_size = 4;
    c.actors.sellers = 3;
    c.actors.buyers = 3;
    c.actors.buyer_wallets_each = 3;
    c.actors.seller_payout_wallets_each = 0;
    Amount prices[3] = {20 * kCoin, 35 * kCoin, 50 * kCoin};
    for (std::size_t i = 0; i < 3; ++i) {
        Amount p = prices[i];
        c.trades.push_back(artex_trade(3, p, i, i * 6 * 3600, TokenStandard::NonFungible,
                                       {p / 2, p / 4, p - p / 2 - p / 4}));
    }
    c.noise.wallets = 8;
    c.noise.count = 60;
    c.noise.min_amount = kCoin / 20;
    c.noise.max_amount = 5 * kCoin;
    return c;
}

ScenarioConfig decoy_scenario(std::size_t pool, std::uint64_t seed) {
    ScenarioConfig c = base_config("decoy_pool" + std::to_string(pool), seed);
    c.decoy.pool_size = pool;
    c.actors.sellers = 1;
    c.actors.buyers = 1;
    c.actors.buyer_wallets_each = 1;
    c.actors.seller_payout_wallets_each = 0;
    c.trades.push_back(simple_trade(StrategyKind::DecoyAccounts, 10 * kCoin, 0, 0));
    c.noise.wallets = 6;
    c.noise.count = 30;
    c.noise.min_amount = kCoin / 20;
    c.noise.max_amount = 3 * kCoin;
    return c;
}

ScenarioConfig gas_ref_scenario(std::uint64_t seed) {
    ScenarioConfig c = base_config("artex_gas_ref", seed);
    c.payment_pool_size = 1;
    c.actors.sellers = 1;
    c.actors.buyers = 1;
    c.actors.buyer_wallets_each = 1;
    c.actors.seller_payout_wallets_each = 1;
    c.trades.push_back(artex_trade(2, 10 * kCoin, 0, 0, TokenStandard::NonFungible, {}));
    c.noise.wallets = 6;
    c.noise.count = 30;
    c.noise.min_amount = kCoin / 20;
    c.noise.max_amount = 3 * kCoin;
    return c;
}

std::vector<BundledScenario> make_bundled() {
    std::vector<BundledScenario> v;
    v.push_back({"naive_p2p",
                 "five direct seller-to-buyer trades with background noise; fully linkable",
                 p2p_like("naive_p2p", StrategyKind::NaiveP2P, 1001)});
    v.push_back({"frontend_hiding",
                 "same ledger shape as naive_p2p; hiding happens off-chain only",
                 p2p_like("frontend_hiding", StrategyKind::FrontendHiding, 1002)});
    v.push_back({"artex_pattern1_strict",
                 "five concurrent exchange trades, literal single-wallet routing",
                 pattern_scenario("artex_pattern1_strict", 1, true, 2001)});
    v.push_back({"artex_pattern3",
                 "buyer-side three-way splits into one exchange wallet",
                 pattern3_scenario(2003)});
    v.push_back({"artex_pattern6_pool",
                 "five concurrent settlements through a shared wallet pool, split both sides",
                 pattern_scenario("artex_pattern6_pool", 6, false, 2006)});
    v.push_back({"decoy_pool2", "decoy-account marketplace, two decoys", decoy_scenario(2, 3002)});
    v.push_back({"decoy_pool5", "decoy-account marketplace, five decoys", decoy_scenario(5, 3005)});
    v.push_back({"decoy_pool10", "decoy-account marketplace, ten decoys", decoy_scenario(10, 3010)});
    v.push_back({"decoy_pool20", "decoy-account marketplace, twenty decoys", decoy_scenario(20, 3020)});
    v.push_back({"artex_gas_ref",
                 "single exchange trade for gas comparison against the decoy sweep",
                 gas_ref_scenario(3001)});
    return v;
}

}  // namespace

const std::vector<BundledScenario>& bundled_scenarios() {
    static const std::vector<BundledScenario> scenarios = make_bundled();
    return scenarios;
}

const BundledScenario* find_scenario(const std::string& name) {
    for (const auto& s : bundled_scenarios())
        if (s.name == name) return &s;
    return nullptr;
}

}  // namespace artex
