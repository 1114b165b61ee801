#include "artex/harness.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "artex/sha256.hpp"

namespace artex {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* strategy_kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::NaiveP2P: return "naive_p2p";
        case StrategyKind::FrontendHiding: return "frontend_hiding";
        case StrategyKind::DecoyAccounts: return "decoy";
        case StrategyKind::ArtexPattern: return "artex";
    }
    return "?";
}

std::string sha256_hex_of(const std::string& bytes) { return sha256_hex(bytes); }

// ---------------------------------------------------------------------------
// config parsing

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw error(errc::config_invalid, "unknown key '" + it.key() + "' in " + where);
}

StrategyKind strategy_from(const std::string& s) {
    if (s == "naive_p2p") return StrategyKind::NaiveP2P;
    if (s == "frontend_hiding") return StrategyKind::FrontendHiding;
    if (s == "decoy") return StrategyKind::DecoyAccounts;
    if (s == "artex") return StrategyKind::ArtexPattern;
    throw error(errc::config_invalid, "unknown strategy '" + s + "'");
}

TradeConfig trade_from_json(const json& j) {
    require_keys(j,
                 {"strategy", "pattern", "token_standard", "price", "seller", "buyer",
                  "start_offset_s", "auction_window_s", "bids", "payment_splits",
                  "payment_offsets_s", "payout_installments", "payout_spacing_s"},
                 "trade");
    TradeConfig t;
    t.strategy = strategy_from(j.at("strategy").get<std::string>());
    if (j.contains("pattern")) t.pattern = j["pattern"].get<int>();
    if (t.pattern < 1 || t.pattern > 6)
        throw error(errc::config_invalid, "pattern must be in 1..6");
    if (j.contains("token_standard")) {
        auto s = token_standard_from(j["token_standard"].get<std::string>());
        if (!s) throw error(errc::config_invalid, "unknown token_standard");
        t.token_standard = *s;
    }
    t.price = j.at("price").get<Amount>();
    if (j.contains("seller")) t.seller = j["seller"].get<std::size_t>();
    if (j.contains("buyer")) t.buyer = j["buyer"].get<std::size_t>();
    if (j.contains("start_offset_s")) t.start_offset_s = j["start_offset_s"].get<std::uint64_t>();
    if (j.contains("auction_window_s")) t.auction_window_s = j["auction_window_s"].get<std::uint64_t>();
    if (j.contains("bids")) {
        for (const auto& b : j["bids"]) {
            require_keys(b, {"bidder", "amount", "at_offset_s"}, "bid");
            BidScript s;
            s.bidder = b.at("bidder").get<std::size_t>();
            s.amount = b.at("amount").get<Amount>();
            s.at_offset_s = b.at("at_offset_s").get<std::uint64_t>();
            t.bids.push_back(s);
        }
    }
    if (j.contains("payment_splits"))
        for (const auto& a : j["payment_splits"]) t.payment_splits.push_back(a.get<Amount>());
    if (j.contains("payment_offsets_s"))
        for (const auto& a : j["payment_offsets_s"])
            t.payment_offsets_s.push_back(a.get<std::uint64_t>());
    if (j.contains("payout_installments"))
        t.payout_installments = j["payout_installments"].get<std::size_t>();
    if (j.contains("payout_spacing_s")) t.payout_spacing_s = j["payout_spacing_s"].get<std::uint64_t>();
    return t;
}

ordered_json trade_to_json(const TradeConfig& t) {
    ordered_json j;
    j["strategy"] = strategy_kind_name(t.strategy);
    j["pattern"] = t.pattern;
    j["token_standard"] = token_standard_name(t.token_standard);
    j["price"] = t.price;
    j["seller"] = t.seller;
    j["buyer"] = t.buyer;
    j["start_offset_s"] = t.start_offset_s;
    j["auction_window_s"] = t.auction_window_s;
    if (!t.bids.empty()) {
        ordered_json bids = ordered_json::array();
        for (const auto& b : t.bids)
            bids.push_back({{"bidder", b.bidder}, {"amount", b.amount}, {"at_offset_s", b.at_offset_s}});
        j["bids"] = bids;
    }
    if (!t.payment_splits.empty()) j["payment_splits"] = t.payment_splits;
    if (!t.payment_offsets_s.empty()) j["payment_offsets_s"] = t.payment_offsets_s;
    j["payout_installments"] = t.payout_installments;
    j["payout_spacing_s"] = t.payout_spacing_s;
    return j;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw error(errc::config_invalid, std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(j,
                 {"name", "seed", "display_scale", "gas_fee", "fee_bps", "strict_routing_fidelity",
                  "payment_pool_size", "pool_float", "treasury_funding", "installment_jitter_frac",
                  "actors", "decoy", "trades", "noise", "adversary"},
                 "scenario");
    ScenarioConfig c;
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("display_scale")) c.display_scale = j["display_scale"].get<Amount>();
    if (j.contains("gas_fee")) c.gas_fee = j["gas_fee"].get<Amount>();
    if (j.contains("fee_bps")) c.fee_bps = j["fee_bps"].get<std::uint32_t>();
    if (j.contains("strict_routing_fidelity"))
        c.strict_routing_fidelity = j["strict_routing_fidelity"].get<bool>();
    if (j.contains("payment_pool_size")) c.payment_pool_size = j["payment_pool_size"].get<std::size_t>();
    if (j.contains("pool_float")) c.pool_float = j["pool_float"].get<Amount>();
    if (j.contains("treasury_funding")) c.treasury_funding = j["treasury_funding"].get<Amount>();
    if (j.contains("installment_jitter_frac"))
        c.installment_jitter_frac = j["installment_jitter_frac"].get<double>();
    if (j.contains("actors")) {
        const json& a = j["actors"];
        require_keys(a,
                     {"sellers", "buyers", "buyer_wallets_each", "seller_payout_wallets_each",
                      "funding"},
                     "actors");
        if (a.contains("sellers")) c.actors.sellers = a["sellers"].get<std::size_t>();
        if (a.contains("buyers")) c.actors.buyers = a["buyers"].get<std::size_t>();
        if (a.contains("buyer_wallets_each"))
            c.actors.buyer_wallets_each = a["buyer_wallets_each"].get<std::size_t>();
        if (a.contains("seller_payout_wallets_each"))
            c.actors.seller_payout_wallets_each = a["seller_payout_wallets_each"].get<std::size_t>();
        if (a.contains("funding")) c.actors.funding = a["funding"].get<Amount>();
    }
    if (j.contains("decoy")) {
        const json& d = j["decoy"];
        require_keys(d, {"pool_size", "float_amount"}, "decoy");
        if (d.contains("pool_size")) c.decoy.pool_size = d["pool_size"].get<std::size_t>();
        if (d.contains("float_amount")) c.decoy.float_amount = d["float_amount"].get<Amount>();
    }
    if (j.contains("trades"))
        for (const auto& t : j["trades"]) c.trades.push_back(trade_from_json(t));
    if (j.contains("noise")) {
        const json& n = j["noise"];
        require_keys(n, {"wallets", "count", "min_amount", "max_amount"}, "noise");
        if (n.contains("wallets")) c.noise.wallets = n["wallets"].get<std::size_t>();
        if (n.contains("count")) c.noise.count = n["count"].get<std::size_t>();
        if (n.contains("min_amount")) c.noise.min_amount = n["min_amount"].get<Amount>();
        if (n.contains("max_amount")) c.noise.max_amount = n["max_amount"].get<Amount>();
    }
    if (j.contains("adversary")) {
        require_keys(j["adversary"],
                     {"time_window_s", "max_subset_size", "amount_tolerance", "timing_decay_tau_s",
                      "search_budget", "max_hypotheses", "weight_direct", "weight_amount",
                      "weight_fresh", "weight_timing", "engine"},
                     "adversary");
        c.adversary = adversary::heuristic_config_from_json(j["adversary"].dump());
    }
    if (c.noise.max_amount < c.noise.min_amount)
        throw error(errc::config_invalid, "noise.max_amount below noise.min_amount");
    for (const auto& t : c.trades) {
        if (t.seller >= std::max<std::size_t>(1, c.actors.sellers))
            throw error(errc::config_invalid, "trade.seller out of range");
        if (t.buyer >= std::max<std::size_t>(1, c.actors.buyers))
            throw error(errc::config_invalid, "trade.buyer out of range");
        if (t.price == 0) throw error(errc::config_invalid, "trade.price must be positive");
        Amount split_sum = 0;
        for (Amount a : t.payment_splits) split_sum = checked_add(split_sum, a);
        if (!t.payment_splits.empty() && split_sum != t.price)
            throw error(errc::config_invalid, "payment_splits must sum to the price");
    }
    return c;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::config_invalid, "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string ScenarioConfig::to_json() const {
    ordered_json j;
    j["name"] = name;
    j["seed"] = seed;
    j["display_scale"] = display_scale;
    j["gas_fee"] = gas_fee;
    j["fee_bps"] = fee_bps;
    j["strict_routing_fidelity"] = strict_routing_fidelity;
    j["payment_pool_size"] = payment_pool_size;
    j["pool_float"] = pool_float;
    j["treasury_funding"] = treasury_funding;
    j["installment_jitter_frac"] = installment_jitter_frac;
    j["actors"] = {{"sellers", actors.sellers},
                   {"buyers", actors.buyers},
                   {"buyer_wallets_each", actors.buyer_wallets_each},
                   {"seller_payout_wallets_each", actors.seller_payout_wallets_each},
                   {"funding", actors.funding}};
    j["decoy"] = {{"pool_size", decoy.pool_size}, {"float_amount", decoy.float_amount}};
    ordered_json trades_json = ordered_json::array();
    for (const auto& t : trades) trades_json.push_back(trade_to_json(t));
    j["trades"] = trades_json;
    j["noise"] = {{"wallets", noise.wallets},
                  {"count", noise.count},
                  {"min_amount", noise.min_amount},
                  {"max_amount", noise.max_amount}};
    j["adversary"] = {{"time_window_s", adversary.time_window_s},
                      {"max_subset_size", adversary.max_subset_size},
                      {"amount_tolerance", adversary.amount_tolerance},
                      {"timing_decay_tau_s", adversary.timing_decay_tau_s},
                      {"search_budget", adversary.search_budget},
                      {"max_hypotheses", adversary.max_hypotheses},
                      {"weight_direct", adversary.weight_direct},
                      {"weight_amount", adversary.weight_amount},
                      {"weight_fresh", adversary.weight_fresh},
                      {"weight_timing", adversary.weight_timing},
                      {"engine", adversary.engine == adversary::Engine::Parallel ? "parallel" : "serial"}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// scenario runner

namespace {

constexpr std::uint64_t kBaseTime = 1'000'000;

struct SellerActor {
    MemberId id;
    std::string session;
    KeyPair token_wallet;
    std::vector<KeyPair> payout_wallets;
};

struct BuyerActor {
    MemberId id;
    std::string session;
    std::vector<KeyPair> payment_wallets;
};

struct TradeRun {
    std::size_t index = 0;
    TradeConfig cfg;
    std::string strategy_label;
    MemberId seller_member, buyer_member;
    Address contract;
    std::optional<std::uint64_t> token_id;
    std::uint64_t listing_id = 0;
    std::set<std::string> txs;
    std::vector<Address> payment_sources;
    std::vector<Address> payout_dests;
    Address buyer_receive;
    Address decoy_in, decoy_out;
    bool aborted = false;
};

struct Event {
    std::uint64_t time = 0;
    std::uint64_t seq = 0;
    std::function<void()> fn;
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
};

struct Runner {
    ScenarioConfig cfg;
    Amount max_price = 0;
    Amount decoy_float = 0;
    SimClock clock;
    Rng wallet_rng, noise_rng, sched_rng;
    Ledger ledger;
    IdentityService identity;
    Exchange exchange;

    std::vector<SellerActor> sellers;
    std::vector<BuyerActor> buyers;
    std::vector<KeyPair> noise_wallets;
    KeyPair market_treasury, market_custody;
    std::vector<KeyPair> decoys;
    bool decoy_setup_scheduled = false;

    std::deque<TradeRun> trades;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue;
    std::uint64_t next_seq = 0;
    std::uint64_t horizon = kBaseTime;
    std::map<std::string, std::set<std::string>> setup_txs;  // strategy bucket -> hashes

    Runner(const ScenarioConfig& c, ExchangeConfig xc)
        : cfg(c),
          clock{kBaseTime},
          wallet_rng(Rng(c.seed).fork("wallets")),
          noise_rng(Rng(c.seed).fork("noise")),
          sched_rng(Rng(c.seed).fork("schedule")),
          ledger(clock, c.gas_fee),
          identity(clock, Rng(c.seed).fork("identity"), 30 * 86400),
          exchange(clock, ledger, identity, std::move(xc), Rng(c.seed).fork("exchange")) {}

    void push(std::uint64_t time, std::function<void()> fn) {
        horizon = std::max(horizon, time);
        queue.push(Event{time, next_seq++, std::move(fn)});
    }

    void tagged(TradeRun& t, const std::function<void()>& fn) {
        std::size_t before = ledger.pending().size();
        fn();
        for (std::size_t i = before; i < ledger.pending().size(); ++i)
            t.txs.insert(ledger.pending()[i].hash);
    }

    void setup_tagged(const std::string& bucket, const std::function<void()>& fn) {
        std::size_t before = ledger.pending().size();
        fn();
        for (std::size_t i = before; i < ledger.pending().size(); ++i)
            setup_txs[bucket].insert(ledger.pending()[i].hash);
    }

    void settle_cycle() {
        for (int i = 0; i < 32; ++i) {
            bool had = ledger.has_pending();
            if (had) ledger.seal_block();
            exchange.pump();
            if (!ledger.has_pending()) return;
        }
        throw error(errc::scenario_aborted, "exchange did not quiesce");
    }

    void run_events() {
        while (true) {
            if (queue.empty()) {
                auto due = exchange.next_due();
                if (!due) break;
                push(std::max(*due, clock.now), [] {});
            }
            Event e = queue.top();
            queue.pop();
            ledger.advance_to(e.time);
            e.fn();
            while (!queue.empty() && queue.top().time == e.time) {
                Event f = queue.top();
                queue.pop();
                f.fn();
            }
            settle_cycle();
        }
    }
};

std::vector<Amount> pattern_splits(const TradeConfig& t) {
    if (!t.payment_splits.empty()) return t.payment_splits;
    if (t.pattern <= 2) return {t.price};
    Amount a = t.price / 100 * 45;
    Amount b = t.price / 100 * 35;
    return {a, b, t.price - a - b};
}

std::size_t pattern_payment_addresses(const TradeConfig& t) { return t.pattern == 6 ? 3 : 1; }
bool pattern_pays_token_wallet(int pattern) { return pattern == 1 || pattern == 3; }
std::size_t pattern_payout_wallets(int pattern) { return pattern >= 5 ? 3 : 1; }

void build_trade_events(Runner& r, TradeRun& t);
ScenarioResult assemble_result(Runner& r);

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    Amount max_price = 0;
    bool any_artex = false, any_decoy = false, any_rwa = false;
    for (const auto& t : config.trades) {
        max_price = std::max(max_price, t.price);
        if (t.strategy == StrategyKind::ArtexPattern) any_artex = true;
        if (t.strategy == StrategyKind::DecoyAccounts) any_decoy = true;
        if (t.token_standard == TokenStandard::Rwa3643) any_rwa = true;
    }
    Amount g = config.gas_fee;
    Amount pool_float =
        config.pool_float ? config.pool_float : checked_add(max_price, g * 20);

    ExchangeConfig xc;
    xc.fee_bps = config.fee_bps;
    xc.strict_routing_fidelity = config.strict_routing_fidelity;
    xc.payment_pool_size = config.payment_pool_size;
    xc.pool_float = pool_float;
    xc.installment_jitter_frac = config.installment_jitter_frac;

    Runner r(config, std::move(xc));
    r.max_price = max_price;
    r.decoy_float =
        config.decoy.float_amount ? config.decoy.float_amount : checked_add(max_price, g * 4);
    ScenarioConfig& cfg = r.cfg;

    // --- actors and genesis funding -----------------------------------------
    std::size_t n_sellers = std::max<std::size_t>(1, cfg.actors.sellers);
    std::size_t n_buyers = std::max<std::size_t>(1, cfg.actors.buyers);
    Hash32 pw = IdentityService::digest_password("correct horse battery staple");

    for (std::size_t i = 0; i < n_sellers; ++i) {
        SellerActor s;
        s.id = "m-s" + std::to_string(i);
        r.identity.register_member(s.id, pw, s.id + "@example.test");
        Session sess = r.identity.login(s.id, pw);
        const KycRecord& k =
            r.identity.submit_kyc(sess.token, DocKind::Passport, "passport-doc-" + s.id);
        r.identity.review_kyc("exchange-admin", k.id, true);
        s.session = sess.token;
        s.token_wallet = r.ledger.create_account(r.wallet_rng);
        r.identity.claim_wallet(s.id, s.token_wallet.address);
        for (std::size_t w = 0; w < cfg.actors.seller_payout_wallets_each; ++w) {
            s.payout_wallets.push_back(r.ledger.create_account(r.wallet_rng));
            r.identity.claim_wallet(s.id, s.payout_wallets.back().address);
        }
        r.ledger.genesis_fund(s.token_wallet.address, g * 30);
        r.sellers.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < n_buyers; ++i) {
        BuyerActor b;
        b.id = "m-b" + std::to_string(i);
        r.identity.register_member(b.id, pw, b.id + "@example.test");
        Session sess = r.identity.login(b.id, pw);
        const KycRecord& k = r.identity.submit_kyc(sess.token, DocKind::GovId, "gov-id-" + b.id);
        r.identity.review_kyc("exchange-admin", k.id, true);
        b.session = sess.token;
        Amount funding = cfg.actors.funding ? cfg.actors.funding : checked_add(max_price, g * 20);
        for (std::size_t w = 0; w < std::max<std::size_t>(1, cfg.actors.buyer_wallets_each); ++w) {
            b.payment_wallets.push_back(r.ledger.create_account(r.wallet_rng));
            r.identity.claim_wallet(b.id, b.payment_wallets.back().address);
            r.ledger.genesis_fund(b.payment_wallets.back().address, funding);
        }
        r.buyers.push_back(std::move(b));
    }
    for (std::size_t i = 0; i < cfg.noise.wallets; ++i) {
        r.noise_wallets.push_back(r.ledger.create_account(r.wallet_rng));
        std::size_t per = cfg.noise.wallets ? (cfg.noise.count / cfg.noise.wallets + 2) : 0;
        r.ledger.genesis_fund(r.noise_wallets.back().address, (cfg.noise.max_amount + g) * per);
    }
    if (any_artex) {
        Amount treasury = cfg.treasury_funding
                              ? cfg.treasury_funding
                              : checked_add(pool_float * cfg.payment_pool_size,
                                            (max_price + g * 64) * cfg.trades.size() + g * 200);
        r.ledger.genesis_fund(r.exchange.treasury_address(), treasury);
        if (any_rwa)
            r.ledger.genesis_fund(r.exchange.agent_address(), g * (4 * cfg.trades.size() + 10));
    }
    if (any_decoy) {
        r.market_treasury = r.ledger.create_account(r.wallet_rng);
        r.market_custody = r.ledger.create_account(r.wallet_rng);
        r.ledger.genesis_fund(r.market_treasury.address,
                              r.decoy_float * cfg.decoy.pool_size + g * (cfg.decoy.pool_size + 4));
        r.ledger.genesis_fund(r.market_custody.address, g * (2 * cfg.trades.size() + 2));
        for (std::size_t i = 0; i < std::max<std::size_t>(2, cfg.decoy.pool_size); ++i)
            r.decoys.push_back(r.ledger.create_account(r.wallet_rng));
    }
    r.ledger.seal_block();  // genesis block

    // The shared operational pool is stood up with ordinary transactions.
    if (any_artex && !cfg.strict_routing_fidelity) {
        r.push(kBaseTime + 30, [&r] {
            r.setup_tagged("artex", [&r] { r.exchange.prepare_pool(); });
        });
    }

    for (std::size_t ti = 0; ti < cfg.trades.size(); ++ti) {
        r.trades.push_back(TradeRun{});
        TradeRun& t = r.trades.back();
        t.index = ti;
        t.cfg = cfg.trades[ti];
        t.strategy_label = strategy_kind_name(t.cfg.strategy);
        if (t.cfg.strategy == StrategyKind::ArtexPattern)
            t.strategy_label += "_pattern_" + std::to_string(t.cfg.pattern);
        t.token_id = 1;
        t.seller_member = r.sellers[t.cfg.seller % r.sellers.size()].id;
        t.buyer_member = r.buyers[t.cfg.buyer % r.buyers.size()].id;
    }
    for (TradeRun& t : r.trades) build_trade_events(r, t);

    // --- noise ---------------------------------------------------------------
    if (cfg.noise.count > 0 && r.noise_wallets.size() >= 2) {
        std::uint64_t span = r.horizon + 2 * 86400 - kBaseTime;
        std::vector<std::uint64_t> times;
        for (std::size_t i = 0; i < cfg.noise.count; ++i)
            times.push_back(kBaseTime + 60 + r.noise_rng.range(0, span));
        std::sort(times.begin(), times.end());
        for (std::uint64_t when : times) {
            std::size_t a = r.noise_rng.range(0, r.noise_wallets.size() - 1);
            std::size_t b = r.noise_rng.range(0, r.noise_wallets.size() - 2);
            if (b >= a) ++b;
            Amount amount = r.noise_rng.range(cfg.noise.min_amount, cfg.noise.max_amount);
            r.push(when, [&r, a, b, amount] {
                r.ledger.transfer_native(r.noise_wallets[a], r.noise_wallets[b].address, amount);
            });
        }
    }

    r.run_events();
    r.settle_cycle();
    return assemble_result(r);
}

namespace {

void build_trade_events(Runner& r, TradeRun& t) {
    SellerActor& seller = r.sellers[t.cfg.seller % r.sellers.size()];
    BuyerActor& buyer = r.buyers[t.cfg.buyer % r.buyers.size()];
    std::uint64_t t0 = kBaseTime + 300 + t.cfg.start_offset_s;

    r.push(t0, [&r, &t, &seller] {
        TokenInit init;
        init.nft_holders[1] = seller.token_wallet.address;
        init.metadata["name"] = "asset-" + std::to_string(t.index + 1);
        if (t.cfg.token_standard == TokenStandard::Rwa3643)
            init.registry_agents.push_back(r.exchange.agent_address());
        r.tagged(t, [&] {
            const TokenContract& c =
                r.ledger.deploy_token(seller.token_wallet, t.cfg.token_standard, init);
            t.contract = c.address;
        });
    });

    switch (t.cfg.strategy) {
        case StrategyKind::NaiveP2P:
        case StrategyKind::FrontendHiding: {
            // identical ledger shape; the frontend variant hides names off-chain only
            r.push(t0 + 3600, [&r, &t, &seller, &buyer] {
                t.buyer_receive = buyer.payment_wallets[0].address;
                r.tagged(t, [&] {
                    r.ledger.transfer_token(seller.token_wallet, t.contract, t.token_id, 1,
                                            buyer.payment_wallets[0].address, 0);
                    r.ledger.transfer_native(buyer.payment_wallets[0],
                                             seller.token_wallet.address, t.cfg.price);
                });
            });
            break;
        }
        case StrategyKind::DecoyAccounts: {
            if (!r.decoy_setup_scheduled) {
                r.decoy_setup_scheduled = true;
                r.push(kBaseTime + 60, [&r] {
                    r.setup_tagged("decoy", [&r] {
                        for (const KeyPair& d : r.decoys)
                            r.ledger.transfer_native(r.market_treasury, d.address, r.decoy_float);
                    });
                });
            }
            r.push(t0 + 3600, [&r, &t, &seller] {
                r.tagged(t, [&] {
                    r.ledger.transfer_token(seller.token_wallet, t.contract, t.token_id, 1,
                                            r.market_custody.address, 0);
                });
            });
            r.push(t0 + 2 * 3600, [&r, &t, &buyer] {
                t.decoy_in = r.decoys[(2 * t.index) % r.decoys.size()].address;
                r.tagged(t, [&] {
                    r.ledger.transfer_native(buyer.payment_wallets[0], t.decoy_in, t.cfg.price);
                });
            });
            r.push(t0 + 3 * 3600, [&r, &t, &seller] {
                const KeyPair& d = r.decoys[(2 * t.index + 1) % r.decoys.size()];
                t.decoy_out = d.address;
                r.tagged(t, [&] {
                    r.ledger.transfer_native(d, seller.token_wallet.address, t.cfg.price);
                });
            });
            r.push(t0 + 4 * 3600, [&r, &t, &buyer] {
                t.buyer_receive = buyer.payment_wallets[0].address;
                r.tagged(t, [&] {
                    r.ledger.transfer_token(r.market_custody, t.contract, t.token_id, 1,
                                            buyer.payment_wallets[0].address, 0);
                });
            });
            break;
        }
        case StrategyKind::ArtexPattern: {
            r.push(t0 + 600, [&r, &t, &seller] {
                Disclosure d;
                d.token_standard = t.cfg.token_standard;
                d.token_info = "asset " + std::to_string(t.index + 1);
                d.creator = "studio-" + std::to_string(t.index % 7);
                r.tagged(t, [&] {
                    t.listing_id = r.exchange.create_listing(
                        seller.session, TokenRef{t.contract, t.token_id, 1}, d);
                    r.ledger.transfer_token(seller.token_wallet, t.contract, t.token_id, 1,
                                            r.exchange.listing(t.listing_id).intake.address(), 0);
                });
            });
            r.push(t0 + 3600, [&r, &t] {
                r.exchange.confirm_deposit(t.listing_id);
                if (r.exchange.review_listing(t.listing_id) != ListingState::Listed)
                    t.aborted = true;
            });
            std::uint64_t open_t = t0 + 2 * 3600;
            r.push(open_t, [&r, &t] {
                if (!t.aborted) r.exchange.open_auction(t.listing_id, t.cfg.auction_window_s);
            });
            std::vector<BidScript> bids = t.cfg.bids;
            if (bids.empty())
                bids.push_back(BidScript{t.cfg.buyer, t.cfg.price, t.cfg.auction_window_s / 2});
            for (const BidScript& b : bids) {
                r.push(open_t + b.at_offset_s, [&r, &t, b] {
                    if (t.aborted) return;
                    const BuyerActor& who = r.buyers[b.bidder % r.buyers.size()];
                    r.exchange.place_bid(who.session, t.listing_id, b.amount);
                });
            }
            std::uint64_t close_t = open_t + t.cfg.auction_window_s;
            std::vector<std::uint64_t> pay_offsets = t.cfg.payment_offsets_s;
            if (pay_offsets.empty()) pay_offsets = {3600, 3 * 3600, 5 * 3600};
            for (auto& off : pay_offsets)
                off += r.sched_rng.range(0, std::max<std::uint64_t>(1, off / 5));

            r.push(close_t, [&r, &t, &buyer, pay_offsets, close_t] {
                if (t.aborted) return;
                auto outcome = r.exchange.close_auction(t.listing_id);
                if (!outcome) {
                    t.aborted = true;
                    return;
                }
                std::size_t k = pattern_payment_addresses(t.cfg);
                r.exchange.notify_results(t.listing_id, k);
                const auto& addrs = r.exchange.listing(t.listing_id).payment_addresses;

                std::vector<Amount> splits = pattern_splits(t.cfg);
                std::vector<PaymentLeg> legs;
                for (std::size_t i = 0; i < splits.size(); ++i) {
                    PaymentLeg leg;
                    leg.source = buyer.payment_wallets[i % buyer.payment_wallets.size()].address;
                    leg.dest = addrs[i % addrs.size()];
                    leg.amount = splits[i];
                    leg.at_offset = pay_offsets[i % pay_offsets.size()];
                    legs.push_back(leg);
                    t.payment_sources.push_back(leg.source);
                }
                r.exchange.propose_payment_plan(buyer.session, t.listing_id, legs);
                for (std::size_t i = 0; i < legs.size(); ++i) {
                    PaymentLeg leg = legs[i];
                    KeyPair src = buyer.payment_wallets[i % buyer.payment_wallets.size()];
                    r.push(close_t + leg.at_offset, [&r, &t, src, leg] {
                        r.tagged(t, [&] {
                            r.ledger.transfer_native(src, leg.dest, leg.amount);
                        });
                    });
                }
            });
            r.push(close_t + 1800, [&r, &t, &seller] {
                if (t.aborted) return;
                std::vector<Address> wallets;
                if (pattern_pays_token_wallet(t.cfg.pattern)) {
                    wallets.push_back(seller.token_wallet.address);
                } else {
                    std::size_t n = pattern_payout_wallets(t.cfg.pattern);
                    for (std::size_t i = 0; i < n; ++i)
                        wallets.push_back(
                            seller.payout_wallets[i % seller.payout_wallets.size()].address);
                }
                t.payout_dests.assign(wallets.begin(), wallets.end());
                r.exchange.request_settlement(seller.session, t.listing_id, wallets,
                                              t.cfg.payout_installments, t.cfg.payout_spacing_s);
            });
            break;
        }
    }
}

ScenarioResult assemble_result(Runner& r) {
    ScenarioResult out;
    out.config = r.cfg;
    out.dump_ndjson = r.ledger.dump_ndjson();
    out.settlement_audit_json = r.exchange.export_settlement_records();

    for (const auto& [id, a] : r.exchange.auctions()) out.auctions.push_back(a);
    for (const auto& w : r.noise_wallets) out.noise_wallets.push_back(w.address.hex());

    // everything that must never appear in a public artifact
    out.secrets = r.exchange.private_key_hexes();
    out.secrets.push_back("correct horse battery staple");
    for (const auto& s : r.sellers) {
        out.secrets.push_back(to_hex(s.token_wallet.priv));
        for (const auto& w : s.payout_wallets) out.secrets.push_back(to_hex(w.priv));
        out.secrets.push_back(s.id);
        out.secrets.push_back(s.id + "@example.test");
        out.secrets.push_back("passport-doc-" + s.id);
    }
    for (const auto& b : r.buyers) {
        for (const auto& w : b.payment_wallets) out.secrets.push_back(to_hex(w.priv));
        out.secrets.push_back(b.id);
        out.secrets.push_back(b.id + "@example.test");
        out.secrets.push_back("gov-id-" + b.id);
    }
    for (const auto& w : r.noise_wallets) out.secrets.push_back(to_hex(w.priv));
    for (const auto& d : r.decoys) out.secrets.push_back(to_hex(d.priv));

    // merge exchange-side txs into their trades' tag sets
    std::map<std::uint64_t, const TradeRun*> by_listing;
    for (auto& t : r.trades)
        if (t.listing_id) by_listing[t.listing_id] = &t;
    for (const auto& [listing_id, hash] : r.exchange.tx_log()) {
        if (listing_id == 0) {
            r.setup_txs["artex"].insert(hash);
            continue;
        }
        auto it = by_listing.find(listing_id);
        if (it != by_listing.end()) const_cast<TradeRun*>(it->second)->txs.insert(hash);
    }

    std::map<std::string, Amount> gas_of;
    for (const auto& b : r.ledger.blocks())
        for (const auto& tx : b.txs) gas_of[tx.hash] = tx.gas_fee;

    adversary::PublicView view = adversary::PublicView::from_ndjson_string(out.dump_ndjson);

    Report rep;
    rep.scenario = r.cfg.name;
    rep.seed = r.cfg.seed;
    rep.display_scale = r.cfg.display_scale;
    rep.blocks = r.ledger.height();
    rep.transactions = r.ledger.transaction_count();
    rep.trades_total = r.trades.size();
    rep.dump_sha256 = sha256_hex(out.dump_ndjson);

    // ground truth + per-trade rows
    ordered_json gt = ordered_json::array();
    for (TradeRun& t : r.trades) {
        if (t.aborted) {
            TradeReport tr;
            tr.index = t.index;
            tr.strategy = t.strategy_label;
            tr.price = t.cfg.price;
            tr.settlement = "aborted";
            tr.pattern = "aborted";
            rep.trades.push_back(tr);
            continue;
        }
        adversary::GroundTruthEntry e;
        e.token.contract = t.contract.hex();
        e.token.token_id = t.token_id;
        e.strategy = t.strategy_label;
        e.price = t.cfg.price;

        SellerActor& seller = r.sellers[t.cfg.seller % r.sellers.size()];
        e.seller_wallets.insert(seller.token_wallet.address.hex());
        for (const auto& a : t.payout_dests) e.seller_wallets.insert(a.hex());
        if (t.cfg.strategy == StrategyKind::ArtexPattern) {
            for (const auto& a : t.payment_sources) e.buyer_wallets.insert(a.hex());
        } else {
            e.buyer_wallets.insert(t.buyer_receive.hex());
        }
        out.ground_truth.push_back(e);

        ordered_json je;
        je["trade"] = t.index;
        je["strategy"] = t.strategy_label;
        je["token"] = {{"contract", e.token.contract},
                       {"token_id", t.token_id ? ordered_json(*t.token_id) : ordered_json(nullptr)}};
        je["price"] = t.cfg.price;
        je["seller_member"] = t.seller_member;
        je["buyer_member"] = t.buyer_member;
        je["listing_id"] = t.listing_id;
        je["seller_wallets"] = e.seller_wallets;
        je["buyer_wallets"] = e.buyer_wallets;
        gt.push_back(je);

        TradeReport tr;
        tr.index = t.index;
        tr.strategy = t.strategy_label;
        tr.price = t.cfg.price;
        for (const auto& h : t.txs) {
            auto it = gas_of.find(h);
            if (it != gas_of.end()) tr.gas_units = checked_add(tr.gas_units, it->second);
        }

        // settlement balance verdict from the private record
        tr.settlement = "n/a";
        if (t.cfg.strategy == StrategyKind::ArtexPattern && t.listing_id) {
            const auto& recs = r.exchange.records();
            auto rit = recs.find(t.listing_id);
            if (rit == recs.end() || rit->second.completed_at == 0) {
                tr.settlement = "fail";
            } else {
                const SettlementRecord& rec = rit->second;
                Amount pay = 0, paid_out = 0, surplus = 0, refunded = 0;
                for (const auto& leg : rec.payment_legs) {
                    pay = checked_add(pay, leg.amount);
                    surplus = checked_add(surplus, leg.surplus());
                }
                for (const auto& leg : rec.payout_legs) paid_out = checked_add(paid_out, leg.amount);
                for (const auto& rf : rec.refunds) refunded = checked_add(refunded, rf.amount);
                bool ok = pay == rec.price && paid_out == checked_sub(rec.price, rec.fee) &&
                          refunded == surplus;
                tr.settlement = ok ? "ok" : "fail";
            }
        }

        // independent template check
        PatternCheckInput pin;
        pin.strategy = t.cfg.strategy;
        pin.pattern = t.cfg.pattern;
        pin.strict_routing = r.cfg.strict_routing_fidelity;
        pin.price = t.cfg.price;
        pin.gas_fee = r.cfg.gas_fee;
        pin.dust = r.cfg.gas_fee;  // delivery dust default: one tx of gas
        pin.tx_hashes = t.txs;
        pin.seller_token_wallet = seller.token_wallet.address.hex();
        for (const auto& a : t.payment_sources) pin.buyer_sources.insert(a.hex());
        for (const auto& a : t.payout_dests) pin.payout_dests.insert(a.hex());
        pin.treasury = r.exchange.treasury_address().hex();
        if (t.cfg.strategy == StrategyKind::ArtexPattern && t.listing_id) {
            const Listing& l = r.exchange.listing(t.listing_id);
            pin.intake_wallet = l.intake.address().hex();
            for (const auto& a : l.payment_addresses) pin.payment_addresses.insert(a.hex());
            const auto& recs = r.exchange.records();
            auto rit = recs.find(t.listing_id);
            if (rit != recs.end()) {
                pin.delivery_wallet = rit->second.delivery_wallet.hex();
                pin.fee = rit->second.fee;
            }
        }
        if (t.cfg.strategy == StrategyKind::DecoyAccounts) {
            pin.custody_wallet = r.market_custody.address.hex();
            pin.buyer_receive_wallet = t.buyer_receive.hex();
            pin.buyer_sources.insert(t.buyer_receive.hex());
            pin.payment_addresses.insert(t.decoy_in.hex());
            pin.payout_dests.insert(seller.token_wallet.address.hex());
        }
        if (t.cfg.strategy == StrategyKind::NaiveP2P ||
            t.cfg.strategy == StrategyKind::FrontendHiding) {
            pin.buyer_receive_wallet = t.buyer_receive.hex();
            pin.buyer_sources.insert(t.buyer_receive.hex());
        }
        tr.pattern = check_pattern(view, pin);
        rep.trades.push_back(tr);
    }
    out.ground_truth_json = gt.dump(2);

    // strategy gas: tagged trade txs plus shared setup traffic
    for (const TradeRun& t : r.trades) {
        Amount& bucket = rep.strategy_gas[t.strategy_label];
        for (const auto& h : t.txs) {
            auto it = gas_of.find(h);
            if (it != gas_of.end()) bucket = checked_add(bucket, it->second);
        }
    }
    for (const auto& [bucket_name, hashes] : r.setup_txs) {
        Amount& bucket = rep.strategy_gas[bucket_name];
        for (const auto& h : hashes) {
            auto it = gas_of.find(h);
            if (it != gas_of.end()) bucket = checked_add(bucket, it->second);
        }
    }

    // adversary pass
    out.analysis = adversary::rank_links(view, r.cfg.adversary);
    out.hypotheses_json = adversary::hypotheses_to_json(out.analysis);
    rep.adversary_overall = adversary::evaluate(out.analysis, out.ground_truth);
    std::map<std::string, std::vector<adversary::GroundTruthEntry>> buckets;
    for (const auto& e : out.ground_truth) buckets[e.strategy].push_back(e);
    for (const auto& [name, entries] : buckets)
        rep.adversary_by_strategy.push_back(
            StrategyMetrics{name, adversary::evaluate(out.analysis, entries)});

    // public listing export: every listing that reached publication
    std::set<std::uint64_t> ever_listed;
    for (const auto& tr : r.exchange.transition_log())
        if (tr.to == ListingState::Listed) ever_listed.insert(tr.listing_id);
    ordered_json listings = ordered_json::array();
    for (const auto& [id, l] : r.exchange.listings())
        if (ever_listed.count(id)) listings.push_back(ordered_json::parse(disclosure_to_json(l.disclosure)));
    out.listings_json = listings.dump(2);

    out.report = std::move(rep);
    return out;
}

}  // namespace

}  // namespace artex
