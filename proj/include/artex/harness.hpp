#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artex/adversary/analysis.hpp"
#include "artex/common.hpp"
#include "artex/exchange.hpp"

namespace artex {

enum class StrategyKind : std::uint8_t { NaiveP2P, FrontendHiding, DecoyAccounts, ArtexPattern };

const char* strategy_kind_name(StrategyKind k);

struct BidScript {
    std::size_t bidder = 0;  // buyer index
    Amount amount = 0;
    std::uint64_t at_offset_s = 0;  // from auction open
};

struct TradeConfig {
    StrategyKind strategy = StrategyKind::NaiveP2P;
    int pattern = 1;  // payment routing pattern 1..6 for exchange trades
    TokenStandard token_standard = TokenStandard::NonFungible;
    Amount price = 0;
    std::size_t seller = 0;
    std::size_t buyer = 0;
    std::uint64_t start_offset_s = 0;
    std::uint64_t auction_window_s = 12 * 3600;
    std::vector<BidScript> bids;                  // empty: buyer bids the price mid-window
    std::vector<Amount> payment_splits;           // empty: derived from the pattern
    std::vector<std::uint64_t> payment_offsets_s; // empty: defaults, jittered
    std::size_t payout_installments = 1;
    std::uint64_t payout_spacing_s = 12 * 3600;
};

struct NoiseConfig {
    std::size_t wallets = 0;
    std::size_t count = 0;
    Amount min_amount = 1;
    Amount max_amount = 1;
};

struct ActorConfig {
    std::size_t sellers = 1;
    std::size_t buyers = 1;
    std::size_t buyer_wallets_each = 3;
    std::size_t seller_payout_wallets_each = 3;
    Amount funding = 0;  // per buyer payment wallet; sellers get gas-scale funding
};

struct DecoyConfig {
    std::size_t pool_size = 2;
    Amount float_amount = 0;  // per decoy; 0 derives from max price + gas
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 42;
    Amount display_scale = 1'000'000'000;
    Amount gas_fee = 1000;
    std::uint32_t fee_bps = 0;
    bool strict_routing_fidelity = false;
    std::size_t payment_pool_size = 6;
    Amount pool_float = 0;  // 0 derives from max price
    Amount treasury_funding = 0;  // 0 derives from trades
    double installment_jitter_frac = 0.10;
    ActorConfig actors;
    DecoyConfig decoy;
    std::vector<TradeConfig> trades;
    NoiseConfig noise;
    adversary::HeuristicConfig adversary;

    static ScenarioConfig from_json(const std::string& text);  // rejects unknown keys
    static ScenarioConfig from_file(const std::string& path);
    std::string to_json() const;
};

struct TradeReport {
    std::size_t index = 0;
    std::string strategy;
    Amount price = 0;
    Amount gas_units = 0;
    std::string settlement;  // "ok" | "n/a" | "fail"
    std::string pattern;     // "ok" | "fail" | reason
};

struct StrategyMetrics {
    std::string strategy;
    adversary::Metrics metrics;
};

struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    Amount display_scale = 1;
    std::uint64_t blocks = 0;
    std::uint64_t transactions = 0;
    std::size_t trades_total = 0;
    std::vector<TradeReport> trades;
    std::map<std::string, Amount> strategy_gas;
    std::vector<StrategyMetrics> adversary_by_strategy;
    adversary::Metrics adversary_overall;
    std::string dump_sha256;

    std::string to_json() const;
    std::string to_table() const;
    static Report from_json(const std::string& text);
};

// Everything one deterministic run produces. The dump and listing export are
// the public artifacts; ground truth and the audit export stay private.
struct ScenarioResult {
    ScenarioConfig config;
    std::string dump_ndjson;
    std::string ground_truth_json;
    std::string listings_json;       // public disclosure exports
    std::string hypotheses_json;
    std::string settlement_audit_json;  // private
    Report report;

    // private-side handles for tests
    std::vector<adversary::GroundTruthEntry> ground_truth;
    adversary::AnalysisResult analysis;
    std::vector<Auction> auctions;             // closed auction transcripts
    std::vector<std::string> noise_wallets;    // hex addresses
    std::vector<std::string> secrets;          // strings that must never leak
};

ScenarioResult run_scenario(const ScenarioConfig& config);

struct BundledScenario {
    std::string name;
    std::string description;
    ScenarioConfig config;
};

const std::vector<BundledScenario>& bundled_scenarios();
const BundledScenario* find_scenario(const std::string& name);

// Independent template check: validates one trade's transaction multiset in
// the dump against its declared routing pattern. Used for the report verdict
// and as the test oracle.
struct PatternCheckInput {
    StrategyKind strategy;
    int pattern = 1;
    bool strict_routing = false;
    Amount price = 0;
    Amount fee = 0;
    Amount gas_fee = 0;
    Amount dust = 0;
    std::set<std::string> tx_hashes;  // txs attributed to this trade
    std::string seller_token_wallet;
    std::set<std::string> buyer_sources;
    std::set<std::string> payment_addresses;
    std::set<std::string> payout_dests;
    std::string intake_wallet;
    std::string delivery_wallet;
    std::string buyer_receive_wallet;  // naive/decoy: where the token lands
    std::string custody_wallet;        // decoy marketplace custody
    std::string treasury;
};

std::string check_pattern(const adversary::PublicView& view, const PatternCheckInput& in);

std::string sha256_hex_of(const std::string& bytes);

}  // namespace artex
