#pragma once

// Public-view analyst. This module sees exactly one thing: a ledger dump
// (newline-delimited JSON). It never links against the exchange, identity or
// harness code, so it cannot reach private records even by accident.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artex/common.hpp"

namespace artex::adversary {

struct TxTokenOp {
    std::string contract;
    std::optional<std::uint64_t> token_id;
    Amount amount = 0;
};

struct TxRecord {
    std::string hash;
    std::string from;
    std::string to;
    Amount value = 0;
    std::optional<TxTokenOp> token_op;
    Amount gas_fee = 0;
    std::uint64_t block_height = 0;
    std::uint64_t timestamp = 0;

    bool from_system() const;
    bool moves_token() const { return token_op && token_op->amount >= 1; }
    bool moves_value() const { return value > 0; }
};

struct TokenKey {
    std::string contract;
    std::optional<std::uint64_t> token_id;

    std::string str() const;
    friend auto operator<=>(const TokenKey&, const TokenKey&) = default;
};

/// Immutable parsed dump plus lookup indexes. Safe to share across threads.
class PublicView {
public:
    static PublicView from_ndjson(std::istream& in);
    static PublicView from_ndjson_string(const std::string& text);
    static PublicView from_file(const std::string& path);

    const std::vector<TxRecord>& txs() const { return txs_; }
    const std::vector<TokenKey>& tokens() const { return tokens_; }  // sorted
    const std::vector<std::size_t>& token_txs(const TokenKey& k) const;
    std::uint64_t first_block_of(const std::string& address) const;
    bool empty() const { return txs_.empty(); }

private:
    std::vector<TxRecord> txs_;
    std::vector<TokenKey> tokens_;
    std::map<TokenKey, std::vector<std::size_t>> by_token_;
    std::map<std::string, std::uint64_t> first_block_;
};

struct Hop {
    std::size_t tx_index = 0;
    std::string from;
    std::string to;
    std::uint64_t timestamp = 0;
    std::uint64_t block_height = 0;
};

struct CustodyChain {
    TokenKey token;
    std::vector<Hop> hops;  // oldest first, mints excluded

    bool empty() const { return hops.empty(); }
    const std::string& first_holder() const { return hops.front().from; }
    const std::string& endpoint() const { return hops.back().to; }
    std::uint64_t t_first() const { return hops.front().timestamp; }
    std::uint64_t t_last() const { return hops.back().timestamp; }
};

enum class Engine : std::uint8_t { Serial, Parallel };

struct HeuristicConfig {
    std::uint64_t time_window_s = 7 * 86400;
    std::size_t max_subset_size = 4;  // hard cap 8, keeps the exact search exact
    Amount amount_tolerance = 0;
    std::uint64_t timing_decay_tau_s = 86400;
    std::uint64_t search_budget = 2'000'000;  // subset enumerations + pair evaluations
    std::size_t max_hypotheses = 8;
    double weight_direct = 1.0;
    double weight_amount = 1.0;
    double weight_fresh = 1.0;
    double weight_timing = 1.0;
    Engine engine = Engine::Serial;
};

struct Evidence {
    std::string heuristic;
    std::vector<std::string> tx_hashes;
};

struct LinkHypothesis {
    TokenKey token;
    std::set<std::string> seller_cluster;
    std::set<std::string> buyer_cluster;
    double score = 0.0;
    std::vector<Evidence> evidence;

    std::string cluster_key() const;  // canonical, for deterministic tie-breaks
};

struct AmountCandidate {
    std::vector<std::size_t> inflows;   // tx indexes into the view
    std::vector<std::size_t> outflows;
    Amount in_sum = 0;
    Amount out_sum = 0;
    double amount_score = 0.0;  // sum closeness x structure x parsimony
    double timing_score = 0.0;
    double score = 0.0;         // amount_score^w_a x timing^w_t

    // deterministic total order: score first, index vectors break ties
    bool ranks_before(const AmountCandidate& other) const;
};

struct AmountMatchResult {
    std::vector<AmountCandidate> candidates;  // best first, deterministic ties
    bool budget_exceeded = false;
};

struct TokenAnalysis {
    TokenKey token;
    std::vector<LinkHypothesis> hypotheses;  // rank order
    double direct_swap_max = 0.0;            // max over hops, 0 when severed
    double fresh_endpoint = 0.0;
    bool budget_exceeded = false;
};

struct AnalysisResult {
    std::vector<TokenAnalysis> per_token;  // sorted by token key

    const TokenAnalysis* find(const TokenKey& k) const;
};

// --- heuristics --------------------------------------------------------------

CustodyChain trace_token(const PublicView& view, const TokenKey& token);

// 1.0 when a reverse native transfer between the hop endpoints exists within
// the window, else 0.0.
double heuristic_direct_swap(const PublicView& view, const Hop& hop, const HeuristicConfig& cfg);
std::optional<std::size_t> find_reverse_transfer(const PublicView& view, const Hop& hop,
                                                 const HeuristicConfig& cfg);

// Bounded exact subset-sum between native inflows to and outflows from the
// wallets near the chain.
AmountMatchResult heuristic_amount_match(const PublicView& view, const CustodyChain& chain,
                                         const HeuristicConfig& cfg);

// 1.0 when the chain endpoint's history begins in the delivery block.
double heuristic_fresh_wallet(const PublicView& view, const CustodyChain& chain);

double heuristic_timing(std::uint64_t t_hop, std::uint64_t t_tx, std::uint64_t tau_s);

// Emergent exchange clustering: relay middles of any custody chain plus the
// wallets that funded chain endpoints. Never sees role labels.
std::set<std::string> exchange_cluster(const PublicView& view, const HeuristicConfig& cfg);

// Wallets considered "near" one chain: the cluster plus native senders into
// the chain, minus the chain itself.
std::set<std::string> near_chain_wallets(const PublicView& view, const CustodyChain& chain,
                                         const std::set<std::string>& cluster,
                                         const HeuristicConfig& cfg);

// Shared scoring for amount candidates; exposed so the exhaustive oracle in
// the tests can rank its own enumeration identically.
AmountCandidate score_amount_candidate(const PublicView& view, const CustodyChain& chain,
                                       std::vector<std::size_t> inflows,
                                       std::vector<std::size_t> outflows,
                                       const HeuristicConfig& cfg);

// The candidate transaction pools the subset-sum search runs over. Exposed as
// the shared search-space definition; the search itself has an independent
// exhaustive oracle in the tests.
struct AmountPools {
    std::vector<std::size_t> inflows;
    std::vector<std::size_t> outflows;
};
AmountPools amount_match_pools(const PublicView& view, const CustodyChain& chain,
                               const std::set<std::string>& cluster, const HeuristicConfig& cfg);

// --- pipeline ----------------------------------------------------------------

TokenAnalysis analyze_token(const PublicView& view, const TokenKey& token,
                            const std::set<std::string>& cluster, const HeuristicConfig& cfg);

// rank_links over every token in the view; engine picks the serial reference
// loop or the OpenMP parallel-for (identical output either way).
AnalysisResult rank_links(const PublicView& view, const HeuristicConfig& cfg);
AnalysisResult rank_links_serial(const PublicView& view, const HeuristicConfig& cfg);
AnalysisResult rank_links_parallel(const PublicView& view, const HeuristicConfig& cfg);

std::string hypotheses_to_json(const AnalysisResult& result);

// --- evaluation ---------------------------------------------------------------

struct GroundTruthEntry {
    TokenKey token;
    std::set<std::string> seller_wallets;
    std::set<std::string> buyer_wallets;
    std::string strategy;
    Amount price = 0;
};

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path);
std::vector<GroundTruthEntry> parse_ground_truth(const std::string& json_text);

struct Metrics {
    double precision_at_1 = 0.0;
    double recall = 0.0;
    double mean_true_rank = 0.0;  // over tokens where the true pair appears
    std::size_t tokens_total = 0;
    std::size_t tokens_with_hypotheses = 0;
    std::size_t true_pairs_found = 0;
};

bool hypothesis_correct(const LinkHypothesis& h, const GroundTruthEntry& gt);
Metrics evaluate(const AnalysisResult& result, const std::vector<GroundTruthEntry>& ground_truth);
std::string metrics_to_json(const Metrics& m);

HeuristicConfig heuristic_config_from_json(const std::string& json_text);

}  // namespace artex::adversary
