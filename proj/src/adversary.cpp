#include "artex/adversary/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace artex::adversary {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {
const std::string kZeroAddress = "0x0000000000000000000000000000000000000000";

std::uint64_t saturating_sub(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : 0; }
}  // namespace

bool TxRecord::from_system() const { return from == kZeroAddress; }

std::string TokenKey::str() const {
    return token_id ? contract + "#" + std::to_string(*token_id) : contract;
}

std::string LinkHypothesis::cluster_key() const {
    std::string k;
    for (const auto& a : seller_cluster) k += a + ",";
    k += "|";
    for (const auto& a : buyer_cluster) k += a + ",";
    return k;
}

bool AmountCandidate::ranks_before(const AmountCandidate& other) const {
    if (score != other.score) return score > other.score;
    if (inflows != other.inflows) return inflows < other.inflows;
    return outflows < other.outflows;
}

// ---------------------------------------------------------------------------
// parsing

PublicView PublicView::from_ndjson(std::istream& in) {
    PublicView v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw error(errc::config_invalid,
                        "dump line " + std::to_string(line_no) + ": " + e.what());
        }
        TxRecord tx;
        tx.hash = j.at("hash").get<std::string>();
        tx.from = j.at("from").get<std::string>();
        tx.to = j.at("to").get<std::string>();
        tx.value = j.at("value").get<Amount>();
        if (!j.at("token_op").is_null()) {
            TxTokenOp op;
            const json& o = j.at("token_op");
            op.contract = o.at("contract").get<std::string>();
            if (!o.at("token_id").is_null()) op.token_id = o.at("token_id").get<std::uint64_t>();
            op.amount = o.at("amount").get<Amount>();
            tx.token_op = op;
        }
        tx.gas_fee = j.at("gas_fee").get<Amount>();
        tx.block_height = j.at("block_height").get<std::uint64_t>();
        tx.timestamp = j.at("timestamp").get<std::uint64_t>();
        v.txs_.push_back(std::move(tx));
    }

    for (std::size_t i = 0; i < v.txs_.size(); ++i) {
        const TxRecord& tx = v.txs_[i];
        for (const std::string* a : {&tx.from, &tx.to}) {
            if (*a == kZeroAddress) continue;
            auto [it, fresh] = v.first_block_.emplace(*a, tx.block_height);
            if (!fresh) it->second = std::min(it->second, tx.block_height);
        }
        if (tx.token_op) {
            TokenKey k{tx.token_op->contract, tx.token_op->token_id};
            if (tx.moves_token()) v.by_token_[k].push_back(i);
        }
    }
    for (const auto& [k, idxs] : v.by_token_) v.tokens_.push_back(k);
    return v;
}

PublicView PublicView::from_ndjson_string(const std::string& text) {
    std::istringstream ss(text);
    return from_ndjson(ss);
}

PublicView PublicView::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::config_invalid, "cannot open dump file " + path);
    return from_ndjson(in);
}

const std::vector<std::size_t>& PublicView::token_txs(const TokenKey& k) const {
    static const std::vector<std::size_t> empty;
    auto it = by_token_.find(k);
    return it == by_token_.end() ? empty : it->second;
}

std::uint64_t PublicView::first_block_of(const std::string& address) const {
    auto it = first_block_.find(address);
    return it == first_block_.end() ? UINT64_MAX : it->second;
}

// ---------------------------------------------------------------------------
// heuristics

CustodyChain trace_token(const PublicView& view, const TokenKey& token) {
    const auto& idxs = view.token_txs(token);
    if (idxs.empty())
        throw error(errc::unknown_token, "token never appears in the view: " + token.str());
    CustodyChain chain;
    chain.token = token;
    for (std::size_t i : idxs) {
        const TxRecord& tx = view.txs()[i];
        if (tx.from_system()) continue;  // mints are provenance, not trades
        chain.hops.push_back(Hop{i, tx.from, tx.to, tx.timestamp, tx.block_height});
    }
    return chain;
}

std::optional<std::size_t> find_reverse_transfer(const PublicView& view, const Hop& hop,
                                                 const HeuristicConfig& cfg) {
    for (std::size_t i = 0; i < view.txs().size(); ++i) {
        const TxRecord& tx = view.txs()[i];
        if (!tx.moves_value()) continue;
        if (tx.from != hop.to || tx.to != hop.from) continue;
        std::uint64_t dt = tx.timestamp > hop.timestamp ? tx.timestamp - hop.timestamp
                                                        : hop.timestamp - tx.timestamp;
        if (dt <= cfg.time_window_s) return i;
    }
    return std::nullopt;
}

double heuristic_direct_swap(const PublicView& view, const Hop& hop, const HeuristicConfig& cfg) {
    return find_reverse_transfer(view, hop, cfg) ? 1.0 : 0.0;
}

double heuristic_fresh_wallet(const PublicView& view, const CustodyChain& chain) {
    if (chain.empty()) return 0.0;
    const Hop& last = chain.hops.back();
    return view.first_block_of(last.to) == last.block_height ? 1.0 : 0.0;
}

double heuristic_timing(std::uint64_t t_hop, std::uint64_t t_tx, std::uint64_t tau_s) {
    std::uint64_t dt = t_tx > t_hop ? t_tx - t_hop : t_hop - t_tx;
    if (tau_s == 0) return dt == 0 ? 1.0 : 0.0;
    return std::exp(-static_cast<double>(dt) / static_cast<double>(tau_s));
}

std::set<std::string> exchange_cluster(const PublicView& view, const HeuristicConfig& cfg) {
    std::set<std::string> cluster;
    for (const TokenKey& token : view.tokens()) {
        CustodyChain chain = trace_token(view, token);
        if (chain.empty()) continue;

        std::set<std::string> received, sent;
        for (const Hop& h : chain.hops) {
            if (received.count(h.from)) cluster.insert(h.from);  // relay: in, then out
            received.insert(h.to);
            sent.insert(h.from);
        }

        const std::string& endpoint = chain.endpoint();
        std::uint64_t lo = saturating_sub(chain.t_first(), cfg.time_window_s);
        std::uint64_t hi = chain.t_last() + cfg.time_window_s;
        for (const TxRecord& tx : view.txs()) {
            if (!tx.moves_value() || tx.to != endpoint || tx.from_system()) continue;
            if (tx.timestamp < lo || tx.timestamp > hi) continue;
            cluster.insert(tx.from);  // funded a fresh-looking endpoint
        }
    }
    cluster.erase(kZeroAddress);

    // Fan-in expansion: wallets bankrolled by the same sources that feed the
    // seed cluster belong to the same operator. One pass is enough to sweep a
    // shared hot-wallet pool; token-free background traffic never connects.
    std::set<std::string> feeders;
    for (const TxRecord& tx : view.txs()) {
        if (!tx.moves_value() || tx.from_system()) continue;
        if (cluster.count(tx.to) && !cluster.count(tx.from)) feeders.insert(tx.from);
    }
    std::set<std::string> expanded = cluster;
    for (const TxRecord& tx : view.txs()) {
        if (!tx.moves_value() || tx.from_system()) continue;
        if (feeders.count(tx.from)) expanded.insert(tx.to);
    }
    for (const auto& f : feeders) expanded.erase(f);
    expanded.erase(kZeroAddress);
    return expanded;
}

std::set<std::string> near_chain_wallets(const PublicView& view, const CustodyChain& chain,
                                         const std::set<std::string>& cluster,
                                         const HeuristicConfig& cfg) {
    std::set<std::string> chain_addrs;
    for (const Hop& h : chain.hops) {
        chain_addrs.insert(h.from);
        chain_addrs.insert(h.to);
    }
    std::set<std::string> near = cluster;
    std::uint64_t lo = saturating_sub(chain.t_first(), cfg.time_window_s);
    std::uint64_t hi = chain.t_last() + cfg.time_window_s;
    for (const TxRecord& tx : view.txs()) {
        if (!tx.moves_value() || tx.from_system()) continue;
        if (tx.timestamp < lo || tx.timestamp > hi) continue;
        if (chain_addrs.count(tx.to) && !chain_addrs.count(tx.from)) near.insert(tx.from);
    }
    for (const auto& a : chain_addrs) near.erase(a);
    near.erase(kZeroAddress);
    return near;
}

namespace {

// Scoring pieces, written so the batched search can evaluate pairs from
// per-subset partial sums and land on bit-identical doubles.

double sum_closeness(Amount in_sum, Amount out_sum, const HeuristicConfig& cfg) {
    Amount delta = in_sum > out_sum ? in_sum - out_sum : out_sum - in_sum;
    if (cfg.amount_tolerance == 0) return delta == 0 ? 1.0 : 0.0;
    return std::exp(-static_cast<double>(delta) / static_cast<double>(cfg.amount_tolerance));
}

double combine_candidate_score(double sum_score, std::size_t n_in, std::size_t n_out,
                               bool flow_through, bool chain_touch, double timing_in_sum,
                               double timing_out_sum, const HeuristicConfig& cfg,
                               double& amount_out, double& timing_out) {
    double parsimony = 2.0 / static_cast<double>(n_in + n_out);
    amount_out = sum_score * parsimony * (flow_through ? 1.0 : 0.5) * (chain_touch ? 1.0 : 0.5);
    timing_out = (timing_in_sum + timing_out_sum) / static_cast<double>(n_in + n_out);
    return std::pow(amount_out, cfg.weight_amount) * std::pow(timing_out, cfg.weight_timing);
}

bool outflows_touch_chain(const PublicView& view, const CustodyChain& chain,
                          const std::vector<std::size_t>& outflows) {
    for (auto i : outflows) {
        const std::string& dest = view.txs()[i].to;
        if (dest == chain.endpoint()) continue;
        for (const Hop& h : chain.hops)
            if (dest == h.from || dest == h.to) return true;
    }
    return false;
}

// sorted unique addresses on one side of a flow set
std::vector<const std::string*> side_addresses(const PublicView& view,
                                               const std::vector<std::size_t>& txs, bool dest) {
    std::vector<const std::string*> out;
    for (auto i : txs) out.push_back(dest ? &view.txs()[i].to : &view.txs()[i].from);
    auto less = [](const std::string* a, const std::string* b) { return *a < *b; };
    auto eq = [](const std::string* a, const std::string* b) { return *a == *b; };
    std::sort(out.begin(), out.end(), less);
    out.erase(std::unique(out.begin(), out.end(), eq), out.end());
    return out;
}

}  // namespace

AmountCandidate score_amount_candidate(const PublicView& view, const CustodyChain& chain,
                                       std::vector<std::size_t> inflows,
                                       std::vector<std::size_t> outflows,
                                       const HeuristicConfig& cfg) {
    AmountCandidate c;
    c.inflows = std::move(inflows);
    c.outflows = std::move(outflows);
    for (auto i : c.inflows) c.in_sum += view.txs()[i].value;
    for (auto i : c.outflows) c.out_sum += view.txs()[i].value;

    // Two classic taint signals. Flow-through: the money left the very wallets
    // it entered. Chain touch: an outflow lands on an address in the token's
    // own custody history. Either one sharply strengthens a candidate.
    auto in_dests = side_addresses(view, c.inflows, true);
    auto out_sources = side_addresses(view, c.outflows, false);
    auto eq = [](const std::string* a, const std::string* b) { return *a == *b; };
    bool flow_through = in_dests.size() == out_sources.size() &&
                        std::equal(in_dests.begin(), in_dests.end(), out_sources.begin(), eq);
    bool chain_touch = outflows_touch_chain(view, chain, c.outflows);

    std::uint64_t anchor = chain.t_last();
    double timing_in = 0.0, timing_out = 0.0;
    for (auto i : c.inflows)
        timing_in += heuristic_timing(anchor, view.txs()[i].timestamp, cfg.timing_decay_tau_s);
    for (auto i : c.outflows)
        timing_out += heuristic_timing(anchor, view.txs()[i].timestamp, cfg.timing_decay_tau_s);

    c.score = combine_candidate_score(sum_closeness(c.in_sum, c.out_sum, cfg), c.inflows.size(),
                                      c.outflows.size(), flow_through, chain_touch, timing_in,
                                      timing_out, cfg, c.amount_score, c.timing_score);
    return c;
}

namespace {

// Per-transaction data the pair loop needs, hoisted out of the hot path.
struct PoolTx {
    std::size_t tx = 0;
    Amount value = 0;
    double timing = 0.0;  // exp decay against the chain anchor
    int addr_id = 0;      // interned flow-side address
    bool touches_chain = false;
};

// One enumerated combination with everything a pair evaluation reads.
struct SubsetInfo {
    std::vector<std::size_t> txs;
    std::vector<int> addr_ids;  // sorted unique flow-side addresses
    Amount sum = 0;
    double timing_sum = 0.0;
    bool touch = false;
};

bool enumerate_subsets(const std::vector<PoolTx>& pool, std::size_t max_size,
                       std::uint64_t& budget, std::vector<SubsetInfo>& out) {
    std::size_t n = pool.size();
    std::vector<std::size_t> pick;
    for (std::size_t size = 1; size <= std::min(max_size, n); ++size) {
        pick.assign(size, 0);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        while (true) {
            if (budget == 0) return false;
            --budget;
            SubsetInfo info;
            info.txs.resize(size);
            info.addr_ids.resize(size);
            for (std::size_t i = 0; i < size; ++i) {
                const PoolTx& p = pool[pick[i]];
                info.txs[i] = p.tx;
                info.addr_ids[i] = p.addr_id;
                info.sum += p.value;
                info.timing_sum += p.timing;
                info.touch = info.touch || p.touches_chain;
            }
            std::sort(info.addr_ids.begin(), info.addr_ids.end());
            info.addr_ids.erase(std::unique(info.addr_ids.begin(), info.addr_ids.end()),
                                info.addr_ids.end());
            out.push_back(std::move(info));

            std::size_t i = size;
            while (i > 0) {
                --i;
                if (pick[i] != i + n - size) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
                    break;
                }
                if (i == 0) goto next_size;
            }
        }
    next_size:;
    }
    return true;
}

struct CandidateOrder {
    bool operator()(const AmountCandidate& a, const AmountCandidate& b) const {
        return a.ranks_before(b);
    }
};

}  // namespace

namespace {
AmountMatchResult amount_match_with_cluster(const PublicView& view, const CustodyChain& chain,
                                            const std::set<std::string>& cluster,
                                            const HeuristicConfig& cfg);
}

AmountMatchResult heuristic_amount_match(const PublicView& view, const CustodyChain& chain,
                                         const HeuristicConfig& cfg) {
    if (chain.empty()) return {};
    return amount_match_with_cluster(view, chain, exchange_cluster(view, cfg), cfg);
}

AmountPools amount_match_pools(const PublicView& view, const CustodyChain& chain,
                               const std::set<std::string>& cluster,
                               const HeuristicConfig& cfg) {
    AmountPools pools;
    if (chain.empty()) return pools;
    std::set<std::string> near = near_chain_wallets(view, chain, cluster, cfg);
    if (near.empty()) return pools;

    std::set<std::string> chain_addrs;
    for (const Hop& h : chain.hops) {
        chain_addrs.insert(h.from);
        chain_addrs.insert(h.to);
    }

    std::uint64_t lo = saturating_sub(chain.t_first(), cfg.time_window_s);
    std::uint64_t hi = chain.t_last() + cfg.time_window_s;
    for (std::size_t i = 0; i < view.txs().size(); ++i) {
        const TxRecord& tx = view.txs()[i];
        if (!tx.moves_value() || tx.from_system()) continue;
        if (tx.timestamp < lo || tx.timestamp > hi) continue;
        if (near.count(tx.to) && !near.count(tx.from) && !chain_addrs.count(tx.from))
            pools.inflows.push_back(i);
        if (near.count(tx.from) && !near.count(tx.to)) pools.outflows.push_back(i);
    }
    return pools;
}

namespace {
AmountMatchResult amount_match_with_cluster(const PublicView& view, const CustodyChain& chain,
                                            const std::set<std::string>& cluster,
                                            const HeuristicConfig& cfg) {
    AmountMatchResult result;
    if (chain.empty()) return result;

    AmountPools pools = amount_match_pools(view, chain, cluster, cfg);
    if (pools.inflows.empty() || pools.outflows.empty()) return result;

    // hoist timing, interned addresses and the chain-touch flag per transaction
    std::map<std::string, int> addr_ids;
    auto intern = [&](const std::string& a) {
        auto [it, fresh] = addr_ids.emplace(a, static_cast<int>(addr_ids.size()));
        (void)fresh;
        return it->second;
    };
    std::uint64_t anchor = chain.t_last();
    std::set<std::string> chain_addrs;
    for (const Hop& h : chain.hops) {
        chain_addrs.insert(h.from);
        chain_addrs.insert(h.to);
    }
    auto build_pool = [&](const std::vector<std::size_t>& idxs, bool inflow_side) {
        std::vector<PoolTx> pool;
        for (std::size_t i : idxs) {
            const TxRecord& tx = view.txs()[i];
            PoolTx p;
            p.tx = i;
            p.value = tx.value;
            p.timing = heuristic_timing(anchor, tx.timestamp, cfg.timing_decay_tau_s);
            p.addr_id = intern(inflow_side ? tx.to : tx.from);
            p.touches_chain =
                !inflow_side && tx.to != chain.endpoint() && chain_addrs.count(tx.to) > 0;
            pool.push_back(p);
        }
        return pool;
    };
    std::vector<PoolTx> inflow_pool = build_pool(pools.inflows, true);
    std::vector<PoolTx> outflow_pool = build_pool(pools.outflows, false);

    std::size_t k = std::min<std::size_t>(cfg.max_subset_size, 8);
    std::uint64_t budget = cfg.search_budget;

    std::vector<SubsetInfo> ins, outs;
    if (!enumerate_subsets(inflow_pool, k, budget, ins)) result.budget_exceeded = true;
    if (!result.budget_exceeded && !enumerate_subsets(outflow_pool, k, budget, outs))
        result.budget_exceeded = true;

    // sort inflow subsets by sum for range lookups
    std::vector<std::size_t> order(ins.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ins[a].sum != ins[b].sum) return ins[a].sum < ins[b].sum;
        return ins[a].txs < ins[b].txs;
    });
    std::vector<Amount> sorted_sums(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_sums[i] = ins[order[i]].sum;

    CandidateOrder better;
    std::vector<AmountCandidate> kept;
    double admit_floor = -1.0;  // scores below this can no longer reach the top 32
    auto keep = [&](const SubsetInfo& in, const SubsetInfo& out) {
        kept.push_back(score_amount_candidate(view, chain, in.txs, out.txs, cfg));
        if (kept.size() > 256) {
            std::sort(kept.begin(), kept.end(), better);
            kept.resize(64);
            admit_floor = kept.back().score;
        }
    };

    for (std::size_t oi = 0; oi < outs.size() && budget > 0; ++oi) {
        const SubsetInfo& out = outs[oi];
        Amount lo_sum = saturating_sub(out.sum, cfg.amount_tolerance);
        Amount hi_sum = out.sum + cfg.amount_tolerance;
        auto first = std::lower_bound(sorted_sums.begin(), sorted_sums.end(), lo_sum);
        auto last = std::upper_bound(sorted_sums.begin(), sorted_sums.end(), hi_sum);
        for (auto it = first; it != last && budget > 0; ++it) {
            --budget;
            const SubsetInfo& in = ins[order[static_cast<std::size_t>(it - sorted_sums.begin())]];
            double amount_part, timing_part;
            double score = combine_candidate_score(
                sum_closeness(in.sum, out.sum, cfg), in.txs.size(), out.txs.size(),
                in.addr_ids == out.addr_ids, out.touch, in.timing_sum, out.timing_sum, cfg,
                amount_part, timing_part);
            if (score >= admit_floor) keep(in, out);
        }
    }
    if (budget == 0) result.budget_exceeded = true;

    std::sort(kept.begin(), kept.end(), better);
    if (kept.size() > 32) kept.resize(32);
    result.candidates = std::move(kept);
    return result;
}
}  // namespace

// ---------------------------------------------------------------------------
// pipeline

TokenAnalysis analyze_token(const PublicView& view, const TokenKey& token,
                            const std::set<std::string>& cluster, const HeuristicConfig& cfg) {
    TokenAnalysis out;
    out.token = token;
    CustodyChain chain = trace_token(view, token);
    if (chain.empty()) return out;

    out.fresh_endpoint = heuristic_fresh_wallet(view, chain);
    double fresh_factor = 0.5 + 0.5 * out.fresh_endpoint;

    std::vector<LinkHypothesis> hyps;

    for (const Hop& hop : chain.hops) {
        double swap = heuristic_direct_swap(view, hop, cfg);
        out.direct_swap_max = std::max(out.direct_swap_max, swap);
        auto rev = find_reverse_transfer(view, hop, cfg);
        if (!rev) continue;
        LinkHypothesis h;
        h.token = token;
        h.seller_cluster.insert(hop.from);
        h.buyer_cluster.insert(hop.to);
        double timing =
            heuristic_timing(hop.timestamp, view.txs()[*rev].timestamp, cfg.timing_decay_tau_s);
        h.score = std::pow(1.0, cfg.weight_direct) * std::pow(timing, cfg.weight_timing) *
                  std::pow(fresh_factor, cfg.weight_fresh);
        h.evidence.push_back(Evidence{"direct_swap", {view.txs()[hop.tx_index].hash, view.txs()[*rev].hash}});
        hyps.push_back(std::move(h));
    }

    AmountMatchResult amounts = amount_match_with_cluster(view, chain, cluster, cfg);
    out.budget_exceeded = amounts.budget_exceeded;

    std::map<std::string, LinkHypothesis> by_cluster;
    for (const AmountCandidate& c : amounts.candidates) {
        LinkHypothesis h;
        h.token = token;
        for (auto i : c.inflows) h.buyer_cluster.insert(view.txs()[i].from);
        for (auto i : c.outflows) {
            const std::string& dest = view.txs()[i].to;
            if (dest != chain.endpoint()) h.seller_cluster.insert(dest);
        }
        if (h.buyer_cluster.empty() || h.seller_cluster.empty()) continue;
        h.score = std::pow(c.amount_score, cfg.weight_amount) *
                  std::pow(c.timing_score, cfg.weight_timing) *
                  std::pow(fresh_factor, cfg.weight_fresh);
        Evidence ev;
        ev.heuristic = "amount_match";
        for (auto i : c.inflows) ev.tx_hashes.push_back(view.txs()[i].hash);
        for (auto i : c.outflows) ev.tx_hashes.push_back(view.txs()[i].hash);
        h.evidence.push_back(std::move(ev));

        std::string key = h.cluster_key();
        auto it = by_cluster.find(key);
        if (it == by_cluster.end() || h.score > it->second.score) by_cluster[key] = std::move(h);
    }
    for (auto& [key, h] : by_cluster) hyps.push_back(std::move(h));

    std::sort(hyps.begin(), hyps.end(), [](const LinkHypothesis& a, const LinkHypothesis& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.cluster_key() < b.cluster_key();
    });
    if (hyps.size() > cfg.max_hypotheses) hyps.resize(cfg.max_hypotheses);
    out.hypotheses = std::move(hyps);
    return out;
}

AnalysisResult rank_links_serial(const PublicView& view, const HeuristicConfig& cfg) {
    AnalysisResult result;
    std::set<std::string> cluster = exchange_cluster(view, cfg);
    result.per_token.resize(view.tokens().size());
    for (std::size_t i = 0; i < view.tokens().size(); ++i)
        result.per_token[i] = analyze_token(view, view.tokens()[i], cluster, cfg);
    return result;
}

AnalysisResult rank_links_parallel(const PublicView& view, const HeuristicConfig& cfg) {
    AnalysisResult result;
    std::set<std::string> cluster = exchange_cluster(view, cfg);
    result.per_token.resize(view.tokens().size());
    const auto n = static_cast<std::int64_t>(view.tokens().size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i)
        result.per_token[static_cast<std::size_t>(i)] =
            analyze_token(view, view.tokens()[static_cast<std::size_t>(i)], cluster, cfg);
    return result;
}

AnalysisResult rank_links(const PublicView& view, const HeuristicConfig& cfg) {
    return cfg.engine == Engine::Parallel ? rank_links_parallel(view, cfg)
                                          : rank_links_serial(view, cfg);
}

const TokenAnalysis* AnalysisResult::find(const TokenKey& k) const {
    for (const auto& t : per_token)
        if (t.token == k) return &t;
    return nullptr;
}

std::string hypotheses_to_json(const AnalysisResult& result) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : result.per_token) {
        ordered_json tok;
        tok["contract"] = t.token.contract;
        tok["token_id"] = t.token.token_id ? ordered_json(*t.token.token_id) : ordered_json(nullptr);
        tok["direct_swap_max"] = t.direct_swap_max;
        tok["fresh_endpoint"] = t.fresh_endpoint;
        tok["budget_exceeded"] = t.budget_exceeded;
        ordered_json hyps = ordered_json::array();
        for (const auto& h : t.hypotheses) {
            ordered_json hj;
            hj["seller_cluster"] = h.seller_cluster;
            hj["buyer_cluster"] = h.buyer_cluster;
            hj["score"] = h.score;
            ordered_json ev = ordered_json::array();
            for (const auto& e : h.evidence)
                ev.push_back({{"heuristic", e.heuristic}, {"txs", e.tx_hashes}});
            hj["evidence"] = ev;
            hyps.push_back(hj);
        }
        tok["hypotheses"] = hyps;
        arr.push_back(tok);
    }
    return arr.dump(2);
}

// ---------------------------------------------------------------------------
// evaluation

bool hypothesis_correct(const LinkHypothesis& h, const GroundTruthEntry& gt) {
    bool seller = false, buyer = false;
    for (const auto& a : h.seller_cluster)
        if (gt.seller_wallets.count(a)) { seller = true; break; }
    for (const auto& a : h.buyer_cluster)
        if (gt.buyer_wallets.count(a)) { buyer = true; break; }
    return seller && buyer;
}

Metrics evaluate(const AnalysisResult& result, const std::vector<GroundTruthEntry>& ground_truth) {
    Metrics m;
    m.tokens_total = ground_truth.size();
    std::size_t top1_correct = 0;
    std::size_t rank_sum = 0;
    for (const auto& gt : ground_truth) {
        const TokenAnalysis* t = result.find(gt.token);
        if (!t || t->hypotheses.empty()) continue;
        ++m.tokens_with_hypotheses;
        if (hypothesis_correct(t->hypotheses.front(), gt)) ++top1_correct;
        for (std::size_t r = 0; r < t->hypotheses.size(); ++r) {
            if (hypothesis_correct(t->hypotheses[r], gt)) {
                ++m.true_pairs_found;
                rank_sum += r + 1;
                break;
            }
        }
    }
    m.precision_at_1 = m.tokens_with_hypotheses == 0
                           ? 0.0
                           : static_cast<double>(top1_correct) /
                                 static_cast<double>(m.tokens_with_hypotheses);
    m.recall = m.tokens_total == 0 ? 0.0
                                   : static_cast<double>(m.true_pairs_found) /
                                         static_cast<double>(m.tokens_total);
    m.mean_true_rank = m.true_pairs_found == 0
                           ? 0.0
                           : static_cast<double>(rank_sum) / static_cast<double>(m.true_pairs_found);
    return m;
}

std::string metrics_to_json(const Metrics& m) {
    ordered_json j;
    j["precision_at_1"] = m.precision_at_1;
    j["recall"] = m.recall;
    j["mean_true_rank"] = m.mean_true_rank;
    j["tokens_total"] = m.tokens_total;
    j["tokens_with_hypotheses"] = m.tokens_with_hypotheses;
    j["true_pairs_found"] = m.true_pairs_found;
    return j.dump(2);
}

std::vector<GroundTruthEntry> parse_ground_truth(const std::string& json_text) {
    json root = json::parse(json_text);
    std::vector<GroundTruthEntry> out;
    for (const auto& e : root) {
        GroundTruthEntry g;
        g.token.contract = e.at("token").at("contract").get<std::string>();
        if (!e.at("token").at("token_id").is_null())
            g.token.token_id = e.at("token").at("token_id").get<std::uint64_t>();
        for (const auto& w : e.at("seller_wallets")) g.seller_wallets.insert(w.get<std::string>());
        for (const auto& w : e.at("buyer_wallets")) g.buyer_wallets.insert(w.get<std::string>());
        g.strategy = e.at("strategy").get<std::string>();
        g.price = e.at("price").get<Amount>();
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::config_invalid, "cannot open ground truth file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ground_truth(ss.str());
}

HeuristicConfig heuristic_config_from_json(const std::string& json_text) {
    json root = json::parse(json_text);
    if (root.contains("adversary")) root = root.at("adversary");
    HeuristicConfig cfg;
    if (root.contains("time_window_s")) cfg.time_window_s = root["time_window_s"].get<std::uint64_t>();
    if (root.contains("max_subset_size"))
        cfg.max_subset_size = std::min<std::size_t>(root["max_subset_size"].get<std::size_t>(), 8);
    if (root.contains("amount_tolerance")) cfg.amount_tolerance = root["amount_tolerance"].get<Amount>();
    if (root.contains("timing_decay_tau_s"))
        cfg.timing_decay_tau_s = root["timing_decay_tau_s"].get<std::uint64_t>();
    if (root.contains("search_budget")) cfg.search_budget = root["search_budget"].get<std::uint64_t>();
    if (root.contains("max_hypotheses")) cfg.max_hypotheses = root["max_hypotheses"].get<std::size_t>();
    if (root.contains("weight_direct")) cfg.weight_direct = root["weight_direct"].get<double>();
    if (root.contains("weight_amount")) cfg.weight_amount = root["weight_amount"].get<double>();
    if (root.contains("weight_fresh")) cfg.weight_fresh = root["weight_fresh"].get<double>();
    if (root.contains("weight_timing")) cfg.weight_timing = root["weight_timing"].get<double>();
    if (root.contains("engine"))
        cfg.engine = root["engine"].get<std::string>() == "parallel" ? Engine::Parallel : Engine::Serial;
    return cfg;
}

}  // namespace artex::adversary
