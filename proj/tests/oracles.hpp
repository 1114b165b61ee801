#pragma once

// Independent oracles used by the unit and acceptance suites. These
// deliberately re-derive results from raw artifacts (dump text, bid lists)
// instead of going through the implementation paths they check.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "artex/adversary/analysis.hpp"
#include "artex/auction.hpp"

namespace oracles {

struct FoldedState {
    std::map<std::string, long long> native;  // address -> balance (signed on purpose)
    std::map<std::string, std::map<std::uint64_t, std::string>> nft;  // contract -> id -> owner
    std::map<std::string, std::map<std::string, long long>> fungible;
    long long minted_native = 0;
};

inline const std::string kZero = "0x0000000000000000000000000000000000000000";
inline const std::string kSink =
    "0x" + std::string(40, 'f');

// Replays a ledger dump line by line. Used both for the replay-equivalence
// check and for per-block conservation sweeps.
inline FoldedState fold_dump(const std::string& ndjson, std::uint64_t up_to_block = UINT64_MAX) {
    FoldedState s;
    std::size_t pos = 0;
    while (pos < ndjson.size()) {
        std::size_t end = ndjson.find('\n', pos);
        if (end == std::string::npos) end = ndjson.size();
        std::string line = ndjson.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.at("block_height").get<std::uint64_t>() > up_to_block) continue;
        std::string from = j.at("from").get<std::string>();
        std::string to = j.at("to").get<std::string>();
        long long value = j.at("value").get<long long>();
        long long gas = j.at("gas_fee").get<long long>();
        if (from == kZero) {
            s.native[to] += value;
            s.minted_native += value;
        } else {
            s.native[from] -= value + gas;
            s.native[to] += value;
            s.native[kSink] += gas;
        }
        if (!j.at("token_op").is_null()) {
            const auto& op = j.at("token_op");
            long long amount = op.at("amount").get<long long>();
            if (amount >= 1) {
                std::string contract = op.at("contract").get<std::string>();
                if (!op.at("token_id").is_null()) {
                    s.nft[contract][op.at("token_id").get<std::uint64_t>()] = to;
                } else {
                    if (from != kZero) s.fungible[contract][from] -= amount;
                    s.fungible[contract][to] += amount;
                }
            }
        }
    }
    return s;
}

inline std::uint64_t max_block(const std::string& ndjson) {
    std::uint64_t best = 0;
    std::size_t pos = 0;
    while (pos < ndjson.size()) {
        std::size_t end = ndjson.find('\n', pos);
        if (end == std::string::npos) end = ndjson.size();
        std::string line = ndjson.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        best = std::max(best, j.at("block_height").get<std::uint64_t>());
    }
    return best;
}

// Conservation: at the given block, all balances plus the gas sink equal the
// minted supply, and nothing is negative.
inline bool conservation_holds(const std::string& ndjson, std::uint64_t block) {
    FoldedState s = fold_dump(ndjson, block);
    long long total = 0;
    for (const auto& [addr, bal] : s.native) {
        if (bal < 0) return false;
        total += bal;
    }
    return total == s.minted_native;
}

// Brute-force auction winner: highest amount, earliest bid on ties.
inline std::optional<artex::AuctionOutcome> brute_force_winner(
    const std::vector<artex::Bid>& bids, std::optional<artex::Amount> reserve) {
    const artex::Bid* best = nullptr;
    for (const auto& b : bids) {
        if (!best) {
            best = &b;
            continue;
        }
        if (b.amount > best->amount) best = &b;
        // ties: keep the earlier (list order is arrival order)
    }
    if (!best) return std::nullopt;
    if (reserve && best->amount < *reserve) return std::nullopt;
    return artex::AuctionOutcome{best->bidder, best->amount};
}

// Exhaustive subset-sum oracle: enumerates every (inflow subset, outflow
// subset) pair up to the size cap, keeps pairs within tolerance, ranks with
// the shared scorer and the same deterministic tie-break.
inline std::optional<artex::adversary::AmountCandidate> exhaustive_best_candidate(
    const artex::adversary::PublicView& view, const artex::adversary::CustodyChain& chain,
    const std::set<std::string>& cluster, const artex::adversary::HeuristicConfig& cfg) {
    using artex::adversary::AmountCandidate;
    auto pools = artex::adversary::amount_match_pools(view, chain, cluster, cfg);
    if (pools.inflows.empty() || pools.outflows.empty()) return std::nullopt;

    std::vector<std::vector<std::size_t>> in_subsets, out_subsets;
    auto collect = [&](const std::vector<std::size_t>& pool,
                       std::vector<std::vector<std::size_t>>& out) {
        std::vector<std::size_t> cur;
        std::function<void(std::size_t)> rec = [&](std::size_t start) {
            if (!cur.empty()) out.push_back(cur);
            if (cur.size() == std::min<std::size_t>(cfg.max_subset_size, 8)) return;
            for (std::size_t i = start; i < pool.size(); ++i) {
                cur.push_back(pool[i]);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
    };
    collect(pools.inflows, in_subsets);
    collect(pools.outflows, out_subsets);

    std::optional<AmountCandidate> best;
    for (const auto& a : in_subsets) {
        for (const auto& b : out_subsets) {
            artex::Amount in_sum = 0, out_sum = 0;
            for (auto i : a) in_sum += view.txs()[i].value;
            for (auto i : b) out_sum += view.txs()[i].value;
            artex::Amount delta = in_sum > out_sum ? in_sum - out_sum : out_sum - in_sum;
            if (delta > cfg.amount_tolerance) continue;
            AmountCandidate c = artex::adversary::score_amount_candidate(view, chain, a, b, cfg);
            if (!best || c.ranks_before(*best)) best = c;
        }
    }
    return best;
}

}  // namespace oracles
