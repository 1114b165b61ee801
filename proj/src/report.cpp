#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "artex/harness.hpp"

namespace artex {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json metrics_json(const adversary::Metrics& m) {
    ordered_json j;
    j["precision_at_1"] = m.precision_at_1;
    j["recall"] = m.recall;
    j["mean_true_rank"] = m.mean_true_rank;
    j["tokens_total"] = m.tokens_total;
    j["tokens_with_hypotheses"] = m.tokens_with_hypotheses;
    j["true_pairs_found"] = m.true_pairs_found;
    return j;
}

adversary::Metrics metrics_from(const json& j) {
    adversary::Metrics m;
    m.precision_at_1 = j.at("precision_at_1").get<double>();
    m.recall = j.at("recall").get<double>();
    m.mean_true_rank = j.at("mean_true_rank").get<double>();
    m.tokens_total = j.at("tokens_total").get<std::size_t>();
    m.tokens_with_hypotheses = j.at("tokens_with_hypotheses").get<std::size_t>();
    m.true_pairs_found = j.at("true_pairs_found").get<std::size_t>();
    return m;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string display_amount(Amount units, Amount scale) {
    if (scale <= 1) return std::to_string(units);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f",
                  static_cast<double>(units) / static_cast<double>(scale));
    return buf;
}

}  // namespace

std::string Report::to_json() const {
    ordered_json j;
    j["scenario"] = scenario;
    j["seed"] = seed;
    j["display_scale"] = display_scale;
    j["blocks"] = blocks;
    j["transactions"] = transactions;
    j["trades_total"] = trades_total;
    ordered_json rows = ordered_json::array();
    for (const auto& t : trades) {
        ordered_json row;
        row["trade"] = t.index;
        row["strategy"] = t.strategy;
        row["price"] = t.price;
        row["gas_units"] = t.gas_units;
        row["settlement"] = t.settlement;
        row["pattern"] = t.pattern;
        rows.push_back(row);
    }
    j["trades"] = rows;
    ordered_json gas;
    for (const auto& [k, v] : strategy_gas) gas[k] = v;
    j["strategy_gas"] = gas;
    ordered_json adv;
    for (const auto& s : adversary_by_strategy) adv[s.strategy] = metrics_json(s.metrics);
    j["adversary_by_strategy"] = adv;
    j["adversary_overall"] = metrics_json(adversary_overall);
    j["determinism"] = {{"dump_sha256", dump_sha256}};
    return j.dump(2);
}

Report Report::from_json(const std::string& text) {
    json j = json::parse(text);
    Report r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.display_scale = j.at("display_scale").get<Amount>();
    r.blocks = j.at("blocks").get<std::uint64_t>();
    r.transactions = j.at("transactions").get<std::uint64_t>();
    r.trades_total = j.at("trades_total").get<std::size_t>();
    for (const auto& row : j.at("trades")) {
        TradeReport t;
        t.index = row.at("trade").get<std::size_t>();
        t.strategy = row.at("strategy").get<std::string>();
        t.price = row.at("price").get<Amount>();
        t.gas_units = row.at("gas_units").get<Amount>();
        t.settlement = row.at("settlement").get<std::string>();
        t.pattern = row.at("pattern").get<std::string>();
        r.trades.push_back(t);
    }
    for (auto it = j.at("strategy_gas").begin(); it != j.at("strategy_gas").end(); ++it)
        r.strategy_gas[it.key()] = it.value().get<Amount>();
    for (auto it = j.at("adversary_by_strategy").begin(); it != j.at("adversary_by_strategy").end();
         ++it)
        r.adversary_by_strategy.push_back(StrategyMetrics{it.key(), metrics_from(it.value())});
    r.adversary_overall = metrics_from(j.at("adversary_overall"));
    r.dump_sha256 = j.at("determinism").at("dump_sha256").get<std::string>();
    return r;
}

std::string Report::to_table() const {
    std::ostringstream out;
    out << "scenario " << scenario << "  seed " << seed << "\n";
    out << "blocks " << blocks << "  transactions " << transactions << "  trades " << trades_total
        << "\n";
    out << "dump sha256 " << dump_sha256 << "\n\n";

    out << "trade  strategy               price(disp)   gas(units)  settlement  pattern\n";
    out << "-----  ---------------------  ------------  ----------  ----------  -------\n";
    for (const auto& t : trades) {
        char line[160];
        std::snprintf(line, sizeof line, "%5zu  %-21s  %12s  %10llu  %-10s  %s\n", t.index,
                      t.strategy.c_str(), display_amount(t.price, display_scale).c_str(),
                      static_cast<unsigned long long>(t.gas_units), t.settlement.c_str(),
                      t.pattern.c_str());
        out << line;
    }
    out << "\nstrategy gas totals (units)\n";
    for (const auto& [k, v] : strategy_gas) {
        char line[120];
        std::snprintf(line, sizeof line, "  %-21s  %llu\n", k.c_str(),
                      static_cast<unsigned long long>(v));
        out << line;
    }
    out << "\nadversary metrics (precision@1 / recall / mean true rank)\n";
    for (const auto& s : adversary_by_strategy) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-21s  %s / %s / %s\n", s.strategy.c_str(),
                      fixed(s.metrics.precision_at_1).c_str(), fixed(s.metrics.recall).c_str(),
                      fixed(s.metrics.mean_true_rank).c_str());
        out << line;
    }
    {
        char line[160];
        std::snprintf(line, sizeof line, "  %-21s  %s / %s / %s\n", "overall",
                      fixed(adversary_overall.precision_at_1).c_str(),
                      fixed(adversary_overall.recall).c_str(),
                      fixed(adversary_overall.mean_true_rank).c_str());
        out << line;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// independent pattern-template checker

namespace {

struct TradeTxs {
    std::vector<const adversary::TxRecord*> token_moves;
    std::vector<const adversary::TxRecord*> natives;
};

TradeTxs collect(const adversary::PublicView& view, const std::set<std::string>& hashes) {
    TradeTxs out;
    for (const auto& tx : view.txs()) {
        if (!hashes.count(tx.hash)) continue;
        if (tx.moves_token() && !tx.from_system()) out.token_moves.push_back(&tx);
        if (tx.moves_value()) out.natives.push_back(&tx);
    }
    return out;
}

std::string fail(const std::string& why) { return "fail: " + why; }

}  // namespace

std::string check_pattern(const adversary::PublicView& view, const PatternCheckInput& in) {
    TradeTxs txs = collect(view, in.tx_hashes);

    // token hops never carry native value, in every strategy
    for (const auto* tx : txs.token_moves)
        if (tx->value != 0) return fail("token transfer carries native value");

    switch (in.strategy) {
        case StrategyKind::NaiveP2P:
        case StrategyKind::FrontendHiding: {
            if (txs.token_moves.size() != 1) return fail("expected exactly one token hop");
            const auto* hop = txs.token_moves[0];
            if (hop->from != in.seller_token_wallet || hop->to != in.buyer_receive_wallet)
                return fail("token hop endpoints wrong");
            if (txs.natives.size() != 1) return fail("expected exactly one payment");
            const auto* pay = txs.natives[0];
            if (pay->from != in.buyer_receive_wallet || pay->to != in.seller_token_wallet)
                return fail("payment endpoints wrong");
            if (pay->value != in.price) return fail("payment amount is not the price");
            return "ok";
        }
        case StrategyKind::DecoyAccounts: {
            if (txs.token_moves.size() != 2) return fail("expected deposit and delivery hops");
            const auto* dep = txs.token_moves[0];
            const auto* del = txs.token_moves[1];
            if (dep->from != in.seller_token_wallet || dep->to != in.custody_wallet)
                return fail("custody deposit endpoints wrong");
            if (del->from != in.custody_wallet || del->to != in.buyer_receive_wallet)
                return fail("custody delivery endpoints wrong");
            const adversary::TxRecord *pay_in = nullptr, *pay_out = nullptr;
            for (const auto* tx : txs.natives) {
                if (tx->from == in.buyer_receive_wallet && in.payout_dests.count(tx->to))
                    return fail("buyer paid the seller directly");
                if (tx->from == in.buyer_receive_wallet && in.payment_addresses.count(tx->to))
                    pay_in = tx;
                else if (in.payout_dests.count(tx->to))
                    pay_out = tx;
                else
                    return fail("unexpected native transfer in decoy flow");
            }
            if (!pay_in || !pay_out) return fail("missing decoy payment pair");
            if (pay_in->value != in.price || pay_out->value != in.price)
                return fail("decoy amounts differ from the price");
            if (pay_in->to == pay_out->from) return fail("same decoy received and paid");
            return "ok";
        }
        case StrategyKind::ArtexPattern: {
            if (txs.token_moves.size() != 2) return fail("expected deposit and delivery hops");
            const auto* dep = txs.token_moves[0];
            const auto* del = txs.token_moves[1];
            if (dep->to != in.intake_wallet) return fail("deposit does not land at the intake");
            if (del->from != in.intake_wallet || del->to != in.delivery_wallet)
                return fail("delivery hop endpoints wrong");

            Amount pay_sum = 0, payout_sum = 0;
            std::size_t pay_n = 0, payout_n = 0;
            for (const auto* tx : txs.natives) {
                if (in.buyer_sources.count(tx->from) && in.payment_addresses.count(tx->to)) {
                    pay_sum = checked_add(pay_sum, tx->value);
                    ++pay_n;
                    continue;
                }
                if (in.payout_dests.count(tx->to)) {
                    payout_sum = checked_add(payout_sum, tx->value);
                    ++payout_n;
                    if (in.strict_routing && !in.payment_addresses.count(tx->from))
                        return fail("strict routing must pay out of the payment wallets");
                    if (!in.strict_routing && in.payment_addresses.count(tx->from))
                        return fail("payout drawn from this trade's payment wallet");
                    continue;
                }
                // remaining plumbing: gas floats, dust, refunds
                if (tx->to == in.delivery_wallet && tx->value == in.dust) continue;
                if (tx->to == in.intake_wallet && tx->from == in.treasury) continue;
                if (in.payment_addresses.count(tx->to) && tx->from == in.treasury) continue;
                if (in.payment_addresses.count(tx->from) && in.buyer_sources.count(tx->to))
                    continue;  // refund
                return fail("unexpected native transfer in exchange flow");
            }
            std::size_t expected_pay = in.pattern <= 2 ? 1 : 3;
            if (pay_n != expected_pay) return fail("payment leg count does not match pattern");
            if (pay_sum < in.price) return fail("payments below the winning price");
            if (payout_n == 0) return fail("no payout legs");
            if (payout_sum != in.price - in.fee) return fail("payouts do not equal price minus fee");
            return "ok";
        }
    }
    return fail("unknown strategy");
}

}  // namespace artex
