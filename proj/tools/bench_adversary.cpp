// Benchmark: serial reference vs OpenMP-parallel adversary analysis on a
// synthetic multi-settlement dump. Outputs must be identical; the parallel
// path only changes how the per-token work is scheduled.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "artex/adversary/analysis.hpp"
#include "artex/harness.hpp"

using namespace artex;

namespace {

ScenarioConfig bench_config(std::size_t trades, std::size_t noise) {
    ScenarioConfig c;
    c.name = "bench";
    c.seed = 7;
    c.gas_fee = 1000;
    c.payment_pool_size = 8;
    c.actors.sellers = trades;
    c.actors.buyers = trades;
    c.actors.buyer_wallets_each = 3;
    c.actors.seller_payout_wallets_each = 3;
    const Amount coin = 1'000'000'000;
    for (std::size_t i = 0; i < trades; ++i) {
        TradeConfig t;
        t.strategy = StrategyKind::ArtexPattern;
        t.pattern = 6;
        t.price = 100 * coin;
        t.seller = i;
        t.buyer = i;
        t.start_offset_s = i * 3 * 3600;
        t.payment_splits = {50 * coin, 30 * coin, 20 * coin};
        c.trades.push_back(t);
    }
    c.noise.wallets = 12;
    c.noise.count = noise;
    c.noise.min_amount = coin / 10;
    c.noise.max_amount = 4 * coin;
    return c;
}

double run_ms(const adversary::PublicView& view, const adversary::HeuristicConfig& cfg,
              adversary::AnalysisResult& out, bool parallel, int reps) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    for (int i = 0; i < reps; ++i)
        out = parallel ? adversary::rank_links_parallel(view, cfg)
                       : adversary::rank_links_serial(view, cfg);
    auto t1 = clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t trades = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 12;
    int reps = argc > 2 ? std::atoi(argv[2]) : 3;

    std::printf("building synthetic dump (%zu settlements)...\n", trades);
    ScenarioResult sim = run_scenario(bench_config(trades, 200));
    adversary::PublicView view = adversary::PublicView::from_ndjson_string(sim.dump_ndjson);

    adversary::HeuristicConfig cfg = sim.config.adversary;
    std::printf("dump: %zu txs, %zu tokens\n", view.txs().size(), view.tokens().size());
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled in this build\n");
#endif

    adversary::AnalysisResult serial_out, parallel_out;
    double serial_ms = run_ms(view, cfg, serial_out, false, reps);
    double parallel_ms = run_ms(view, cfg, parallel_out, true, reps);

    bool identical = adversary::hypotheses_to_json(serial_out) ==
                     adversary::hypotheses_to_json(parallel_out);

    std::printf("\n%-22s %10s\n", "engine", "ms/run");
    std::printf("%-22s %10.2f\n", "serial reference", serial_ms);
    std::printf("%-22s %10.2f\n", "openmp parallel", parallel_ms);
    std::printf("speedup: %.2fx, outputs identical: %s\n",
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
