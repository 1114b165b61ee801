#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "artex/adversary/analysis.hpp"
#include "artex/harness.hpp"

namespace fs = std::filesystem;
using namespace artex;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw error(errc::config_invalid, "cannot write " + p.string());
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw error(errc::config_invalid, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --seed beats the config value; ARTEX_SIM_SEED applies only when the config
// file does not pin a seed at all.
std::uint64_t effective_seed(const std::string& config_text, std::optional<std::uint64_t> flag_seed,
                             std::uint64_t config_seed) {
    if (flag_seed) return *flag_seed;
    auto j = nlohmann::json::parse(config_text, nullptr, false);
    if (!j.is_discarded() && j.contains("seed")) return config_seed;
    if (const char* env = std::getenv("ARTEX_SIM_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
        }
    }
    return config_seed;
}

int run_simulate(const std::string& config_path, const std::string& scenario_name,
                 std::optional<std::uint64_t> seed, const std::string& out_dir) {
    ScenarioConfig cfg;
    std::string config_text;
    if (!scenario_name.empty()) {
        const BundledScenario* s = find_scenario(scenario_name);
        if (!s) {
            std::cerr << "error: unknown bundled scenario '" << scenario_name << "'\n";
            return kExitConfig;
        }
        cfg = s->config;
        config_text = cfg.to_json();
    } else {
        config_text = read_file(config_path);
        cfg = ScenarioConfig::from_json(config_text);
    }
    cfg.seed = effective_seed(config_text, seed, cfg.seed);

    ScenarioResult result = run_scenario(cfg);

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_file(dir / "dump.ndjson", result.dump_ndjson);
    write_file(dir / "ground_truth.json", result.ground_truth_json);
    write_file(dir / "listings.json", result.listings_json);
    write_file(dir / "hypotheses.json", result.hypotheses_json);
    write_file(dir / "settlement_audit.json", result.settlement_audit_json);
    write_file(dir / "report.json", result.report.to_json());
    write_file(dir / "report.txt", result.report.to_table());
    write_file(dir / "config.effective.json", result.config.to_json());

    std::cout << "scenario " << cfg.name << " seed " << cfg.seed << ": "
              << result.report.transactions << " txs in " << result.report.blocks
              << " blocks, dump sha256 " << result.report.dump_sha256 << "\n"
              << "artifacts written to " << dir.string() << "\n";
    return 0;
}

int run_analyze(const std::string& dump_path, const std::string& config_path,
                const std::string& ground_truth_path, const std::string& out_path) {
    adversary::PublicView view = adversary::PublicView::from_file(dump_path);
    adversary::HeuristicConfig cfg;
    if (!config_path.empty())
        cfg = adversary::heuristic_config_from_json(read_file(config_path));
    adversary::AnalysisResult result = adversary::rank_links(view, cfg);

    std::string payload;
    if (!ground_truth_path.empty()) {
        auto gt = adversary::load_ground_truth(ground_truth_path);
        adversary::Metrics m = adversary::evaluate(result, gt);
        nlohmann::ordered_json j;
        j["hypotheses"] = nlohmann::ordered_json::parse(adversary::hypotheses_to_json(result));
        j["metrics"] = nlohmann::ordered_json::parse(adversary::metrics_to_json(m));
        payload = j.dump(2);
    } else {
        payload = adversary::hypotheses_to_json(result);
    }
    if (out_path.empty() || out_path == "-")
        std::cout << payload << "\n";
    else
        write_file(out_path, payload);
    return 0;
}

int run_report(const std::string& in_dir, const std::string& format) {
    Report rep = Report::from_json(read_file(fs::path(in_dir) / "report.json"));
    if (format == "json")
        std::cout << rep.to_json() << "\n";
    else
        std::cout << rep.to_table();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"artex-sim: deterministic ledger and anonymous RWA-exchange simulator"};
    app.require_subcommand(1);

    std::string config_path, scenario_name, out_dir = "out";
    std::optional<std::uint64_t> seed;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and write its artifacts");
    simulate->add_option("--config", config_path, "scenario config JSON");
    simulate->add_option("--scenario", scenario_name, "bundled scenario name");
    simulate->add_option("--seed", seed, "override the config seed");
    simulate->add_option("--out", out_dir, "output directory (default: out)");

    std::string dump_path, adv_config, ground_truth, analyze_out;
    auto* analyze = app.add_subcommand("analyze", "run the public-view adversary on a dump");
    analyze->add_option("--dump", dump_path, "ledger dump (ndjson)")->required();
    analyze->add_option("--config", adv_config, "scenario or heuristic config JSON");
    analyze->add_option("--ground-truth", ground_truth, "private ground truth for metrics");
    analyze->add_option("--out", analyze_out, "output path (default: stdout)");

    std::string report_dir, report_format = "table";
    auto* report = app.add_subcommand("report", "re-render a simulation report");
    report->add_option("--in", report_dir, "simulation output directory")->required();
    report->add_option("--format", report_format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* scenarios = app.add_subcommand("scenarios", "bundled scenario catalogue");
    auto* list = scenarios->add_subcommand("list", "list bundled scenarios");
    std::string show_name;
    auto* show = scenarios->add_subcommand("show", "print a bundled scenario config");
    show->add_option("--name", show_name, "scenario name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (config_path.empty() == scenario_name.empty()) {
                std::cerr << "error: pass exactly one of --config or --scenario\n";
                return kExitConfig;
            }
            return run_simulate(config_path, scenario_name, seed, out_dir);
        }
        if (analyze->parsed()) return run_analyze(dump_path, adv_config, ground_truth, analyze_out);
        if (report->parsed()) return run_report(report_dir, report_format);
        if (scenarios->parsed()) {
            if (list->parsed()) {
                for (const auto& s : bundled_scenarios())
                    std::cout << s.name << "  -  " << s.description << "\n";
                return 0;
            }
            if (show->parsed()) {
                const BundledScenario* s = find_scenario(show_name);
                if (!s) {
                    std::cerr << "error: unknown bundled scenario '" << show_name << "'\n";
                    return kExitConfig;
                }
                std::cout << s->config.to_json() << "\n";
                return 0;
            }
            std::cerr << "error: use 'scenarios list' or 'scenarios show --name <n>'\n";
            return kExitConfig;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == errc::scenario_aborted) return kExitAborted;
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
