#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "payplace/cost_model.hpp"
#include "payplace/simulator.hpp"

namespace {

using namespace payplace;

std::optional<Scenario> builtin_scenario(const std::string& name) {
    if (name == "appendix_b") return appendix_b_scenario();
    if (name == "appendix_c") return appendix_c_scenario();
    if (auto p = policy_from_name(name)) return attack_scenario(*p);
    return std::nullopt;
}

Scenario load_scenario(const std::string& arg) {
    if (auto sc = builtin_scenario(arg)) return *sc;
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open scenario '" + arg + "' (not a builtin, not a readable file)");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("scenario '" + arg + "': " + e.what());
    }
    return scenario_from_json(j);
}

int write_or_print(const std::string& path, const std::string& data) {
    if (path.empty()) {
        std::cout << data;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write '" << path << "'\n";
        return 2;
    }
    out << data;
    return 0;
}

int cmd_run(const std::string& scenario_arg, const std::string& trace_path) {
    Scenario sc = load_scenario(scenario_arg);
    SimResult r = run(sc);
    if (int rc = write_or_print(trace_path, r.trace)) return rc;
    std::cerr << sc.name << ": " << r.notarizations << " notarizations, " << r.violations.size()
              << " probe violations\n";
    for (const auto& v : r.violations)
        std::cerr << "  tick " << v.tick << " [" << v.probe << "] " << v.detail << "\n";
    return r.violations.empty() ? 0 : 1;
}

int cmd_attacks(const std::string& report_path) {
    auto matrix = attack_suite();
    std::ostringstream out;
    out << "# payplace-attacks v1\n";
    std::size_t passed = 0;
    for (const auto& row : matrix) {
        out << std::left << std::setw(24) << policy_name(row.policy) << (row.pass ? "PASS" : "FAIL") << "\n";
        out << "    expected: " << row.expectation << "\n";
        out << "    observed: " << row.observed << "\n";
        if (row.pass) ++passed;
    }
    out << passed << "/" << matrix.size() << " policies behaved as expected\n";
    if (int rc = write_or_print(report_path, out.str())) return rc;
    std::cerr << passed << "/" << matrix.size() << " attack expectations held\n";
    return passed == matrix.size() ? 0 : 1;
}

std::vector<GridPoint> grid_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("grid '" + path + "': " + e.what());
    }
    if (!j.is_array()) throw std::runtime_error("grid '" + path + "': expected a JSON array of rows");
    std::vector<GridPoint> grid;
    for (const auto& row : j) {
        GridPoint pt;
        pt.series = row.value("series", "custom");
        pt.w.n = row.value("n", std::uint64_t{0});
        pt.w.p_r = row.value("p_r", std::uint64_t{0});
        pt.w.p_r_prev = row.value("p_r_prev", std::uint64_t{0});
        pt.w.c_u = row.value("c_u", std::uint64_t{0});
        pt.w.p_m = row.value("p_m", std::uint64_t{0});
        pt.w.p_m_prime = row.value("p_m_prime", std::uint64_t{0});
        pt.w.p_a = row.value("p_a", std::uint64_t{0});
        pt.w.p_x = row.value("p_x", std::uint64_t{0});
        pt.w.p_b = row.value("p_b", std::uint64_t{0});
        pt.w.p_w = row.value("p_w", std::uint64_t{0});
        pt.w.z_max = row.value("z_max", std::uint64_t{3000});
        pt.w.snark_ops = row.value("snark_ops", std::uint64_t{150000});
        grid.push_back(std::move(pt));
    }
    return grid;
}

int cmd_cost(int fig, const std::string& grid_path, const std::optional<WorkloadParams>& inline_row,
             const std::string& out_path) {
    std::vector<GridPoint> grid;
    if (!grid_path.empty()) {
        grid = grid_from_json(grid_path);
    } else if (inline_row) {
        grid.push_back({"inline", *inline_row});
    } else {
        switch (fig) {
            case 5: grid = fig5_grid(); break;
            case 6: grid = fig6_grid(); break;
            case 7: grid = fig7_grid(); break;
            default: std::cerr << "cost: pass --fig 5|6|7, --grid file, or an inline workload\n"; return 2;
        }
    }
    return write_or_print(out_path, sweep(grid));
}

int cmd_inspect(const std::string& trace_path, const std::string& actor, const std::string& action,
                std::uint64_t from, std::uint64_t to) {
    std::ifstream in(trace_path);
    if (!in) {
        std::cerr << "cannot open trace '" << trace_path << "'\n";
        return 2;
    }
    std::string line;
    std::size_t shown = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            std::cout << line << "\n";
            continue;
        }
        std::istringstream fields(line);
        std::string tick_s, actor_s, action_s;
        std::getline(fields, tick_s, '|');
        std::getline(fields, actor_s, '|');
        std::getline(fields, action_s, '|');
        std::uint64_t tick = std::stoull(tick_s);
        if (tick < from || tick > to) continue;
        if (!actor.empty() && actor_s != actor) continue;
        if (!action.empty() && action_s != action) continue;
        std::cout << line << "\n";
        ++shown;
    }
    std::cerr << shown << " matching events\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"payplace: deterministic marketplace payment simulator and cost model"};
    app.require_subcommand(1);

    std::string scenario_arg, trace_out;
    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and emit its event trace");
    run_cmd->add_option("--scenario", scenario_arg,
                        "builtin name (appendix_b, appendix_c, or an adversary policy) or a scenario JSON file")
        ->required();
    run_cmd->add_option("--trace", trace_out, "trace output path (default: standard output)");

    std::string report_out;
    auto* attacks_cmd = app.add_subcommand("attacks", "run every adversary policy against its expected outcome");
    attacks_cmd->add_option("--report", report_out, "report output path (default: standard output)");

    int fig = 0;
    std::string grid_path, cost_out;
    WorkloadParams inline_w;
    bool have_inline = false;
    auto* cost_cmd = app.add_subcommand("cost", "emit a gas/operation sweep as CSV");
    cost_cmd->add_option("--fig", fig, "builtin grid: 5 (off-chain ops), 6 (churn), 7 (volume)");
    cost_cmd->add_option("--grid", grid_path, "JSON array of workload rows");
    cost_cmd->add_option("--out", cost_out, "CSV output path (default: standard output)");
    auto inline_opt = [&](const char* name, std::uint64_t& slot) {
        cost_cmd->add_option_function<std::uint64_t>(
            name,
            [&have_inline, &slot](const std::uint64_t& v) {
                slot = v;
                have_inline = true;
            },
            "inline workload field");
    };
    inline_opt("--n", inline_w.n);
    inline_opt("--p_r", inline_w.p_r);
    inline_opt("--p_r_prev", inline_w.p_r_prev);
    inline_opt("--c_u", inline_w.c_u);
    inline_opt("--p_m", inline_w.p_m);
    inline_opt("--p_m_prime", inline_w.p_m_prime);
    inline_opt("--p_a", inline_w.p_a);
    inline_opt("--p_x", inline_w.p_x);
    inline_opt("--p_b", inline_w.p_b);
    inline_opt("--p_w", inline_w.p_w);

    std::string inspect_path, filter_actor, filter_action;
    std::uint64_t filter_from = 0, filter_to = UINT64_MAX;
    auto* inspect_cmd = app.add_subcommand("inspect", "filter a trace by actor, action, or tick range");
    inspect_cmd->add_option("--trace", inspect_path, "trace file to read")->required();
    inspect_cmd->add_option("--actor", filter_actor, "only events from this actor");
    inspect_cmd->add_option("--action", filter_action, "only events with this action");
    inspect_cmd->add_option("--from", filter_from, "first tick to include");
    inspect_cmd->add_option("--to", filter_to, "last tick to include");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(scenario_arg, trace_out);
        if (attacks_cmd->parsed()) return cmd_attacks(report_out);
        if (cost_cmd->parsed())
            return cmd_cost(fig, grid_path, have_inline ? std::optional<WorkloadParams>(inline_w) : std::nullopt,
                            cost_out);
        if (inspect_cmd->parsed())
            return cmd_inspect(inspect_path, filter_actor, filter_action, filter_from, filter_to);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
