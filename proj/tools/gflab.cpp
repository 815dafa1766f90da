// gflab: experiment runner for the geometric-flow laboratory.
//
// Verbs:
//   run      execute a preset (or config file) and write a run directory
//   suite    run a verification suite (identities | positivity | reductions)
//   plot     render a run CSV as an SVG
//   presets  list the preset registry
//
// Exit codes: 0 ok, 1 suite failure, 2 config error, 3 numeric halt,
//             4 positivity-monitor violation beyond tolerance.

#include <CLI11.hpp>
#include <json.hpp>

#include "gf/plot.hpp"
#include "gf/presets.hpp"
#include "gf/suites.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSuiteFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumericHalt = 3;
constexpr int kExitPositivity = 4;

gf::Scheme parse_scheme(const std::string& s) {
    if (s == "rk4") return gf::Scheme::Rk4;
    if (s == "euler") return gf::Scheme::Euler;
    gf::fail("config: unknown scheme '" + s + "' (euler | rk4)");
}

// fail-closed config file: unknown keys are errors, never ignored
gf::FlowConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) gf::fail("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        gf::fail("config: parse error in '" + path + "': " + e.what());
    }
    static const std::vector<std::string> known = {
        "schema_version", "preset", "scheme", "dt", "t_end", "monitor_every", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            gf::fail("config: unknown key '" + it.key() + "' in '" + path + "'");
    if (!j.contains("schema_version") || j["schema_version"] != 1)
        gf::fail("config: schema_version must be 1 in '" + path + "'");
    if (!j.contains("preset")) gf::fail("config: missing key 'preset' in '" + path + "'");
    gf::FlowConfig cfg;
    cfg.preset = j["preset"].get<std::string>();
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j["scheme"].get<std::string>());
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("t_end")) cfg.t_end = j["t_end"].get<double>();
    if (j.contains("monitor_every")) cfg.monitor_every = j["monitor_every"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    return cfg;
}

int cmd_run(const gf::FlowConfig& cfg, const std::string& out_dir) {
    gf::FlowReport rep;
    try {
        rep = gf::run_flow(cfg, out_dir);
    } catch (const gf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::cout << "preset " << rep.preset << ": " << rep.stop_reason << " at t=" << rep.stop_time
              << " after " << rep.steps << " steps (" << rep.wall_seconds << " s), min "
              << rep.min_over_run << "\n";
    if (!rep.halt_detail.empty()) std::cout << "  " << rep.halt_detail << "\n";
    if (rep.stop_reason != "completed") return kExitNumericHalt;
    if (rep.min_over_run < -rep.monitor_tolerance) {
        std::cout << "positivity monitor violated beyond tolerance " << rep.monitor_tolerance
                  << "\n";
        return kExitPositivity;
    }
    return kExitOk;
}

int cmd_suite(const std::string& id, double epsilon, uint64_t seed) {
    gf::SuiteResult res;
    try {
        res = gf::run_suite(id, epsilon, seed);
    } catch (const gf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::printf("%-62s %12s %10s  %s\n", ("suite " + res.id).c_str(), "residual",
                "tolerance", "status");
    for (const auto& r : res.rows)
        std::printf("%-62s %12.3e %10.1e  %s\n", r.name.c_str(), r.residual, r.tolerance,
                    r.pass ? "pass" : "FAIL");
    if (!res.all_pass()) {
        std::cout << "suite " << res.id << ": FAILURES\n";
        return kExitSuiteFail;
    }
    std::cout << "suite " << res.id << ": all pass\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gflab: geometric flows over projectivized bundles, at desk scale"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a preset and write a run directory");
    std::string preset, config_path, out_dir = "runs/out";
    std::string scheme = "rk4";
    double dt = -1, t_end = -1;
    int monitor_every = -1;
    uint64_t seed = 0x5eed5eedULL;
    run->add_option("--preset", preset, "preset id (see `presets`)");
    run->add_option("--config", config_path, "config JSON (schema-versioned, fail-closed)");
    run->add_option("--out", out_dir, "run directory");
    run->add_option("--t-end", t_end, "override end time");
    run->add_option("--dt", dt, "override time step");
    run->add_option("--scheme", scheme, "euler | rk4");
    run->add_option("--seed", seed, "sampling seed (recorded in the summary)");
    run->add_option("--monitor-every", monitor_every, "steps between positivity probes");

    auto* suite = app.add_subcommand("suite", "run a verification suite");
    std::string suite_id;
    double epsilon = 0.05;
    suite->add_option("id", suite_id, "identities | positivity | reductions")->required();
    suite->add_option("--epsilon", epsilon, "perturbed-family epsilon (0.5 breaks it)");
    suite->add_option("--seed", seed, "sampling seed");

    auto* plot = app.add_subcommand("plot", "render a run CSV as SVG");
    std::string csv_path, svg_path;
    plot->add_option("csv", csv_path, "monitor.csv path")->required();
    plot->add_option("svg", svg_path, "output SVG path")->required();

    auto* presets = app.add_subcommand("presets", "list the preset registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            gf::FlowConfig cfg;
            if (!config_path.empty())
                cfg = load_config(config_path);
            else if (!preset.empty())
                cfg.preset = preset;
            else
                gf::fail("run: one of --preset or --config is required");
            if (!preset.empty()) cfg.preset = preset;
            if (dt > 0) cfg.dt = dt;
            if (t_end > 0) cfg.t_end = t_end;
            if (monitor_every > 0) cfg.monitor_every = monitor_every;
            cfg.scheme = parse_scheme(scheme);
            cfg.seed = seed;
            return cmd_run(cfg, out_dir);
        }
        if (suite->parsed()) return cmd_suite(suite_id, epsilon, seed);
        if (plot->parsed()) {
            gf::plot_csv_to_svg(csv_path, svg_path);
            std::cout << "wrote " << svg_path << "\n";
            return kExitOk;
        }
        if (presets->parsed()) {
            for (const auto& p : gf::preset_registry())
                std::printf("%-28s %s\n", p.id.c_str(), p.description.c_str());
            return kExitOk;
        }
    } catch (const gf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
