#pragma once

#include "gf/flows.hpp"

namespace gf {

struct ExperimentPreset {
    std::string id;
    std::string description;
    std::string kind;  // hym | kr | finsler | maxprinciple
    double dt = 0;
    double t_end = 0;
    int monitor_every = 0;
    double monitor_tolerance = 1e-5;  // tracked min below -tolerance = violation
};

/// closed registry: unknown ids are an error, never a guess
const std::vector<ExperimentPreset>& preset_registry();
const ExperimentPreset& find_preset(const std::string& id);

struct FlowConfig {
    std::string preset;
    Scheme scheme = Scheme::Rk4;
    double dt = -1;          // <= 0: preset default
    double t_end = -1;       // <= 0: preset default
    int monitor_every = -1;  // <= 0: preset default
    double cfl_coefficient = 0.2;
    uint64_t seed = 0x5eed5eedULL;
};

struct FlowReport {
    std::string preset;
    std::string stop_reason = "completed";  // completed | collapse | ...
    std::string halt_detail;
    double stop_time = 0;
    double wall_seconds = 0;
    int steps = 0;
    std::vector<MonitorRow> rows;
    double min_over_run = std::numeric_limits<double>::infinity();
    double monitor_tolerance = 1e-5;
};

/// Built experiment: geometry lives here so the flow objects stay valid.
struct RunContext {
    ExperimentPreset preset;
    std::unique_ptr<ChartGrid> base, b0, b1;
    std::unique_ptr<CP1Atlas> atlas;
    std::unique_ptr<Stitch> stitch;
    std::unique_ptr<FinslerMetricSpec> spec;
    std::unique_ptr<HymFlow> hym;
    std::unique_ptr<KrFlow> kr;
    std::unique_ptr<FinslerFlow> finsler;
    std::unique_ptr<MaxPrincipleFlow> maxp;

    double t() const;
    double min_spacing() const;
    void step(double dt, Scheme s);
    PositivityReport probe() const;
    void save_final(const std::string& path) const;
};
std::unique_ptr<RunContext> build_preset(const std::string& id, uint64_t seed);

/// run a configured experiment; writes config copy, monitor CSV, summary JSON
/// and a final field snapshot into out_dir (no files when out_dir is empty)
FlowReport run_flow(const FlowConfig& cfg, const std::string& out_dir);

/// semipositive rank-2 initial metric over the torus curve: periodic part
/// h-hat plus the twist constant that makes the Griffiths minimum of
/// R[h-hat] + c h-hat land at +margin (verified by the caller)
MatrixField semipositive_h2(const ChartGrid& base, double amp, double offdiag);
double semipositive_twist(const ChartGrid& base, const MatrixField& h, double margin);

} // namespace gf
