#include "gf/presets.hpp"
#include "gf/snapshot.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gf {

using nlohmann::json;

const std::vector<ExperimentPreset>& preset_registry() {
    static const std::vector<ExperimentPreset> reg = {
        {"torus-hym-flat", "flat rank-2 bundle over the torus curve, HYM flow",
         "hym", 5e-4, 0.5, 50, 1e-5},
        {"curve-hym-semipositive",
         "rank-2 twisted bundle over the torus curve with Griffiths-semipositive "
         "initial curvature, HYM flow",
         "hym", 8e-5, 0.5, 250, 1e-5},
        {"torus-kr-flat", "flat 2-torus (complex dim 2), Kaehler-Ricci flow",
         "kr", 1e-3, 0.5, 50, 1e-5},
        {"cp1-kr", "CP^1 with the Fubini-Study metric, Kaehler-Ricci flow to collapse",
         "kr", 2e-5, 0.5, 2000, 1e-5},
        {"torus-finsler-flat", "flat Hermitian-induced metric, flow over P(E*)",
         "finsler", 7.8e-4, 0.3, 100, 1e-4},
        {"torus-finsler-semipositive",
         "semipositive twisted Hermitian-induced metric, flow over P(E*)",
         "finsler", 1.9e-4, 0.3, 250, 1e-4},
        {"maxp-stationary", "eta = 0.7 g, sigma = 0: stationary maximum-principle run",
         "maxprinciple", 1e-3, 0.5, 50, 1e-6},
        {"maxp-touching-zero", "eta = psi(z) g with psi >= 0 touching zero, sigma = 0",
         "maxprinciple", 1e-3, 0.5, 50, 1e-6},
        {"maxp-source-eta", "sigma = eta source", "maxprinciple", 1e-3, 0.5, 50, 1e-6},
        {"maxp-source-scale", "sigma = c(z) eta with bounded positive c",
         "maxprinciple", 1e-3, 0.5, 50, 1e-6},
        {"maxp-source-conj", "sigma = A eta A^dagger with a smooth matrix field A",
         "maxprinciple", 1e-3, 0.5, 50, 1e-6},
    };
    return reg;
}

const ExperimentPreset& find_preset(const std::string& id) {
    for (const auto& p : preset_registry())
        if (p.id == id) return p;
    fail("unknown preset id '" + id + "' (see `gflab presets` for the registry)");
}

MatrixField semipositive_h2(const ChartGrid& base, double amp, double offdiag) {
    MatrixField h(base, 2);
    int mi[2];
    for (std::size_t p = 0; p < base.points(); ++p) {
        base.unravel(p, mi);
        const double x = base.coord(0, mi[0]);
        const double y = base.coord(1, mi[1]);
        const double phi = amp * std::cos(2 * M_PI * x);
        h.entry(0, 0, p) = std::exp(-phi);
        h.entry(1, 1, p) = std::exp(phi);
        h.entry(0, 1, p) = offdiag * std::sin(2 * M_PI * y);
        h.entry(1, 0, p) = std::conj(h.entry(0, 1, p));
    }
    return h;
}

double semipositive_twist(const ChartGrid& base, const MatrixField& h, double margin) {
    ChernCurvatureField R = chern_curvature(h);
    MatrixField gb(base, 1);
    for (std::size_t p = 0; p < gb.npts(); ++p) gb.entry(0, 0, p) = 1.0;
    const PositivityReport rep = griffiths_min(R, h, gb);
    // adding c*h shifts the normalized Griffiths pairing by exactly c
    return -rep.min_value + margin;
}

namespace {

MatrixField const_metric(const ChartGrid& g, int r, double scale = 1.0) {
    MatrixField h(g, r);
    for (int i = 0; i < r; ++i)
        for (std::size_t p = 0; p < g.points(); ++p) h.entry(i, i, p) = scale;
    return h;
}

MatrixField fs_metric1(const ChartGrid& g) {
    MatrixField f(g, 1);
    int mi[2];
    for (std::size_t p = 0; p < g.points(); ++p) {
        g.unravel(p, mi);
        f.entry(0, 0, p) = 1.0 / sqr(1.0 + std::norm(g.zof(mi, 0)));
    }
    return f;
}

double touching_zero_psi(const ChartGrid& g, std::size_t p) {
    int mi[4];
    g.unravel(p, mi);
    return 1.0 - 0.25 * (std::cos(2 * M_PI * g.coord(0, mi[0])) +
                         std::cos(2 * M_PI * g.coord(1, mi[1])) +
                         std::cos(2 * M_PI * g.coord(2, mi[2])) +
                         std::cos(2 * M_PI * g.coord(3, mi[3])));
}

} // namespace

std::unique_ptr<RunContext> build_preset(const std::string& id, uint64_t seed) {
    (void)seed;  // all presets are deterministic; the seed feeds probes only
    auto ctx = std::make_unique<RunContext>();
    ctx->preset = find_preset(id);
    using Family = FinslerMetricSpec::Family;

    if (id == "torus-hym-flat") {
        ctx->base = std::make_unique<ChartGrid>(make_torus_chart(1, 16, "torus16"));
        ctx->hym = std::make_unique<HymFlow>(*ctx->base, const_metric(*ctx->base, 2));
    } else if (id == "curve-hym-semipositive") {
        ctx->base = std::make_unique<ChartGrid>(make_torus_chart(1, 48, "torus48"));
        MatrixField h0 = semipositive_h2(*ctx->base, 0.01, 0.002);
        const double twist = semipositive_twist(*ctx->base, h0, 5e-4);
        ctx->hym = std::make_unique<HymFlow>(*ctx->base, h0, twist);
        const PositivityReport pre = ctx->hym->probe();
        if (pre.min_value < 0)
            fail("curve-hym-semipositive: initial Griffiths min " +
                 std::to_string(pre.min_value) + " < 0");
    } else if (id == "torus-kr-flat") {
        ctx->base = std::make_unique<ChartGrid>(make_torus_chart(2, 8, "torus2x8"));
        ctx->kr = std::make_unique<KrFlow>(std::vector<const ChartGrid*>{ctx->base.get()},
                                           std::vector<MatrixField>{const_metric(*ctx->base, 2)});
    } else if (id == "cp1-kr") {
        ctx->atlas = std::make_unique<CP1Atlas>(make_cp1_atlas(33, 2));
        ctx->kr = std::make_unique<KrFlow>(
            std::vector<const ChartGrid*>{ctx->atlas->chart0.get(), ctx->atlas->chart1.get()},
            std::vector<MatrixField>{fs_metric1(*ctx->atlas->chart0),
                                     fs_metric1(*ctx->atlas->chart1)},
            &ctx->atlas->stitch);
    } else if (id == "torus-finsler-flat" || id == "torus-finsler-semipositive") {
        const bool flat = (id == "torus-finsler-flat");
        const int nbase = flat ? 16 : 32;
        const int nfiber = flat ? 16 : 24;
        ctx->base = std::make_unique<ChartGrid>(make_torus_chart(1, nbase, "fbase"));
        ctx->b0 = std::make_unique<ChartGrid>(make_bundle_chart(nbase, 1.25, nfiber, 2, "P0"));
        ctx->b1 = std::make_unique<ChartGrid>(make_bundle_chart(nbase, 1.25, nfiber, 2, "P1"));
        ctx->stitch = std::make_unique<Stitch>(make_bundle_stitch(*ctx->b0, *ctx->b1));
        MatrixField h0 = flat ? const_metric(*ctx->base, 2)
                              : semipositive_h2(*ctx->base, 0.01, 0.002);
        const double twist = flat ? 0.0 : semipositive_twist(*ctx->base, h0, 5e-4);
        ctx->spec = std::make_unique<FinslerMetricSpec>(
            make_finsler_spec(Family::HermitianInduced, *ctx->base, std::move(h0), 0.0, twist));
        ctx->finsler =
            std::make_unique<FinslerFlow>(*ctx->spec, *ctx->b0, *ctx->b1, *ctx->stitch);
        if (!flat) {
            const PositivityReport pre = ctx->finsler->probe();
            if (pre.min_value < -1e-8)
                fail("torus-finsler-semipositive: initial pencil min " +
                     std::to_string(pre.min_value) + " < 0");
        }
    } else if (id.rfind("maxp-", 0) == 0) {
        ctx->base = std::make_unique<ChartGrid>(make_torus_chart(2, 12, "mpbase"));
        const ChartGrid& g = *ctx->base;
        const std::size_t np = g.points();
        MatrixField eta(g, 2);
        SigmaSpec sg;
        if (id == "maxp-stationary") {
            eta = const_metric(g, 2, 0.7);
        } else {
            for (std::size_t p = 0; p < np; ++p) {
                const double v = touching_zero_psi(g, p);
                eta.entry(0, 0, p) = v;
                eta.entry(1, 1, p) = v;
            }
        }
        if (id == "maxp-source-eta") {
            sg.kind = SigmaSpec::Kind::ScaleField;
            sg.c = Field(g, 1);
            for (std::size_t p = 0; p < np; ++p) sg.c.at(0, p) = 1.0;
        } else if (id == "maxp-source-scale") {
            sg.kind = SigmaSpec::Kind::ScaleField;
            sg.c = Field(g, 1);
            int mi[4];
            for (std::size_t p = 0; p < np; ++p) {
                g.unravel(p, mi);
                sg.c.at(0, p) = 0.5 + sqr(std::cos(2 * M_PI * g.coord(0, mi[0])));
            }
        } else if (id == "maxp-source-conj") {
            sg.kind = SigmaSpec::Kind::Conjugation;
            sg.A = MatrixField(g, 2);
            int mi[4];
            for (std::size_t p = 0; p < np; ++p) {
                g.unravel(p, mi);
                sg.A.entry(0, 0, p) = 1.0;
                sg.A.entry(1, 1, p) = 1.0;
                sg.A.entry(0, 1, p) =
                    0.3 * std::exp(cplx{0, 2 * M_PI * g.coord(0, mi[0])});
            }
        }
        ctx->maxp = std::make_unique<MaxPrincipleFlow>(g, std::move(eta), std::move(sg));
    } else {
        fail("unknown preset id '" + id + "'");
    }
    return ctx;
}

double RunContext::t() const {
    if (hym) return hym->t;
    if (kr) return kr->t;
    if (finsler) return finsler->t;
    return maxp->t;
}

double RunContext::min_spacing() const {
    const ChartGrid* g = hym || (kr && base) ? base.get()
                        : kr                 ? atlas->chart0.get()
                        : finsler            ? b0.get()
                                             : base.get();
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& ax : g->axes) mn = std::min(mn, ax.h);
    return mn;
}

void RunContext::step(double dt, Scheme s) {
    if (hym)
        hym->step(dt, s);
    else if (kr)
        kr->step(dt, s);
    else if (finsler)
        finsler->step(dt, s);
    else
        maxp->step(dt, s);
}

PositivityReport RunContext::probe() const {
    if (hym) return hym->probe();
    if (kr) return kr->probe();
    if (finsler) return finsler->probe();
    return maxp->probe();
}

void RunContext::save_final(const std::string& path) const {
    if (hym) {
        save_snapshot(path, {{"h", "ij~", &hym->h}});
    } else if (kr) {
        std::vector<SnapshotField> fs;
        for (std::size_t c = 0; c < kr->g.size(); ++c)
            fs.push_back({"g" + std::to_string(c), "ab~", &kr->g[c]});
        save_snapshot(path, fs);
    } else if (finsler) {
        // u is real; package as complex fields per chart
        Field u0(*finsler->chart[0], 1), u1(*finsler->chart[1], 1);
        for (std::size_t p = 0; p < u0.npts(); ++p) u0.at(0, p) = finsler->u[0][p];
        for (std::size_t p = 0; p < u1.npts(); ++p) u1.at(0, p) = finsler->u[1][p];
        save_snapshot(path, {{"u0", "scalar", &u0}, {"u1", "scalar", &u1}});
    } else {
        save_snapshot(path, {{"eta", "ab~", &maxp->eta}});
    }
}

FlowReport run_flow(const FlowConfig& cfg, const std::string& out_dir) {
    const auto wall0 = std::chrono::steady_clock::now();
    auto ctx = build_preset(cfg.preset, cfg.seed);
    const ExperimentPreset& pre = ctx->preset;

    FlowReport rep;
    rep.preset = cfg.preset;
    rep.monitor_tolerance = pre.monitor_tolerance;
    const double dt = cfg.dt > 0 ? cfg.dt : pre.dt;
    const double t_end = cfg.t_end > 0 ? cfg.t_end : pre.t_end;
    const int monitor_every = cfg.monitor_every > 0 ? cfg.monitor_every : pre.monitor_every;
    if (dt <= 0) fail("run_flow: dt must be positive");
    const double guard = cfg.cfl_coefficient * sqr(ctx->min_spacing());
    if (dt > guard + 1e-15)
        fail("run_flow: dt " + std::to_string(dt) + " violates the diffusive guard " +
             std::to_string(guard) + " (cfl_coefficient * min_spacing^2)");

    const auto record = [&](double at_t) {
        PositivityReport pr = ctx->probe();
        MonitorRow row{at_t, pr.min_value,
                       pr.argmin_index + static_cast<std::size_t>(pr.argmin_chart) * 1000000000ull,
                       pr.field_scale, dt};
        rep.rows.push_back(row);
        rep.min_over_run = std::min(rep.min_over_run, pr.min_value);
    };

    record(0.0);
    try {
        int k = 0;
        while (ctx->t() < t_end - 1e-12) {
            const double step_dt = std::min(dt, t_end - ctx->t());
            ctx->step(step_dt, cfg.scheme);
            ++rep.steps;
            ++k;
            if (k % monitor_every == 0) record(ctx->t());
        }
        if (rep.steps % monitor_every != 0) record(ctx->t());
        rep.stop_reason = "completed";
    } catch (const FlowHalt& h) {
        rep.stop_reason = h.reason;
        rep.halt_detail = h.detail;
    }
    rep.stop_time = ctx->t();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        {
            json jc;
            jc["schema_version"] = 1;
            jc["preset"] = cfg.preset;
            jc["scheme"] = cfg.scheme == Scheme::Rk4 ? "rk4" : "euler";
            jc["dt"] = dt;
            jc["t_end"] = t_end;
            jc["monitor_every"] = monitor_every;
            jc["seed"] = cfg.seed;
            std::ofstream(out_dir + "/config.json") << jc.dump(2) << "\n";
        }
        {
            std::ofstream csv(out_dir + "/monitor.csv");
            csv << "t,min_value,argmin_index,field_scale,dt\n";
            char buf[256];
            for (const auto& r : rep.rows) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%.17g\n", r.t,
                              r.min_value, r.argmin_index, r.field_scale, r.dt);
                csv << buf;
            }
        }
        {
            json js;
            js["schema_version"] = 1;
            js["preset"] = cfg.preset;
            js["stop_reason"] = rep.stop_reason;
            js["halt_detail"] = rep.halt_detail;
            js["stop_time"] = rep.stop_time;
            js["steps"] = rep.steps;
            js["wall_seconds"] = rep.wall_seconds;
            js["seed"] = cfg.seed;
            js["min_over_run"] = rep.min_over_run;
            js["monitor_rows"] = rep.rows.size();
            std::ofstream(out_dir + "/summary.json") << js.dump(2) << "\n";
        }
        ctx->save_final(out_dir + "/final.snap");
    }
    return rep;
}

} // namespace gf
