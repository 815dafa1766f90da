#pragma once

#include "gf/atlas.hpp"
#include "gf/curvature.hpp"
#include "gf/finsler.hpp"

namespace gf {

/// thrown when a run must stop (collapse, positivity loss); not a bug
struct FlowHalt {
    std::string reason;  // collapse | positivity_lost | pseudoconvexity_lost
    double t = 0;
    std::string detail;
};

enum class Scheme { Euler, Rk4 };

/// Hermitian-Yang-Mills flow dh/dt = -Lambda_g R_eff[h] - (r-1) h on a torus
/// curve with constant base metric g and twist constant c (R_eff = R + c h).
struct HymFlow {
    const ChartGrid* base = nullptr;
    MatrixField h;
    double twist = 0;
    double gconst = 1.0;
    double t = 0;
    int steps = 0;

    HymFlow(const ChartGrid& g, MatrixField h0, double twist_c = 0, double gc = 1.0);
    void rhs(const MatrixField& y, MatrixField& out) const;
    void step(double dt, Scheme s);
    PositivityReport probe() const;  // griffiths min of R_eff against (h, g)
};

/// Kaehler-Ricci flow dg/dt = -(Ric + (n-1) g), single torus chart or a
/// two-chart CP^1 atlas (stitch != nullptr)
struct KrFlow {
    std::vector<const ChartGrid*> charts;
    const Stitch* stitch = nullptr;
    std::vector<MatrixField> g;
    double t = 0;
    int steps = 0;
    // Collapse stop: min det(g)/det(g0) below this ratio. The linearized
    // flow has diffusivity ~ 1/g, so explicit stepping is stable only while
    // dt <~ h^2 * g_min; a 1e-3 ratio keeps the whole run stable at fixed dt
    // and still locates the FS collapse time within +-0.02.
    double det_ratio_halt = 1e-3;
    std::vector<double> det0;  // initial min determinant per chart

    KrFlow(std::vector<const ChartGrid*> ch, std::vector<MatrixField> g0,
           const Stitch* st = nullptr);
    void rhs(const std::vector<MatrixField>& y, std::vector<MatrixField>& out) const;
    void step(double dt, Scheme s);  // throws FlowHalt on collapse
    PositivityReport probe() const;  // bisectional min over all charts
    double min_det_ratio() const;
};

/// The flow over P(E*) for a torus curve base and trivial rank-2 bundle:
/// u = log(G/G0) evolves by du/dt = tr_omega(-Psi[G]) + (r-1), with Psi
/// recomputed each stage from the fiber/base Hessians of u + log G0 on the
/// product grid (torus x two CP^1-style fiber charts). Twisted metrics keep
/// only the periodic part here; the twist constant shifts -Psi.
struct FinslerFlow {
    const FinslerMetricSpec* spec0 = nullptr;  // initial Hermitian-induced data
    const ChartGrid* chart[2] = {nullptr, nullptr};
    const Stitch* stitch = nullptr;
    double gconst = 1.0;
    double t = 0;
    int steps = 0;

    std::vector<double> u[2];      // evolving payload per chart
    std::vector<double> logG0[2];  // log G0 at every grid point (analytic)
    // fiber-plane classification: 0 = edge rows (never computed),
    // 1 = interior, 2 = interior and owned
    std::vector<uint8_t> plane_class[2];
    // persistent step scratch (k-stages keep zeros outside the interior)
    std::vector<double> kbuf[2][4], tbuf[2];

    FinslerFlow(const FinslerMetricSpec& s0, const ChartGrid& c0, const ChartGrid& c1,
                const Stitch& st, double gc = 1.0);
    /// du/dt at owned points (zero elsewhere); throws FlowHalt when the fiber
    /// Hessian loses positivity
    void rhs(const std::vector<double> y[2], std::vector<double> out[2]) const;
    void step(double dt, Scheme s);
    /// min over owned points of the pencil eigenvalue of sqrt(-1) ddbar log G
    /// against Omega (horizontal-frame blocks: min((-Psi)/g, 1))
    PositivityReport probe() const;
    /// max |u_chart0 - u_chart1| over the overlap band (transition-mapped)
    double stitching_inconsistency() const;
    /// max |u - log(G_h / G0)| over owned points for a Hermitian metric h on E
    double compare_to_hym(const MatrixField& ht) const;
    /// max relative deviation of e^u G0 from the best Hermitian quadratic in v
    /// on the fiber over one base node
    double quadratic_fit_residual(std::size_t base_node) const;
};

/// sigma source catalog for the maximum-principle simulator; every member
/// satisfies the null eigenvector assumption by construction
struct SigmaSpec {
    enum class Kind { None, ScaleField, Conjugation } kind = Kind::None;
    Field c;        // scalar field (ScaleField)
    MatrixField A;  // matrix field (Conjugation: sigma = A eta A^dagger)
};

/// d eta/dt = Delta_omega eta + sigma on a flat torus (connection terms vanish)
struct MaxPrincipleFlow {
    const ChartGrid* base = nullptr;
    MatrixField eta;
    SigmaSpec sigma;
    double t = 0;
    int steps = 0;

    MaxPrincipleFlow(const ChartGrid& g, MatrixField eta0, SigmaSpec sg);
    void rhs(const MatrixField& y, MatrixField& out) const;
    void step(double dt, Scheme s);
    /// min eigenvalue of eta against the flat metric, over the grid
    PositivityReport probe() const;
};

/// one monitor line of a run (the CSV row schema)
struct MonitorRow {
    double t = 0;
    double min_value = 0;
    std::size_t argmin_index = 0;
    double field_scale = 0;
    double dt = 0;
};

} // namespace gf
