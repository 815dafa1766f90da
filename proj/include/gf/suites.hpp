#pragma once

#include "gf/presets.hpp"

namespace gf {

/// one row of a verification suite: an identity or oracle check with its
/// measured residual and the tolerance it must meet
struct SuiteRow {
    std::string name;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    double seconds = 0;
};

struct SuiteResult {
    std::string id;
    std::vector<SuiteRow> rows;
    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

/// shipped verification fixtures (the curved/perturbed rank-2 metrics over a
/// 96-point torus curve used by the identity rows)
struct SuiteFixtures {
    std::unique_ptr<ChartGrid> torus;
    std::unique_ptr<MatrixField> h_curved;
    std::unique_ptr<FinslerMetricSpec> flat, curved, pert;
    double epsilon = 0.05;
};
SuiteFixtures make_suite_fixtures(double epsilon = 0.05);

/// Lemma-style identity rows: homogeneity, decomposition, pullback,
/// vertical-Psi, Psi cross-checks, pseudoconvexity scan. epsilon overrides the
/// perturbed family's default (the deliberate-failure fixture uses 0.5).
SuiteResult identity_suite(double epsilon = 0.05, uint64_t seed = 0x5eed5eedULL);

/// positivity rows: pseudoconvexity <-> fiberwise positivity equivalence,
/// Griffiths <-> one-one-form sign agreement, Mok-term identities, rescale
/// invariance, argmin re-evaluation
SuiteResult positivity_suite(uint64_t seed = 0x5eed5eedULL);

/// reduction oracles: flat/CP1 KR, flat HYM, scheme order, time reversal,
/// Finsler-HYM bridge at desk scale
SuiteResult reductions_suite(uint64_t seed = 0x5eed5eedULL);

SuiteResult run_suite(const std::string& id, double epsilon = 0.05,
                      uint64_t seed = 0x5eed5eedULL);

} // namespace gf
