#pragma once

#include <cstddef>
#include <string>

namespace gf::kernels {

/// Inner-loop primitives behind the field calculus. Two implementations are
/// provided: a scalar reference and an AVX2 variant, selected once at runtime.
/// All element-wise kernels are bit-identical between variants (no FMA
/// contraction in the vector paths), which keeps runs reproducible regardless
/// of the machine the lab runs on; the equivalence test enforces this.
struct Ops {
    // out[i] = sum_k c[k] * (in[i + off[k]] - in[i])   (off in units of doubles).
    // The differenced form makes zero-sum stencils (all derivative stencils)
    // annihilate constant fields exactly in floating point.
    void (*combine)(const double* in, double* out, std::size_t n,
                    const std::ptrdiff_t* off, const double* c, int k);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[i] = a * x[i] + b * y[i]
    void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
    // out = 0.5*(dx -+ i*dy) over complex pairs; sign=-1 gives d/dz, +1 gives d/dzbar
    void (*holo_combine)(const double* dx, const double* dy, double* out,
                         std::size_t ncplx, int sign);
    // max over complex entries of re^2+im^2
    double (*max_abs2)(const double* data, std::size_t ncplx);
    // index of first non-finite double, or npos
    std::size_t (*find_nonfinite)(const double* data, std::size_t n);
    // fused P(E*) stencil sweeps over one contiguous fiber row (n points).
    // sweep1: fzz = ((d2x + d2y) f)/4, fww = ((d2wx + d2wy) f)/4,
    //         fwre = (dwx f)/2, fwim = -(dwy f)/2, with base offsets xo/yo
    //         (wrapped, in doubles) and fiber stride swx; coefficients are the
    //         differenced fourth-order stencils with spacings hx, hw.
    void (*bundle_sweep1)(const double* f, double* fzz, double* fww, double* fwre,
                          double* fwim, std::size_t n, const std::ptrdiff_t* xo,
                          const std::ptrdiff_t* yo, std::ptrdiff_t swx, double hx,
                          double hw);
    // sweep2: (zwre, zwim) = dzbar applied to the complex field (gr, gi) along
    // the base axes with offsets xo/yo
    void (*bundle_sweep2)(const double* gr, const double* gi, double* zwre, double* zwim,
                          std::size_t n, const std::ptrdiff_t* xo, const std::ptrdiff_t* yo,
                          double hx);
    const char* name;
};

/// Active implementation. Honors GF_KERNELS=scalar|avx2 for testing.
const Ops& active();
const Ops& scalar();
const Ops& avx2();      // valid to call only if avx2_supported()
bool avx2_supported();

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

} // namespace gf::kernels
