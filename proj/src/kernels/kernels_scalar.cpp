#include "gf/kernels.hpp"

#include <cmath>

// Reference kernels. These define the semantics; the SIMD variants must
// reproduce them bit-for-bit (see test_kernels).

namespace gf::kernels {
namespace {

void combine_scalar(const double* in, double* out, std::size_t n,
                    const std::ptrdiff_t* off, const double* c, int k) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += c[j] * (in[i + off[j]] - in[i]);
        out[i] = acc;
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void holo_scalar(const double* dx, const double* dy, double* out, std::size_t ncplx, int sign) {
    const double s = static_cast<double>(sign);
    for (std::size_t i = 0; i < ncplx; ++i) {
        const double xr = dx[2 * i], xi = dx[2 * i + 1];
        const double yr = dy[2 * i], yi = dy[2 * i + 1];
        // 0.5*(dx + sign*i*dy)
        out[2 * i] = 0.5 * (xr - s * yi);
        out[2 * i + 1] = 0.5 * (xi + s * yr);
    }
}

double max_abs2_scalar(const double* data, std::size_t ncplx) {
    double m = 0.0;
    for (std::size_t i = 0; i < ncplx; ++i) {
        const double a2 = data[2 * i] * data[2 * i] + data[2 * i + 1] * data[2 * i + 1];
        if (a2 > m) m = a2;
    }
    return m;
}

std::size_t find_nonfinite_scalar(const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(data[i])) return i;
    return npos;
}

void bundle_sweep1_scalar(const double* f, double* fzz, double* fww, double* fwre,
                          double* fwim, std::size_t n, const std::ptrdiff_t* xo,
                          const std::ptrdiff_t* yo, std::ptrdiff_t swx, double hx,
                          double hw) {
    const double a0x = -1.0 / (12 * hx * hx), a1x = 16.0 / (12 * hx * hx);
    const double a0w = -1.0 / (12 * hw * hw), a1w = 16.0 / (12 * hw * hw);
    const double c1w = 1.0 / (12 * hw);
    for (std::size_t i = 0; i < n; ++i) {
        const double fc = f[i];
        const double dxx = a0x * ((f[i + xo[0]] - fc) + (f[i + xo[4]] - fc)) +
                           a1x * ((f[i + xo[1]] - fc) + (f[i + xo[3]] - fc));
        const double dyy = a0x * ((f[i + yo[0]] - fc) + (f[i + yo[4]] - fc)) +
                           a1x * ((f[i + yo[1]] - fc) + (f[i + yo[3]] - fc));
        fzz[i] = 0.25 * (dxx + dyy);
        const double dww = a0w * ((f[i - 2 * swx] - fc) + (f[i + 2 * swx] - fc)) +
                           a1w * ((f[i - swx] - fc) + (f[i + swx] - fc));
        const double dvv = a0w * ((f[i - 2] - fc) + (f[i + 2] - fc)) +
                           a1w * ((f[i - 1] - fc) + (f[i + 1] - fc));
        fww[i] = 0.25 * (dww + dvv);
        fwre[i] = 0.5 * c1w * ((f[i + swx] - f[i - swx]) * 8.0 -
                               (f[i + 2 * swx] - f[i - 2 * swx]));
        fwim[i] = -0.5 * c1w * ((f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2]));
    }
}

void bundle_sweep2_scalar(const double* gr, const double* gi, double* zwre, double* zwim,
                          std::size_t n, const std::ptrdiff_t* xo, const std::ptrdiff_t* yo,
                          double hx) {
    const double c1x = 1.0 / (12 * hx);
    for (std::size_t i = 0; i < n; ++i) {
        const double are =
            c1x * ((gr[i + xo[3]] - gr[i + xo[1]]) * 8.0 - (gr[i + xo[4]] - gr[i + xo[0]]));
        const double aim =
            c1x * ((gi[i + xo[3]] - gi[i + xo[1]]) * 8.0 - (gi[i + xo[4]] - gi[i + xo[0]]));
        const double bre =
            c1x * ((gr[i + yo[3]] - gr[i + yo[1]]) * 8.0 - (gr[i + yo[4]] - gr[i + yo[0]]));
        const double bim =
            c1x * ((gi[i + yo[3]] - gi[i + yo[1]]) * 8.0 - (gi[i + yo[4]] - gi[i + yo[0]]));
        zwre[i] = 0.5 * (are - bim);
        zwim[i] = 0.5 * (aim + bre);
    }
}

} // namespace

const Ops& scalar() {
    static const Ops ops = {combine_scalar, axpy_scalar, axpby_scalar,
                            holo_scalar, max_abs2_scalar, find_nonfinite_scalar,
                            bundle_sweep1_scalar, bundle_sweep2_scalar,
                            "scalar"};
    return ops;
}

} // namespace gf::kernels
