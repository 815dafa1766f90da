// AVX2 kernel variants. This translation unit is the only one compiled with
// -mavx2; it must never be entered on machines without AVX2 (dispatch in
// kernels.cpp guards that). Multiplies and adds are kept as separate
// intrinsics -- no fused multiply-add -- so results match the scalar
// reference bit-for-bit.

#include "gf/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace gf::kernels {
namespace {

void combine_avx2(const double* in, double* out, std::size_t n,
                  const std::ptrdiff_t* off, const double* c, int k) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        const __m256d ctr = _mm256_loadu_pd(in + i);
        for (int j = 0; j < k; ++j) {
            const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(in + i + off[j]), ctr);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(c[j]), v));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += c[j] * (in[i + off[j]] - in[i]);
        out[i] = acc;
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                        _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i, t);
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void holo_avx2(const double* dx, const double* dy, double* out, std::size_t ncplx, int sign) {
    // out.re = 0.5*(dx.re - s*dy.im); out.im = 0.5*(dx.im + s*dy.re)
    const double s = static_cast<double>(sign);
    const __m256d half = _mm256_set1_pd(0.5);
    // per 4 doubles = 2 complex: lanes (re0, im0, re1, im1); swap pairs of dy and
    // apply alternating sign (-s, +s, -s, +s)
    const __m256d alt = _mm256_set_pd(s, -s, s, -s);
    std::size_t nd = 2 * ncplx, i = 0;
    for (; i + 4 <= nd; i += 4) {
        const __m256d vx = _mm256_loadu_pd(dx + i);
        const __m256d vy = _mm256_loadu_pd(dy + i);
        const __m256d vysw = _mm256_permute_pd(vy, 0x5); // (im0, re0, im1, re1)
        const __m256d t = _mm256_add_pd(vx, _mm256_mul_pd(alt, vysw));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(half, t));
    }
    for (; i + 2 <= nd; i += 2) {
        const double xr = dx[i], xi = dx[i + 1], yr = dy[i], yi = dy[i + 1];
        out[i] = 0.5 * (xr - s * yi);
        out[i + 1] = 0.5 * (xi + s * yr);
    }
}

double max_abs2_avx2(const double* data, std::size_t ncplx) {
    __m256d vm = _mm256_setzero_pd();
    std::size_t nd = 2 * ncplx, i = 0;
    for (; i + 4 <= nd; i += 4) {
        const __m256d v = _mm256_loadu_pd(data + i);
        const __m256d sq = _mm256_mul_pd(v, v);
        const __m256d sw = _mm256_permute_pd(sq, 0x5);
        vm = _mm256_max_pd(vm, _mm256_add_pd(sq, sw)); // abs2 duplicated in both lanes
    }
    double buf[4];
    _mm256_storeu_pd(buf, vm);
    double m = buf[0];
    for (int j = 1; j < 4; ++j)
        if (buf[j] > m) m = buf[j];
    for (; i + 2 <= nd; i += 2) {
        const double a2 = data[i] * data[i] + data[i + 1] * data[i + 1];
        if (a2 > m) m = a2;
    }
    return m;
}

std::size_t find_nonfinite_avx2(const double* data, std::size_t n) {
    // finite <=> |x| < inf; vectorized scan, scalar confirmation for the index
    std::size_t i = 0;
    const __m256d inf = _mm256_set1_pd(__builtin_inf());
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_and_pd(_mm256_loadu_pd(data + i), absmask);
        // NaN compares false with everything, so finite <=> v < inf
        const __m256d ok = _mm256_cmp_pd(v, inf, _CMP_LT_OQ);
        if (_mm256_movemask_pd(ok) != 0xf) {
            for (std::size_t j = i; j < i + 4; ++j)
                if (!std::isfinite(data[j])) return j;
        }
    }
    for (; i < n; ++i)
        if (!std::isfinite(data[i])) return i;
    return npos;
}

void bundle_sweep1_avx2(const double* f, double* fzz, double* fww, double* fwre,
                        double* fwim, std::size_t n, const std::ptrdiff_t* xo,
                        const std::ptrdiff_t* yo, std::ptrdiff_t swx, double hx,
                        double hw) {
    const double a0xs = -1.0 / (12 * hx * hx), a1xs = 16.0 / (12 * hx * hx);
    const double a0ws = -1.0 / (12 * hw * hw), a1ws = 16.0 / (12 * hw * hw);
    const double c1ws = 1.0 / (12 * hw);
    const __m256d a0x = _mm256_set1_pd(a0xs), a1x = _mm256_set1_pd(a1xs);
    const __m256d a0w = _mm256_set1_pd(a0ws), a1w = _mm256_set1_pd(a1ws);
    const __m256d quarter = _mm256_set1_pd(0.25);
    const __m256d chalf = _mm256_set1_pd(0.5 * c1ws);
    const __m256d cneg = _mm256_set1_pd(-0.5 * c1ws);
    const __m256d eight = _mm256_set1_pd(8.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d fc = _mm256_loadu_pd(f + i);
        const __m256d dxx = _mm256_add_pd(
            _mm256_mul_pd(a0x, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + xo[0]), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + xo[4]), fc))),
            _mm256_mul_pd(a1x, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + xo[1]), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + xo[3]), fc))));
        const __m256d dyy = _mm256_add_pd(
            _mm256_mul_pd(a0x, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + yo[0]), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + yo[4]), fc))),
            _mm256_mul_pd(a1x, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + yo[1]), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + yo[3]), fc))));
        _mm256_storeu_pd(fzz + i, _mm256_mul_pd(quarter, _mm256_add_pd(dxx, dyy)));
        const __m256d dww = _mm256_add_pd(
            _mm256_mul_pd(a0w, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i - 2 * swx), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + 2 * swx), fc))),
            _mm256_mul_pd(a1w, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i - swx), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + swx), fc))));
        const __m256d dvv = _mm256_add_pd(
            _mm256_mul_pd(a0w, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i - 2), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + 2), fc))),
            _mm256_mul_pd(a1w, _mm256_add_pd(
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i - 1), fc),
                                   _mm256_sub_pd(_mm256_loadu_pd(f + i + 1), fc))));
        _mm256_storeu_pd(fww + i, _mm256_mul_pd(quarter, _mm256_add_pd(dww, dvv)));
        const __m256d wdiff = _mm256_sub_pd(
            _mm256_mul_pd(eight, _mm256_sub_pd(_mm256_loadu_pd(f + i + swx),
                                               _mm256_loadu_pd(f + i - swx))),
            _mm256_sub_pd(_mm256_loadu_pd(f + i + 2 * swx),
                          _mm256_loadu_pd(f + i - 2 * swx)));
        _mm256_storeu_pd(fwre + i, _mm256_mul_pd(chalf, wdiff));
        const __m256d vdiff = _mm256_sub_pd(
            _mm256_mul_pd(eight, _mm256_sub_pd(_mm256_loadu_pd(f + i + 1),
                                               _mm256_loadu_pd(f + i - 1))),
            _mm256_sub_pd(_mm256_loadu_pd(f + i + 2), _mm256_loadu_pd(f + i - 2)));
        _mm256_storeu_pd(fwim + i, _mm256_mul_pd(cneg, vdiff));
    }
    if (i < n) {
        // tail via the exact scalar recurrence
        const double a0xd = a0xs, a1xd = a1xs, a0wd = a0ws, a1wd = a1ws, c1w = c1ws;
        for (; i < n; ++i) {
            const double fc = f[i];
            const double dxx = a0xd * ((f[i + xo[0]] - fc) + (f[i + xo[4]] - fc)) +
                               a1xd * ((f[i + xo[1]] - fc) + (f[i + xo[3]] - fc));
            const double dyy = a0xd * ((f[i + yo[0]] - fc) + (f[i + yo[4]] - fc)) +
                               a1xd * ((f[i + yo[1]] - fc) + (f[i + yo[3]] - fc));
            fzz[i] = 0.25 * (dxx + dyy);
            const double dww = a0wd * ((f[i - 2 * swx] - fc) + (f[i + 2 * swx] - fc)) +
                               a1wd * ((f[i - swx] - fc) + (f[i + swx] - fc));
            const double dvv = a0wd * ((f[i - 2] - fc) + (f[i + 2] - fc)) +
                               a1wd * ((f[i - 1] - fc) + (f[i + 1] - fc));
            fww[i] = 0.25 * (dww + dvv);
            fwre[i] = 0.5 * c1w * ((f[i + swx] - f[i - swx]) * 8.0 -
                                   (f[i + 2 * swx] - f[i - 2 * swx]));
            fwim[i] = -0.5 * c1w * ((f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2]));
        }
    }
}

void bundle_sweep2_avx2(const double* gr, const double* gi, double* zwre, double* zwim,
                        std::size_t n, const std::ptrdiff_t* xo, const std::ptrdiff_t* yo,
                        double hx) {
    const double c1xs = 1.0 / (12 * hx);
    const __m256d c1x = _mm256_set1_pd(c1xs);
    const __m256d eight = _mm256_set1_pd(8.0);
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    const auto stencil = [&](const double* q, const std::ptrdiff_t* o) {
        return _mm256_mul_pd(
            c1x, _mm256_sub_pd(
                     _mm256_mul_pd(eight, _mm256_sub_pd(_mm256_loadu_pd(q + i + o[3]),
                                                        _mm256_loadu_pd(q + i + o[1]))),
                     _mm256_sub_pd(_mm256_loadu_pd(q + i + o[4]),
                                   _mm256_loadu_pd(q + i + o[0]))));
    };
    for (; i + 4 <= n; i += 4) {
        const __m256d are = stencil(gr, xo);
        const __m256d aim = stencil(gi, xo);
        const __m256d bre = stencil(gr, yo);
        const __m256d bim = stencil(gi, yo);
        _mm256_storeu_pd(zwre + i, _mm256_mul_pd(half, _mm256_sub_pd(are, bim)));
        _mm256_storeu_pd(zwim + i, _mm256_mul_pd(half, _mm256_add_pd(aim, bre)));
    }
    for (; i < n; ++i) {
        const double are =
            c1xs * ((gr[i + xo[3]] - gr[i + xo[1]]) * 8.0 - (gr[i + xo[4]] - gr[i + xo[0]]));
        const double aim =
            c1xs * ((gi[i + xo[3]] - gi[i + xo[1]]) * 8.0 - (gi[i + xo[4]] - gi[i + xo[0]]));
        const double bre =
            c1xs * ((gr[i + yo[3]] - gr[i + yo[1]]) * 8.0 - (gr[i + yo[4]] - gr[i + yo[0]]));
        const double bim =
            c1xs * ((gi[i + yo[3]] - gi[i + yo[1]]) * 8.0 - (gi[i + yo[4]] - gi[i + yo[0]]));
        zwre[i] = 0.5 * (are - bim);
        zwim[i] = 0.5 * (aim + bre);
    }
}

} // namespace

const Ops& avx2() {
    static const Ops ops = {combine_avx2, axpy_avx2, axpby_avx2,
                            holo_avx2, max_abs2_avx2, find_nonfinite_avx2,
                            bundle_sweep1_avx2, bundle_sweep2_avx2,
                            "avx2"};
    return ops;
}

} // namespace gf::kernels
