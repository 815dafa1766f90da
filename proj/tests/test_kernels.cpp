#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gf/core.hpp"
#include "gf/kernels.hpp"

#include <cstring>
#include <vector>

using namespace gf;
namespace K = gf::kernels;

namespace {

std::vector<double> random_array(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-3.0, 3.0);
    return v;
}

} // namespace

// The AVX2 variants must reproduce the scalar reference bit-for-bit: the
// element-wise kernels carry the determinism guarantee of the whole lab.
TEST_CASE("avx2 kernels match scalar bitwise") {
    if (!K::avx2_supported()) {
        MESSAGE("avx2 not available; equivalence covered by scalar-only run");
        return;
    }
    const auto& S = K::scalar();
    const auto& V = K::avx2();
    Rng rng(42);

    SUBCASE("combine") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 64 + static_cast<std::size_t>(rng.uniform(0, 200));
            const std::size_t pad = 32;
            auto in = random_array(rng, n + 2 * pad);
            std::vector<double> out_s(n, 0), out_v(n, 0);
            const int k = 2 + static_cast<int>(rng.uniform(0, 3.9));
            std::vector<std::ptrdiff_t> off(k);
            std::vector<double> c(k);
            for (int j = 0; j < k; ++j) {
                off[j] = static_cast<std::ptrdiff_t>(rng.uniform(-double(pad), double(pad)));
                c[j] = rng.uniform(-2, 2);
            }
            S.combine(in.data() + pad, out_s.data(), n, off.data(), c.data(), k);
            V.combine(in.data() + pad, out_v.data(), n, off.data(), c.data(), k);
            CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);
            // differenced form: constant input gives exactly zero
            std::vector<double> ones(n + 2 * pad, 3.7);
            S.combine(ones.data() + pad, out_s.data(), n, off.data(), c.data(), k);
            for (double x : out_s) CHECK(x == 0.0);
        }
    }

    SUBCASE("axpy / axpby") {
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 33 + static_cast<std::size_t>(rng.uniform(0, 150));
            auto x = random_array(rng, n);
            auto y1 = random_array(rng, n);
            auto y2 = y1;
            const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
            S.axpy(a, x.data(), y1.data(), n);
            V.axpy(a, x.data(), y2.data(), n);
            CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);
            S.axpby(a, x.data(), b, y1.data(), n);
            V.axpby(a, x.data(), b, y2.data(), n);
            CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);
        }
    }

    SUBCASE("holo_combine") {
        const std::size_t nc = 257;
        auto dx = random_array(rng, 2 * nc);
        auto dy = random_array(rng, 2 * nc);
        std::vector<double> o1(2 * nc), o2(2 * nc);
        for (int sign : {-1, +1}) {
            S.holo_combine(dx.data(), dy.data(), o1.data(), nc, sign);
            V.holo_combine(dx.data(), dy.data(), o2.data(), nc, sign);
            CHECK(std::memcmp(o1.data(), o2.data(), 2 * nc * sizeof(double)) == 0);
        }
    }

    SUBCASE("max_abs2 and find_nonfinite") {
        const std::size_t nc = 511;
        auto d = random_array(rng, 2 * nc);
        CHECK(S.max_abs2(d.data(), nc) == V.max_abs2(d.data(), nc));
        CHECK(S.find_nonfinite(d.data(), 2 * nc) == K::npos);
        CHECK(V.find_nonfinite(d.data(), 2 * nc) == K::npos);
        d[731] = std::numeric_limits<double>::quiet_NaN();
        CHECK(S.find_nonfinite(d.data(), 2 * nc) == 731);
        CHECK(V.find_nonfinite(d.data(), 2 * nc) == 731);
        d[12] = std::numeric_limits<double>::infinity();
        CHECK(V.find_nonfinite(d.data(), 2 * nc) == 12);
    }
}

TEST_CASE("holo_combine semantics") {
    const auto& A = K::active();
    // d/dz of f with fx = 2, fy = 2i gives (2 - i*2i)/2 = 2
    double dx[2] = {2.0, 0.0}, dy[2] = {0.0, 2.0}, out[2];
    A.holo_combine(dx, dy, out, 1, -1);
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(0.0));
    A.holo_combine(dx, dy, out, 1, +1);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(0.0));
}

TEST_CASE("fused bundle sweeps match between variants bitwise") {
    if (!K::avx2_supported()) return;
    const auto& S = K::scalar();
    const auto& V = K::avx2();
    Rng rng(77);
    const std::size_t n = 83;
    const std::size_t pad = 4000;
    std::vector<double> f(n + 2 * pad);
    for (auto& x : f) x = rng.uniform(-2, 2);
    std::ptrdiff_t xo[5], yo[5];
    for (int k = -2; k <= 2; ++k) {
        xo[k + 2] = k * 601;
        yo[k + 2] = k * 113;
    }
    const std::ptrdiff_t swx = 29;
    std::vector<double> a1(n), a2(n), a3(n), a4(n), b1(n), b2(n), b3(n), b4(n);
    S.bundle_sweep1(f.data() + pad, a1.data(), a2.data(), a3.data(), a4.data(), n, xo, yo,
                    swx, 0.03, 0.13);
    V.bundle_sweep1(f.data() + pad, b1.data(), b2.data(), b3.data(), b4.data(), n, xo, yo,
                    swx, 0.03, 0.13);
    CHECK(std::memcmp(a1.data(), b1.data(), n * 8) == 0);
    CHECK(std::memcmp(a2.data(), b2.data(), n * 8) == 0);
    CHECK(std::memcmp(a3.data(), b3.data(), n * 8) == 0);
    CHECK(std::memcmp(a4.data(), b4.data(), n * 8) == 0);
    std::vector<double> gi(f.size());
    for (auto& x : gi) x = rng.uniform(-2, 2);
    S.bundle_sweep2(f.data() + pad, gi.data() + pad, a1.data(), a2.data(), n, xo, yo, 0.05);
    V.bundle_sweep2(f.data() + pad, gi.data() + pad, b1.data(), b2.data(), n, xo, yo, 0.05);
    CHECK(std::memcmp(a1.data(), b1.data(), n * 8) == 0);
    CHECK(std::memcmp(a2.data(), b2.data(), n * 8) == 0);
}
