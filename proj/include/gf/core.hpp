#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gf {

using cplx = std::complex<double>;

/// Error with location context. Every numeric failure names the offending
/// grid index or configuration key so runs are debuggable from the message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Deterministic 64-bit generator (splitmix64). Used for all sampling so
/// that runs reproduce bit-identically across platforms; std:: distributions
/// are avoided on purpose (their sequences are implementation-defined).
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// uniform in (0,1), never exactly 0
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// standard normal via Box-Muller (deterministic, no std::normal_distribution)
    double gaussian() {
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    cplx cgaussian() { return {gaussian(), gaussian()}; }
};

/// Halton low-discrepancy sequence value, index i >= 0, prime base b.
inline double halton(uint64_t i, uint32_t base) {
    double f = 1.0, r = 0.0;
    for (uint64_t n = i + 1; n > 0; n /= base) {
        f /= base;
        r += f * static_cast<double>(n % base);
    }
    return r;
}

inline double sqr(double x) { return x * x; }

} // namespace gf
