// Deterministic, splittable random streams.
//
// Generator: xoshiro256++ seeded through a splitmix64 chain. Substreams are
// derived by hashing (seed, tag, index...) with splitmix64, so any component
// can open an independent stream from a run seed plus a few integers without
// coordinating with other components. The integer sequence is exactly
// reproducible across platforms; floating-point draws use only basic
// arithmetic plus log/sqrt on top of it.
//
// Gaussian sampling uses the inverse CDF (Wichura's PPND16 rational
// approximation, |error| ~ 1e-15), one uniform draw per sample, so streams
// stay aligned no matter which distributions a consumer interleaves.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace rf {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Inverse standard normal CDF, Wichura AS241 (PPND16).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p outside (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

// One independent random stream. Copyable; state is four 64-bit words.
class RngStream {
public:
    RngStream() : RngStream(0) {}

    explicit RngStream(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Derive a stream from (seed, tag, indices...). Same arguments, same stream.
    static RngStream derive(uint64_t seed, std::string_view tag,
                            std::initializer_list<uint64_t> indices = {}) {
        uint64_t h = seed ^ 0x6a09e667f3bcc908ull;
        for (char c : tag) {
            h ^= static_cast<uint8_t>(c);
            splitmix64(h);
        }
        for (uint64_t ix : indices) {
            h ^= ix + 0x9e3779b97f4a7c15ull;
            splitmix64(h);
        }
        return RngStream(h);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1): never exactly 0 or 1.
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() { return inverse_normal_cdf(uniform01()); }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double mean) { return -mean * std::log(uniform01()); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Unbiased integer in [0, n) by rejection.
    uint64_t bounded(uint64_t n) {
        if (n == 0) throw std::domain_error("bounded: n must be positive");
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(i)]);
    }

    // k distinct indices from [0, n), returned in increasing order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        if (k > n) throw std::domain_error("sample_indices: k > n");
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + bounded(n - i)]);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace rf
