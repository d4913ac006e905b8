// Seeded generators for the four synthetic benchmark processes.
//
// All four are driven by one RngStream derived from (seed, case tag), with a
// documented draw order per step, so a fixed seed reproduces the series
// byte-for-byte. Cases A and C discard a 100-step burn-in to drop the
// transient from the zero initial condition; B and D emit from t = 0.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rng.hpp"
#include "series.hpp"

namespace rf {

struct CaseAParams {
    double alpha = 0.7;
    double gamma_q = 0.05;
    double gamma_c = -0.08;
    double sigma0 = 0.3;
    double sigma1 = 0.35;

    void validate() const {
        if (!(sigma0 > 0.0) || !(sigma1 >= 0.0))
            throw std::invalid_argument("CaseAParams: need sigma0 > 0 and sigma1 >= 0");
    }
};

struct CaseBParams {
    double sigma = 0.50;
    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("CaseBParams: need sigma > 0");
    }
};

struct CaseCParams {
    double decay = 0.95;
    double p_shot = 0.04;
    double shot_scale = 1.5;
    double sigma_obs = 0.05;

    void validate() const {
        if (!(decay > 0.0 && decay < 1.0))
            throw std::invalid_argument("CaseCParams: need 0 < decay < 1");
        if (!(p_shot >= 0.0 && p_shot <= 1.0))
            throw std::invalid_argument("CaseCParams: need 0 <= p_shot <= 1");
        if (!(shot_scale > 0.0)) throw std::invalid_argument("CaseCParams: need shot_scale > 0");
    }
};

struct CaseDParams {
    double amplitude = 1.0;
    size_t period = 40;
    double sigma = 0.50;

    void validate() const {
        if (period < 2) throw std::invalid_argument("CaseDParams: need period >= 2");
        if (!(amplitude > 0.0)) throw std::invalid_argument("CaseDParams: need amplitude > 0");
    }
};

namespace detail {
constexpr size_t kBurnIn = 100;

inline void check_finite(double v, size_t t, const char* which) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("generation error: non-finite value in case ") +
                                 which + " at step " + std::to_string(t));
}
}  // namespace detail

// Dissipative nonlinear AR with state-dependent multiplicative noise.
// s_t = alpha*tanh(s_{t-1}) + gamma_q*s_{t-1}^2 + gamma_c*s_{t-1}^3
//       + (sigma0 + sigma1*|s_{t-1}|)*eps_t,  s_0 = 0; one normal per step.
inline TimeSeries gen_case_a(size_t T, uint64_t seed, const CaseAParams& p = {}) {
    if (T < 1) throw std::invalid_argument("gen_case_a: T >= 1 required");
    p.validate();
    RngStream rng = RngStream::derive(seed, "case_a");
    TimeSeries out;
    out.name = "case_A";
    out.seed = seed;
    out.values.reserve(T);
    double s = 0.0;
    const size_t total = detail::kBurnIn + T;
    for (size_t t = 0; t < total; ++t) {
        if (t > 0) {
            const double sigma = p.sigma0 + p.sigma1 * std::fabs(s);
            s = p.alpha * std::tanh(s) + p.gamma_q * s * s + p.gamma_c * s * s * s +
                sigma * rng.normal();
            detail::check_finite(s, t, "A");
        }
        if (t >= detail::kBurnIn) out.values.push_back(s);
    }
    return out;
}

// Symmetric Gaussian random walk, s_0 = 0; one normal per step (t >= 1).
inline TimeSeries gen_case_b(size_t T, uint64_t seed, const CaseBParams& p = {}) {
    if (T < 1) throw std::invalid_argument("gen_case_b: T >= 1 required");
    if (!(p.sigma >= 0.0)) throw std::invalid_argument("CaseBParams: sigma must be >= 0");
    RngStream rng = RngStream::derive(seed, "case_b");
    TimeSeries out;
    out.name = "case_B";
    out.seed = seed;
    out.values.reserve(T);
    double s = 0.0;
    out.values.push_back(s);
    for (size_t t = 1; t < T; ++t) {
        s += p.sigma * rng.normal();
        detail::check_finite(s, t, "B");
        out.values.push_back(s);
    }
    return out;
}

// Shot-noise relaxation: latent x_t = decay*x_{t-1} + A_t with exponential
// jumps at rate p_shot, observed through additive Gaussian noise.
// Draw order per step t >= 1: jump bernoulli, jump size (if any), obs normal.
// t = 0 draws the obs normal only (x_0 = 0).
inline TimeSeries gen_case_c(size_t T, uint64_t seed, const CaseCParams& p = {}) {
    if (T < 1) throw std::invalid_argument("gen_case_c: T >= 1 required");
    p.validate();
    RngStream rng = RngStream::derive(seed, "case_c");
    TimeSeries out;
    out.name = "case_C";
    out.seed = seed;
    out.values.reserve(T);
    double x = 0.0;
    const size_t total = detail::kBurnIn + T;
    for (size_t t = 0; t < total; ++t) {
        if (t > 0) {
            double jump = 0.0;
            if (rng.bernoulli(p.p_shot)) jump = rng.exponential(p.shot_scale);
            x = p.decay * x + jump;
        }
        const double s = x + p.sigma_obs * rng.normal();
        detail::check_finite(s, t, "C");
        if (t >= detail::kBurnIn) out.values.push_back(s);
    }
    return out;
}

// Noisy sinusoid, s_t = A*sin(2*pi*t/P) + sigma*eps_t for t = 0..T-1.
inline TimeSeries gen_case_d(size_t T, uint64_t seed, const CaseDParams& p = {}) {
    if (T < 1) throw std::invalid_argument("gen_case_d: T >= 1 required");
    p.validate();
    if (!(p.sigma >= 0.0)) throw std::invalid_argument("CaseDParams: sigma must be >= 0");
    RngStream rng = RngStream::derive(seed, "case_d");
    TimeSeries out;
    out.name = "case_D";
    out.seed = seed;
    out.values.reserve(T);
    const double two_pi = 2.0 * M_PI;
    for (size_t t = 0; t < T; ++t) {
        const double s = p.amplitude * std::sin(two_pi * static_cast<double>(t) /
                                                static_cast<double>(p.period)) +
                         p.sigma * rng.normal();
        detail::check_finite(s, t, "D");
        out.values.push_back(s);
    }
    return out;
}

inline TimeSeries generate_case(char which, size_t T, uint64_t seed) {
    switch (which) {
        case 'A': return gen_case_a(T, seed);
        case 'B': return gen_case_b(T, seed);
        case 'C': return gen_case_c(T, seed);
        case 'D': return gen_case_d(T, seed);
        default: throw std::invalid_argument(std::string("unknown case: ") + which);
    }
}

}  // namespace rf
