#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "retroforecast/procgen.hpp"
#include "retroforecast/rng.hpp"

namespace {

// Independent straight-line re-simulation of the Case A recurrence with the
// same documented draw order (one normal per step, 100-step burn-in).
std::vector<double> case_a_reference(size_t T, uint64_t seed, const rf::CaseAParams& p) {
    rf::RngStream rng = rf::RngStream::derive(seed, "case_a");
    std::vector<double> out;
    double s = 0.0;
    for (size_t t = 0; t < 100 + T; ++t) {
        if (t > 0) {
            const double eps = rng.normal();
            s = p.alpha * std::tanh(s) + p.gamma_q * s * s + p.gamma_c * s * s * s +
                (p.sigma0 + p.sigma1 * std::fabs(s)) * eps;
        }
        if (t >= 100) out.push_back(s);
    }
    return out;
}

double variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("case A matches an independent re-simulation") {
    const rf::TimeSeries s = rf::gen_case_a(10000, 42);
    const std::vector<double> ref = case_a_reference(10000, 42, rf::CaseAParams{});
    REQUIRE(s.values.size() == ref.size());
    CHECK(variance(s.values) == Catch::Approx(variance(ref)).margin(1e-12));
    // and the trajectory itself, not just its variance
    for (size_t i = 0; i < ref.size(); i += 997) CHECK(s.values[i] == ref[i]);
}

TEST_CASE("case A with zero dynamics and zero noise is all zeros") {
    rf::CaseAParams p;
    p.alpha = 0.0;
    p.gamma_q = 0.0;
    p.gamma_c = 0.0;
    p.sigma0 = 1e-300;  // sigma0 must stay positive
    p.sigma1 = 0.0;
    const rf::TimeSeries s = rf::gen_case_a(5, 7, p);
    REQUIRE(s.values.size() == 5);
    for (double v : s.values) CHECK(std::fabs(v) < 1e-290);
}

TEST_CASE("case B increments pass a normality moment check") {
    const size_t T = 20000;
    const rf::TimeSeries s = rf::gen_case_b(T, 42);
    REQUIRE(s.values[0] == 0.0);
    std::vector<double> inc;
    for (size_t i = 1; i < s.values.size(); ++i) inc.push_back(s.values[i] - s.values[i - 1]);
    double mean = 0.0;
    for (double v : inc) mean += v;
    mean /= static_cast<double>(inc.size());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : inc) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(inc.size());
    m3 /= static_cast<double>(inc.size());
    m4 /= static_cast<double>(inc.size());
    const double skew = m3 / std::pow(m2, 1.5);
    const double excess_kurtosis = m4 / (m2 * m2) - 3.0;
    CHECK(std::fabs(skew) < 0.05);
    CHECK(std::fabs(excess_kurtosis) < 0.1);
    CHECK(std::sqrt(m2) == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("case B with zero sigma is constant zero") {
    rf::CaseBParams p;
    p.sigma = 0.0;
    const rf::TimeSeries s = rf::gen_case_b(10, 3, p);
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("case B increment histogram is reversal-invariant") {
    const rf::TimeSeries s = rf::gen_case_b(5000, 11);
    std::multiset<double> fwd, bwd;
    for (size_t i = 1; i < s.values.size(); ++i) fwd.insert(s.values[i] - s.values[i - 1]);
    std::vector<double> rev(s.values.rbegin(), s.values.rend());
    for (size_t i = 1; i < rev.size(); ++i) bwd.insert(-(rev[i] - rev[i - 1]));
    CHECK(fwd == bwd);
}

TEST_CASE("case C shot frequency is near p_shot") {
    // Count jumps with an independent re-simulation of the documented draw
    // order (bernoulli, optional exponential, observation normal per step).
    const size_t T = 20000;
    const rf::CaseCParams p;
    rf::RngStream rng = rf::RngStream::derive(42, "case_c");
    size_t jumps = 0, steps = 0;
    double x = 0.0;
    std::vector<double> ref;
    for (size_t t = 0; t < 100 + T; ++t) {
        if (t > 0) {
            double jump = 0.0;
            if (rng.bernoulli(p.p_shot)) {
                jump = rng.exponential(p.shot_scale);
                if (t >= 100) ++jumps;
            }
            if (t >= 100) ++steps;
            x = p.decay * x + jump;
        }
        const double s = x + p.sigma_obs * rng.normal();
        if (t >= 100) ref.push_back(s);
    }
    const rf::TimeSeries s = rf::gen_case_c(T, 42);
    REQUIRE(s.values.size() == ref.size());
    for (size_t i = 0; i < ref.size(); i += 1031) CHECK(s.values[i] == ref[i]);

    const double freq = static_cast<double>(jumps) / static_cast<double>(steps);
    const double se = std::sqrt(p.p_shot * (1.0 - p.p_shot) / static_cast<double>(steps));
    CHECK(std::fabs(freq - p.p_shot) < 3.0 * se);
}

TEST_CASE("case C latent stays nonnegative without observation noise") {
    rf::CaseCParams p;
    p.sigma_obs = 0.0;
    const rf::TimeSeries s = rf::gen_case_c(5000, 17, p);
    for (double v : s.values) REQUIRE(v >= 0.0);
}

TEST_CASE("case C with no shots and no noise is all zero") {
    rf::CaseCParams p;
    p.p_shot = 0.0;
    p.sigma_obs = 0.0;
    const rf::TimeSeries s = rf::gen_case_c(64, 5, p);
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("case D hits the sine peak without noise") {
    rf::CaseDParams p;
    p.sigma = 0.0;
    const rf::TimeSeries s = rf::gen_case_d(64, 9, p);
    CHECK(s.values[p.period / 4] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("case D without noise is exactly periodic") {
    rf::CaseDParams p;
    p.sigma = 0.0;
    const size_t T = 400;
    const rf::TimeSeries s = rf::gen_case_d(T, 1, p);
    for (size_t t = 0; t + p.period < T; ++t)
        REQUIRE(std::fabs(s.values[t + p.period] - s.values[t]) < 1e-12);

    // lag-P autocorrelation of the noiseless series
    double mean = 0.0;
    for (double v : s.values) mean += v;
    mean /= static_cast<double>(T);
    double num = 0.0, den = 0.0;
    for (size_t t = 0; t + p.period < T; ++t)
        num += (s.values[t] - mean) * (s.values[t + p.period] - mean);
    for (size_t t = 0; t + p.period < T; ++t) den += (s.values[t] - mean) * (s.values[t] - mean);
    CHECK(num / den == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("generators reproduce byte-identical output") {
    for (char c : {'A', 'B', 'C', 'D'}) {
        const rf::TimeSeries s1 = rf::generate_case(c, 500, 42);
        const rf::TimeSeries s2 = rf::generate_case(c, 500, 42);
        REQUIRE(s1.values.size() == s2.values.size());
        for (size_t i = 0; i < s1.values.size(); ++i) REQUIRE(s1.values[i] == s2.values[i]);
    }
}

TEST_CASE("generator input validation") {
    CHECK_THROWS(rf::gen_case_a(0, 1));
    rf::CaseCParams bad;
    bad.p_shot = 1.5;
    CHECK_THROWS(rf::gen_case_c(10, 1, bad));
    rf::CaseDParams badd;
    badd.period = 1;
    CHECK_THROWS(rf::gen_case_d(10, 1, badd));
}
