#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "retroforecast/rng.hpp"

using rf::RngStream;

TEST_CASE("inverse normal CDF matches reference values") {
    // Reference values computed with scipy.stats.norm.ppf (double precision).
    const std::vector<std::pair<double, double>> cases = {
        {1e-12, -7.0344838253011313},
        {1e-07, -5.1993375821928165},
        {1e-05, -4.2648907939228247},
        {0.001, -3.0902323061678132},
        {0.025, -1.9599639845400545},
        {0.1, -1.2815515655446004},
        {0.3, -0.52440051270804089},
        {0.5, 0.0},
        {0.7, 0.52440051270804067},
        {0.9, 1.2815515655446004},
        {0.975, 1.959963984540054},
        {0.999, 3.0902323061678132},
        {0.99999, 4.2648907939238407},
        {0.9999999, 5.1993375822906609},
    };
    for (const auto& [p, expected] : cases) {
        CAPTURE(p);
        CHECK(rf::inverse_normal_cdf(p) == Catch::Approx(expected).margin(1e-12));
    }
    CHECK_THROWS(rf::inverse_normal_cdf(0.0));
    CHECK_THROWS(rf::inverse_normal_cdf(1.0));
}

TEST_CASE("streams are deterministic and tag-separated") {
    RngStream a = RngStream::derive(42, "test", {1, 2});
    RngStream b = RngStream::derive(42, "test", {1, 2});
    RngStream c = RngStream::derive(42, "test", {1, 3});
    RngStream d = RngStream::derive(42, "other", {1, 2});
    bool all_equal = true, c_differs = false, d_differs = false;
    for (int i = 0; i < 64; ++i) {
        const uint64_t va = a.next_u64();
        all_equal &= (va == b.next_u64());
        c_differs |= (va != c.next_u64());
        d_differs |= (va != d.next_u64());
    }
    CHECK(all_equal);
    CHECK(c_differs);
    CHECK(d_differs);
}

TEST_CASE("uniform01 stays inside the open interval") {
    RngStream rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal draws have the right first moments") {
    RngStream rng(123);
    const int n = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        mean += x;
        m2 += x * x;
    }
    mean /= n;
    const double var = m2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("bounded and sample_indices behave") {
    RngStream rng(5);
    for (int i = 0; i < 1000; ++i) REQUIRE(rng.bounded(17) < 17);
    const auto idx = rng.sample_indices(100, 30);
    REQUIRE(idx.size() == 30);
    std::set<size_t> uniq(idx.begin(), idx.end());
    CHECK(uniq.size() == 30);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(*idx.rbegin() < 100);
}

TEST_CASE("exponential draws have the requested mean") {
    RngStream rng(11);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += rng.exponential(1.5);
    CHECK(acc / n == Catch::Approx(1.5).margin(0.02));
}
