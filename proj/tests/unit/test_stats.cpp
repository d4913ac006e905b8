#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "retroforecast/rng.hpp"
#include "retroforecast/stats.hpp"

namespace {

// Independent second implementation of the DM formula for cross-checking.
double dm_reference(const std::vector<double>& la, const std::vector<double>& lb, size_t h) {
    const size_t n = la.size();
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = la[i] - lb[i];
    double dbar = 0.0;
    for (double v : d) dbar += v;
    dbar /= n;
    double lrv = 0.0;
    for (size_t lag = 0; lag < h; ++lag) {
        double g = 0.0;
        for (size_t t = lag; t < n; ++t) g += (d[t] - dbar) * (d[t - lag] - dbar);
        g /= n;
        lrv += lag == 0 ? g : 2.0 * g;
    }
    const double stat = dbar / std::sqrt(lrv / n);
    const double nd = n, hd = h;
    return stat * std::sqrt((nd + 1.0 - 2.0 * hd + hd * (hd - 1.0) / nd) / nd);
}

}  // namespace

TEST_CASE("student t two-sided p matches scipy") {
    // scipy.stats.t.sf reference values
    CHECK(rf::student_t_two_sided_p(2.0, 9) == Catch::Approx(0.07655282377070094).epsilon(1e-10));
    CHECK(rf::student_t_two_sided_p(-1.5, 499) ==
          Catch::Approx(0.13424681348674289).epsilon(1e-10));
    CHECK(rf::student_t_two_sided_p(0.5, 30) == Catch::Approx(0.62072300488512733).epsilon(1e-10));
    CHECK(rf::student_t_two_sided_p(3.2, 99) ==
          Catch::Approx(0.0018470654744259581).epsilon(1e-9));
    CHECK(rf::student_t_two_sided_p(0.0, 5) == Catch::Approx(1.0));
    CHECK(rf::student_t_two_sided_p(1.717, 255) ==
          Catch::Approx(0.087193379994103121).epsilon(1e-9));
    CHECK(rf::student_t_two_sided_p(-22.9, 2900) < 1e-100);
}

TEST_CASE("rmse basics and hand-computed case") {
    rf::Matrix p(2, 2), t(2, 2);
    p(0, 0) = 1;
    p(0, 1) = 2;
    p(1, 0) = 3;
    p(1, 1) = 4;
    t = p;
    CHECK(rf::rmse(p, t).global == 0.0);

    for (size_t i = 0; i < t.size(); ++i) t.raw()[i] = p.raw()[i] - 2.0;
    CHECK(rf::rmse(p, t).global == Catch::Approx(2.0));

    // random 3x2: direct arithmetic
    rf::Matrix a(3, 2), b(3, 2);
    const double av[] = {0.3, -1.2, 0.7, 2.2, -0.4, 0.1};
    const double bv[] = {0.1, -0.9, 1.0, 2.0, -0.6, 0.4};
    for (int i = 0; i < 6; ++i) {
        a.raw()[i] = av[i];
        b.raw()[i] = bv[i];
    }
    double ss = 0.0;
    for (int i = 0; i < 6; ++i) ss += (av[i] - bv[i]) * (av[i] - bv[i]);
    const rf::RmseResult r = rf::rmse(a, b);
    CHECK(r.global == Catch::Approx(std::sqrt(ss / 6.0)).margin(1e-12));

    // per-horizon decomposition: global^2 == mean of per-horizon^2
    double acc = 0.0;
    for (double v : r.per_horizon) acc += v * v;
    CHECK(r.global * r.global == Catch::Approx(acc / r.per_horizon.size()).margin(1e-12));

    rf::Matrix wrong(2, 3);
    CHECK_THROWS(rf::rmse(a, wrong));
}

TEST_CASE("dm_test identity and degenerate cases") {
    std::vector<double> a(50, 1.0), b(50, 1.0);
    const rf::DmResult same = rf::dm_test(a, b, 4);
    CHECK(same.stat == 0.0);
    CHECK(same.p == 1.0);
    CHECK_FALSE(same.degenerate);

    for (double& v : a) v = 2.0;  // constant nonzero differential
    const rf::DmResult degen = rf::dm_test(a, b, 4);
    CHECK(degen.degenerate);
    CHECK(degen.p == 0.0);
}

TEST_CASE("dm_test matches an independently coded reference") {
    rf::RngStream rng(31);
    std::vector<double> la(500), lb(500);
    for (size_t i = 0; i < 500; ++i) {
        const double d = 0.5 + rng.normal();
        lb[i] = 1.0 + 0.1 * rng.normal();
        la[i] = lb[i] + d;
    }
    const rf::DmResult r = rf::dm_test(la, lb, 1);
    const double ref = dm_reference(la, lb, 1);
    CHECK(r.stat == Catch::Approx(ref).epsilon(1e-12));
    CHECK(std::fabs(r.stat - ref) / std::fabs(ref) < 0.15);
    CHECK(r.p < 0.001);  // mean 0.5 shift over 500 points is unmistakable

    // multi-lag path against the reference too
    const rf::DmResult r8 = rf::dm_test(la, lb, 8);
    CHECK(r8.stat == Catch::Approx(dm_reference(la, lb, 8)).epsilon(1e-12));
}

TEST_CASE("dm_test antisymmetry") {
    rf::RngStream rng(77);
    std::vector<double> la(120), lb(120);
    for (size_t i = 0; i < la.size(); ++i) {
        la[i] = rng.normal() + 0.3;
        lb[i] = rng.normal();
    }
    const rf::DmResult ab = rf::dm_test(la, lb, 5);
    const rf::DmResult ba = rf::dm_test(lb, la, 5);
    CHECK(ab.stat == Catch::Approx(-ba.stat).margin(1e-12));
    CHECK(ab.p == Catch::Approx(ba.p).margin(1e-12));
}

TEST_CASE("dm_test input validation") {
    std::vector<double> short_seq(5, 1.0);
    CHECK_THROWS(rf::dm_test(short_seq, short_seq, 1));
    std::vector<double> a(20, 1.0), b(19, 1.0);
    CHECK_THROWS(rf::dm_test(a, b, 1));
}

TEST_CASE("pearson correlation basics") {
    std::vector<double> x, y_pos, y_neg;
    for (int i = 0; i < 30; ++i) {
        x.push_back(i);
        y_pos.push_back(2.0 * i + 1.0);
        y_neg.push_back(-0.5 * i);
    }
    CHECK(rf::pearson(x, y_pos).r == Catch::Approx(1.0).margin(1e-12));
    CHECK(rf::pearson(x, y_neg).r == Catch::Approx(-1.0).margin(1e-12));
    CHECK(rf::pearson(x, y_pos).p < 1e-10);

    std::vector<double> flat(30, 2.0);
    CHECK(rf::pearson(x, flat).undefined);

    // p-value sanity for a known-r case against the t transform
    rf::RngStream rng(13);
    std::vector<double> u(100), v(100);
    for (size_t i = 0; i < 100; ++i) {
        u[i] = rng.normal();
        v[i] = 0.3 * u[i] + rng.normal();
    }
    const rf::CorrResult c = rf::pearson(u, v);
    const double t = c.r * std::sqrt((100.0 - 2.0) / (1.0 - c.r * c.r));
    CHECK(c.p == Catch::Approx(rf::student_t_two_sided_p(t, 98)).epsilon(1e-12));
}
