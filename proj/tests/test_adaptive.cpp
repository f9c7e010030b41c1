#include <doctest.h>

#include "isd/adaptive.hpp"
#include "isd/densities.hpp"
#include "isd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

using namespace isd;

namespace {
GridConfig paper_cfg() {
    GridConfig cfg;
    cfg.mode = GridConfig::Mode::paper;
    return cfg;
}
} // namespace

TEST_CASE("grid construction at n = 1e6") {
    const BandwidthGrid g = build_grid(1000000, paper_cfg());
    CHECK(g.h0 == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(g.h1 == doctest::Approx(1.3815511e-5).epsilon(1e-7));
    CHECK(g.h2 == doctest::Approx(1.142511e-6).epsilon(1e-6));
    CHECK(g.h_lower_bound == doctest::Approx(3.643065e-8).epsilon(1e-6));
    CHECK(g.bandwidths.size() == 21);
    CHECK(g.ell_n == doctest::Approx(3.0 / std::log(std::log(1e6))).epsilon(1e-12));
    CHECK_FALSE(g.degenerate);
    // strictly decreasing, geometric below h2, all above the lower bound
    for (std::size_t i = 1; i < g.bandwidths.size(); ++i)
        CHECK(g.bandwidths[i] < g.bandwidths[i - 1]);
    for (std::size_t i = 3; i < g.bandwidths.size(); ++i)
        CHECK(g.bandwidths[i] == doctest::Approx(g.bandwidths[i - 1] / 1.2).epsilon(1e-12));
    for (double h : g.bandwidths) CHECK(h >= g.h_lower_bound);
}

TEST_CASE("grid size bound and modes") {
    for (std::size_t n : {100u, 1000u, 50000u, 1000000u}) {
        for (double rho : {1.1, 1.2, 2.0}) {
            GridConfig cfg = paper_cfg();
            cfg.rho = rho;
            const BandwidthGrid g = build_grid(n, cfg);
            CHECK(static_cast<double>(g.bandwidths.size()) <=
                  3.0 + std::log(static_cast<double>(n)) / std::log(rho));
        }
    }
    // practical mode reaches further down
    GridConfig p = paper_cfg();
    GridConfig q;   // practical
    const BandwidthGrid gp = build_grid(10000, p);
    const BandwidthGrid gq = build_grid(10000, q);
    CHECK(gq.h_lower_bound == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(gp.h_lower_bound > gq.h_lower_bound);
    CHECK(gq.h_min() < gp.h_min());
}

TEST_CASE("grid infeasibility diagnoses") {
    GridConfig cfg = paper_cfg();
    cfg.delta = 0.1;   // n^0.1 < log n at n = 1e6
    CHECK_THROWS_AS(build_grid(1000000, cfg), grid_infeasible);
    try {
        build_grid(1000000, cfg);
    } catch (const grid_infeasible& e) {
        CHECK(std::string(e.what()).find("n^delta > log n") != std::string::npos);
    }

    GridConfig small = paper_cfg();
    CHECK_THROWS_AS(build_grid(3, small), grid_infeasible);

    GridConfig big_ell = paper_cfg();
    big_ell.ell_scale = 50.0;   // ell(n) > log n at moderate n
    CHECK_THROWS_AS(build_grid(100, big_ell), grid_infeasible);
    try {
        build_grid(100, big_ell);
    } catch (const grid_infeasible& e) {
        CHECK(std::string(e.what()).find("ell(n) < log n") != std::string::npos);
    }

    CHECK_THROWS(build_grid(1000, [] { GridConfig c; c.rho = 0.9; return c; }()));
    CHECK_THROWS(build_grid(1000, [] { GridConfig c; c.delta = 1.5; return c; }()));
}

TEST_CASE("sigma_tilde") {
    CHECK(sigma_tilde(1e-4, 1000) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(sigma_tilde(1.0, 500) == doctest::Approx(1.0 / 500.0).epsilon(1e-15));
    CHECK(sigma_tilde(0.01, 1000) < sigma_tilde(0.01, 100));
    CHECK(sigma_tilde(0.04, 1000) < sigma_tilde(0.01, 1000));
    CHECK_THROWS_AS(sigma_tilde(0.0, 10), invalid_bandwidth);
}

TEST_CASE("threshold constant M") {
    CHECK(threshold_M(kernel(Kernel::gaussian), 1.0) ==
          doctest::Approx(144.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-12));
    CHECK(threshold_M(kernel(Kernel::gaussian), 1.0) == doctest::Approx(40.62165).epsilon(1e-6));
    CHECK(threshold_M(kernel(Kernel::box), 1.0) == doctest::Approx(72.0).epsilon(1e-12));
    CHECK(threshold_M(kernel(Kernel::box), 2.5) == doctest::Approx(180.0).epsilon(1e-12));
    CHECK_THROWS(threshold_M(kernel(Kernel::box), 0.0));
}

TEST_CASE("two-branch threshold d(h)") {
    BandwidthGrid g = build_grid(1000000, paper_cfg());
    resolve_threshold(g, kernel(Kernel::gaussian), 1.0);
    // flat branch on [h2, h0]
    const double flat = 1.0 / std::sqrt(g.ell_n);
    CHECK(threshold_d(g.h0, g) == doctest::Approx(flat).epsilon(1e-12));
    CHECK(threshold_d(g.h2, g) == doctest::Approx(flat).epsilon(1e-12));
    CHECK(threshold_d(g.h2, g) == doctest::Approx(0.935556).epsilon(1e-5));
    // log branch below h2
    CHECK(threshold_d(1e-7, g) ==
          doctest::Approx(std::sqrt(2.0 * g.M * std::log(1e-3 / 1e-7))).epsilon(1e-12));
    CHECK(threshold_d(1e-7, g) == doctest::Approx(27.3545).epsilon(1e-5));
    // non-increasing in h below h2
    double prev = threshold_d(g.h_min(), g);
    for (std::size_t i = g.bandwidths.size() - 1; i >= 3; --i) {
        const double cur = threshold_d(g.bandwidths[i], g);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    CHECK_THROWS_AS(threshold_d(1.0, g), std::out_of_range);
    CHECK_THROWS_AS(threshold_d(1e-9, g), std::out_of_range);
}

TEST_CASE("selector returns a grid element and records every comparison") {
    const TestDensity d = parse_density("gaussian");
    const Sample s = sample(d, 600, 17);
    const auto& k = kernel(Kernel::gaussian);
    GridConfig cfg;
    cfg.L = 0.3;
    BandwidthGrid g = build_grid(600, cfg);
    resolve_threshold(g, k, 0.3);
    const auto [h_hat, trace] = select_bandwidth(s, k, g);

    CHECK(std::find(g.bandwidths.begin(), g.bandwidths.end(), h_hat) != g.bandwidths.end());
    const std::size_t m = g.bandwidths.size();
    CHECK(trace.tests.size() == m * (m - 1) / 2);
    CHECK(trace.t_values.size() == m);
    CHECK(trace.theta_at_h_hat == t_n(s, k, h_hat));
    // every recorded test is reproducible from its fields
    for (const auto& t : trace.tests) {
        CHECK(t.h > t.g);
        CHECK(t.threshold == doctest::Approx(sigma_tilde(t.g, 600) * threshold_d(t.g, g)).epsilon(1e-12));
        CHECK(t.pass == (t.delta_t <= t.threshold));
    }
    // the selected h is the largest whose comparisons all pass
    for (const auto& t : trace.tests)
        if (t.h == h_hat && !trace.fallback) CHECK(t.pass);

    const std::string js = trace_to_json(trace);
    CHECK(js.find("\"h_hat\"") != std::string::npos);
    CHECK(js.find("\"tests\"") != std::string::npos);
}

TEST_CASE("selector fallback semantics") {
    const auto& k = kernel(Kernel::gaussian);
    // adversarial grid: huge T_n differences vs tiny thresholds
    BandwidthGrid g;
    g.n = 1000;
    g.h0 = 0.5;
    g.h1 = 0.05;
    g.h2 = 0.005;
    g.ell_n = 0.4;
    g.h_lower_bound = 1e-6;
    g.mode = GridConfig::Mode::practical;
    g.bandwidths = {0.5, 0.05, 0.005};
    resolve_threshold(g, k, 1e-9);   // absurdly small L -> nothing passes
    std::vector<double> vals;
    for (int i = 0; i < 40; ++i) vals.push_back(i * 0.05);
    const Sample s{std::vector<double>(vals)};
    const auto [h_hat, trace] = select_bandwidth(s, k, g);
    CHECK(trace.fallback);
    CHECK(h_hat == g.h_min());

    // single-element grid: vacuous pass, no fallback
    BandwidthGrid one = g;
    one.bandwidths = {0.5};
    const auto [h1, tr1] = select_bandwidth(s, k, one);
    CHECK(h1 == 0.5);
    CHECK_FALSE(tr1.fallback);
    CHECK(tr1.tests.empty());
}

TEST_CASE("L estimation from the smallest bandwidth") {
    const TestDensity d = parse_density("gaussian");
    const Sample s = sample(d, 500, 23);
    const auto& k = kernel(Kernel::gaussian);
    const BandwidthGrid g = build_grid(500, GridConfig{});
    const double L = estimate_L(s, k, g);
    CHECK(L >= 1e-3);
    CHECK(L == std::max(t_n(s, k, g.h_min()), 1e-3));
}

TEST_CASE("adaptive_estimate end to end") {
    const TestDensity d = parse_density("gaussian");
    const Sample s = sample(d, 2000, 5);
    const auto& k = kernel(Kernel::gaussian);
    GridConfig cfg;
    cfg.L = 0.3;
    SelectionTrace trace;
    const EstimateResult r = adaptive_estimate(s, k, cfg, 0.95, &trace);
    CHECK(r.method == Method::adaptive);
    CHECK(r.bandwidth == trace.h_hat);
    CHECK(r.theta_hat == trace.theta_at_h_hat);
    CHECK(r.ci_low <= r.theta_hat);
    CHECK(r.theta_hat <= r.ci_high);
    CHECK(r.n == 2000);
    // at this n the truth is comfortably inside a +-6 sigma band
    CHECK(std::fabs(r.theta_hat - theta2(d)) < 0.1);
    CHECK_THROWS_AS(adaptive_estimate(Sample({0.0, 1.0, 2.0}), k, cfg, 0.95),
                    grid_infeasible);
}

TEST_CASE("mode names") {
    CHECK(mode_name(GridConfig::Mode::paper) == "paper");
    CHECK(mode_by_name("practical") == GridConfig::Mode::practical);
    CHECK_THROWS(mode_by_name("strict"));
}
