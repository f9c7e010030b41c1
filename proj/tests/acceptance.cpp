// Acceptance checks, one per command-line argument 1..9. Each prints a
// single pass/fail line with the measured quantities and exits nonzero on
// failure. These run under ctest as acceptance_1 .. acceptance_9.

#include "isd/adaptive.hpp"
#include "isd/densities.hpp"
#include "isd/estimators.hpp"
#include "isd/oracle.hpp"
#include "isd/rng.hpp"
#include "isd/simharness.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace isd;

namespace {

bool report(int crit, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", crit, ok ? "PASS" : "FAIL", detail.c_str());
    return ok;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// 1: fast pairwise sum vs literal double loop, 1e-12 relative, 100 instances
bool criterion1() {
    const std::array<const char*, 3> densities = {"gaussian", "laplace:b=1", "mixture"};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t seed = 1000 + i;
        const TestDensity d = parse_density(densities[i % 3]);
        const std::size_t n = 20 + (rng::mix(seed, 0) % 481);   // 20..500
        const double h = std::exp(std::log(1e-3) +
                                  rng::uniform01(seed, 1) * std::log(1.0 / 1e-3));
        const auto& k = all_kernels()[i % 4];
        const Sample s = sample(d, n, seed);
        const double fast = t_n(s, k, h);
        const double naive = oracle::t_n_naive(s, k, h);
        const double rel = std::fabs(fast - naive) / std::max(std::fabs(naive), 1e-300);
        worst = std::max(worst, rel);
    }
    return report(1, worst <= 1e-12,
                  "fast vs naive pairwise sum, worst relative gap " + fmt(worst) +
                      " over 100 instances (tolerance 1e-12)");
}

// 2: closed-form expected value and the Monte Carlo mean around it
bool criterion2() {
    const TestDensity d = parse_density("gaussian");
    const auto& k = kernel(Kernel::gaussian);
    double worst = 0.0;
    for (double h : {0.05, 0.2, 0.5, 1.0}) {
        const double closed = 1.0 / std::sqrt(2.0 * M_PI * (2.0 + h * h));
        worst = std::max(worst, std::fabs(oracle::expected_tn_exact(d, k, h) - closed));
        worst = std::max(worst, std::fabs(oracle::expected_tn_quadrature(d, k, h) - closed));
    }
    if (worst > 1e-10)
        return report(2, false, "closed-form expected value off by " + fmt(worst));

    const std::size_t n = 200, R = 2000;
    const double h = 0.5;
    const double target = 1.0 / std::sqrt(2.0 * M_PI * 2.25);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        const double t = t_n(sample(d, n, rng::derive_seed(20, n, r)), k, h);
        sum += t;
        sumsq += t * t;
    }
    const double mean = sum / R;
    const double se = std::sqrt((sumsq / R - mean * mean) / (R - 1.0));
    const double gap = std::fabs(mean - target);
    return report(2, gap <= 4.0 * se,
                  "MC mean of the statistic " + fmt(mean) + " vs expected " + fmt(target) +
                      ", gap " + fmt(gap) + " <= 4 SE = " + fmt(4.0 * se));
}

// 3: bias decay exponents from the quadrature oracle
bool criterion3() {
    const auto cusp = oracle::bias_rate_probe(
        parse_density("cusp:gamma=-0.3"), kernel(Kernel::box),
        {0.04, 0.02, 0.01, 0.005, 0.0025});
    const auto gauss = oracle::bias_rate_probe(
        parse_density("gaussian"), kernel(Kernel::gaussian), {0.4, 0.2, 0.1, 0.05});
    const bool ok = cusp.ok && std::fabs(cusp.slope - 0.4) <= 0.1 &&
                    gauss.ok && gauss.slope >= 1.8;
    return report(3, ok,
                  "bias slope cusp " + fmt(cusp.slope) + " (target 0.4 +- 0.1), gaussian " +
                      fmt(gauss.slope) + " (>= 1.8)");
}

// 4: exact projection decomposition plus the degenerate-variance bound
bool criterion4() {
    const auto& k = kernel(Kernel::gaussian);
    double worst = 0.0;
    const std::array<const char*, 2> specs = {"gaussian", "laplace:b=1"};
    for (int i = 0; i < 20; ++i) {
        const TestDensity d = parse_density(specs[i % 2]);
        const Sample s = sample(d, 25 + 2 * i, 300 + i);
        const double h = 0.05 + 0.03 * i;
        worst = std::max(worst, oracle::hoeffding_check(s, d, k, h));
    }
    if (worst > 1e-9)
        return report(4, false, "decomposition residual " + fmt(worst) + " > 1e-9");

    const TestDensity d = parse_density("gaussian");
    const std::size_t n = 100, R = 500;
    const double h = 0.1;
    double sumsq = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        const double s2 = oracle::degenerate_part(sample(d, n, rng::derive_seed(40, n, r)), d, k, h);
        sumsq += s2 * s2;
    }
    const double mc = sumsq / R;
    const double bound = 2.0 * theta2(d) * l2_norm_sq(k) / (n * (n - 1.0) * h);
    const bool ok = mc <= 1.1 * bound;
    return report(4, ok,
                  "decomposition residual " + fmt(worst) + " <= 1e-9; degenerate variance " +
                      fmt(mc) + " within 1.1x bound " + fmt(bound));
}

// 5: fixed-bandwidth asymptotic normality and CI coverage
bool criterion5() {
    ExperimentPlan plan;
    plan.density_spec = "laplace:b=1";
    plan.kernel_name = "gaussian";
    plan.estimator = FixedBandwidthRule{1.0, 1.0};   // h = n^{-0.4}
    plan.n_list = {5000};
    plan.replicates = 500;
    plan.master_seed = 50;
    const ExperimentReport rep = run_experiment(plan);
    const auto& row = rep.rows[0];
    const bool ok = row.ok && row.ks && *row.ks < 0.1 && row.coverage >= 0.90 &&
                    row.coverage <= 0.99;
    return report(5, ok,
                  "n=5000 R=500: KS " + fmt(row.ks ? *row.ks : -1.0) + " < 0.1, coverage " +
                      fmt(row.coverage) + " in [0.90, 0.99]");
}

// 6: asymptotic normality with the data-driven bandwidth
bool criterion6() {
    ExperimentPlan plan;
    plan.density_spec = "gaussian:mu=0,sigma=1";
    plan.kernel_name = "gaussian";
    GridConfig cfg;
    cfg.L = 0.3;
    plan.estimator = cfg;
    plan.n_list = {5000};
    plan.replicates = 300;
    plan.master_seed = 60;
    const ExperimentReport rep = run_experiment(plan);
    const auto& row = rep.rows[0];
    const bool ok = row.ok && row.ks && *row.ks < 0.12 && row.fallback_rate < 0.05;
    return report(6, ok,
                  "adaptive n=5000 R=300: KS " + fmt(row.ks ? *row.ks : -1.0) +
                      " < 0.12, fallback rate " + fmt(row.fallback_rate) + " < 5%");
}

// 7: adaptive rmse rate in the low-smoothness regime
bool criterion7() {
    ExperimentPlan plan;
    plan.density_spec = "cusp:gamma=-0.35";
    plan.kernel_name = "box";
    plan.estimator = GridConfig{};   // L estimated from the data
    plan.n_list = {1000, 2000, 4000, 8000};
    plan.replicates = 200;
    plan.master_seed = 70;
    const ExperimentReport rep = run_experiment(plan);
    bool medians_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        medians_decreasing = medians_decreasing &&
                             rep.rows[i].median_h < rep.rows[i - 1].median_h;
    const double slope = rep.rate_slope ? *rep.rate_slope : 0.0;
    const bool ok = rep.rate_slope && slope >= -0.65 && slope <= -0.25 && medians_decreasing;
    std::string meds;
    for (const auto& r : rep.rows) meds += fmt(r.median_h) + " ";
    return report(7, ok,
                  "rmse rate slope " + fmt(slope) + " in [-0.65, -0.25]; median bandwidths " +
                      meds + (medians_decreasing ? "decreasing" : "NOT decreasing"));
}

// 8: grid size bound, infeasibility detection, and the worked n=1e6 grid
bool criterion8() {
    GridConfig paper;
    paper.mode = GridConfig::Mode::paper;
    // size bound across (n, rho)
    for (std::size_t n : {50u, 200u, 5000u, 100000u, 1000000u})
        for (double rho : {1.05, 1.2, 1.7, 3.0}) {
            GridConfig cfg = paper;
            cfg.rho = rho;
            BandwidthGrid g;
            try {
                g = build_grid(n, cfg);
            } catch (const grid_infeasible&) {
                continue;
            }
            if (static_cast<double>(g.bandwidths.size()) >
                3.0 + std::log(static_cast<double>(n)) / std::log(rho))
                return report(8, false, "size bound violated at n=" + std::to_string(n) +
                                            " rho=" + fmt(rho));
        }
    // infeasibility exactly when n^delta <= log n or ell(n) >= log n
    for (std::size_t n : {10u, 50u, 1000u, 100000u})
        for (double delta : {0.1, 0.3, 0.5, 0.9})
            for (double ell_scale : {0.5, 3.0, 20.0}) {
                GridConfig cfg = paper;
                cfg.delta = delta;
                cfg.ell_scale = ell_scale;
                const double nd = static_cast<double>(n);
                const bool expect_bad = std::pow(nd, delta) <= std::log(nd) ||
                                        ell_scale / std::log(std::log(nd)) >= std::log(nd);
                bool threw = false;
                try {
                    build_grid(n, cfg);
                } catch (const grid_infeasible&) {
                    threw = true;
                }
                if (threw != expect_bad)
                    return report(8, false,
                                  "infeasibility mismatch at n=" + std::to_string(n) +
                                      " delta=" + fmt(delta) + " ell_scale=" + fmt(ell_scale));
            }
    // worked example to 4 significant digits
    const BandwidthGrid g = build_grid(1000000, paper);
    auto close4 = [](double a, double b) { return std::fabs(a - b) <= 5e-4 * std::fabs(b); };
    const bool worked = close4(g.h0, 1e-3) && close4(g.h1, 1.3816e-5) &&
                        close4(g.h2, 1.1424e-6) && close4(g.h_lower_bound, 3.643e-8) &&
                        g.bandwidths.size() == 21;
    return report(8, worked,
                  "size bound and infeasibility detection hold; worked grid h0=" + fmt(g.h0) +
                      " h1=" + fmt(g.h1) + " h2=" + fmt(g.h2) + " lb=" + fmt(g.h_lower_bound) +
                      " size=" + std::to_string(g.bandwidths.size()));
}

// 9: byte-identical simulation reports across runs and thread counts
std::string run_cli(const std::string& args) {
    const std::string cmd = std::string(ISD_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return "<popen failed>";
    std::string out;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
    pclose(p);
    return out;
}

bool criterion9() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::string base =
        "simulate --density mixture --kernel gaussian --n 100,300 --replicates 60 --seed 2718";
    bool ok = true;
    std::string why;
    for (const char* f : {"csv", "json"}) {
        const std::string fmt_arg = std::string(" --format ") + f;
        const std::string a = run_cli(base + fmt_arg + " --threads 1");
        const std::string b = run_cli(base + fmt_arg + " --threads 1");
        const std::string c = run_cli(base + fmt_arg + " --threads " + std::to_string(hw + 3));
        if (a.empty() || a != b || a != c) {
            ok = false;
            why = std::string("mismatch in ") + f + " output";
            break;
        }
    }
    return report(9, ok,
                  ok ? "csv and json byte-identical across two runs and thread counts 1 vs " +
                           std::to_string(hw + 3)
                     : why);
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..9>\n");
        return 2;
    }
    const int c = std::atoi(argv[1]);
    bool ok = false;
    switch (c) {
        case 1: ok = criterion1(); break;
        case 2: ok = criterion2(); break;
        case 3: ok = criterion3(); break;
        case 4: ok = criterion4(); break;
        case 5: ok = criterion5(); break;
        case 6: ok = criterion6(); break;
        case 7: ok = criterion7(); break;
        case 8: ok = criterion8(); break;
        case 9: ok = criterion9(); break;
        default:
            std::fprintf(stderr, "unknown criterion %d\n", c);
            return 2;
    }
    return ok ? 0 : 1;
}
