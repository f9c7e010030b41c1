#include "isd/oracle.hpp"

#include "isd/errors.hpp"
#include "isd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isd::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Interior points where the density is singular or kinked, expressed in
// the u variable of int K(u) f(x - u h) du.
std::vector<double> density_breaks(const TestDensity& d) {
    switch (d.family) {
        case DensityFamily::laplace: return {0.0};
        case DensityFamily::uniform: return {d.a, d.c};
        case DensityFamily::cusp: return {-1.0, 0.0, 1.0};
        default: return {};
    }
}

} // namespace

double t_n_naive(const Sample& s, const KernelSpec& k, double h) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    const auto& x = s.values();
    const std::size_t n = x.size();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            sum += eval_kernel(k, (x[i] - x[j]) / h);
    const double nd = static_cast<double>(n);
    return 2.0 * sum / (nd * (nd - 1.0) * h);
}

double kde_mean(const TestDensity& d, const KernelSpec& k, double h, double x) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    if (k.id == Kernel::gaussian) {
        if (d.family == DensityFamily::gaussian)
            return normal_pdf(x, d.mu, std::sqrt(d.sigma * d.sigma + h * h));
        if (d.family == DensityFamily::mixture)
            return d.w * normal_pdf(x, d.mu1, std::sqrt(d.sigma1 * d.sigma1 + h * h)) +
                   (1.0 - d.w) * normal_pdf(x, d.mu2, std::sqrt(d.sigma2 * d.sigma2 + h * h));
    }
    const double radius = k.cutoff_radius;
    std::vector<double> splits;
    for (double b : density_breaks(d)) splits.push_back((x - b) / h);
    quad::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-14;
    opt.max_segments = 100000;
    return quad::integrate_split(
        [&](double u) { return eval_kernel(k, u) * pdf(d, x - u * h); },
        -radius, radius, std::move(splits), opt);
}

double expected_tn_quadrature(const TestDensity& d, const KernelSpec& k, double h) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    const double radius = k.cutoff_radius;
    // autocorrelation kinks: t = 0 and the support-difference edges
    std::vector<double> splits = {0.0};
    if (d.family == DensityFamily::uniform) splits.push_back((d.c - d.a) / h);
    if (d.family == DensityFamily::cusp) {
        splits.push_back(1.0 / h);
        splits.push_back(2.0 / h);
    }
    quad::Options opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-13;
    opt.max_segments = 100000;
    // K and the autocorrelation are both even in u
    return 2.0 * quad::integrate_split(
                     [&](double u) { return eval_kernel(k, u) * autocorrelation(d, u * h); },
                     0.0, radius, std::move(splits), opt);
}

double expected_tn_exact(const TestDensity& d, const KernelSpec& k, double h) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    if (k.id == Kernel::gaussian) {
        if (d.family == DensityFamily::gaussian)
            return 1.0 / std::sqrt(2.0 * M_PI * (2.0 * d.sigma * d.sigma + h * h));
        if (d.family == DensityFamily::mixture) {
            const double m[2] = {d.mu1, d.mu2};
            const double s[2] = {d.sigma1, d.sigma2};
            const double wt[2] = {d.w, 1.0 - d.w};
            double e = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    e += wt[i] * wt[j] *
                         normal_pdf(m[i] - m[j], 0.0,
                                    std::sqrt(s[i] * s[i] + s[j] * s[j] + h * h));
            return e;
        }
    }
    return expected_tn_quadrature(d, k, h);
}

RateProbe bias_rate_probe(const TestDensity& d, const KernelSpec& k,
                          const std::vector<double>& h_list) {
    constexpr double kNoiseFloor = 1e-11;
    RateProbe probe;
    for (double h : h_list) {
        const double bias = expected_tn_exact(d, k, h) - theta2(d);
        if (std::fabs(bias) <= kNoiseFloor) {
            probe.h_excluded.push_back(h);
            continue;
        }
        probe.h_used.push_back(h);
        probe.bias.push_back(bias);
    }
    const std::size_t m = probe.h_used.size();
    if (m < 2) return probe;   // ok stays false: bias numerically zero

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(probe.h_used[i]);
        const double ly = std::log(std::fabs(probe.bias[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    if (denom <= 0.0) return probe;
    probe.slope = (m * sxy - sx * sy) / denom;
    probe.ok = true;
    return probe;
}

double hoeffding_check(const Sample& s, const TestDensity& d, const KernelSpec& k, double h) {
    const auto& x = s.values();
    const std::size_t n = x.size();
    const double er = expected_tn_exact(d, k, h);

    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = kde_mean(d, k, h, x[i]);

    const double nd = static_cast<double>(n);
    double lhs = t_n_naive(s, k, h) - er;

    double linear = 0.0;
    for (std::size_t i = 0; i < n; ++i) linear += m[i] - er;
    linear *= 2.0 / nd;

    double degen = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            degen += eval_kernel(k, (x[i] - x[j]) / h) / h - m[i] - m[j] + er;
    degen *= 2.0 / (nd * (nd - 1.0));

    return std::fabs(lhs - (linear + degen));
}

double degenerate_part(const Sample& s, const TestDensity& d, const KernelSpec& k, double h) {
    const auto& x = s.values();
    const std::size_t n = x.size();
    const double er = expected_tn_exact(d, k, h);
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = kde_mean(d, k, h, x[i]);
    double degen = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            degen += eval_kernel(k, (x[i] - x[j]) / h) / h - m[i] - m[j] + er;
    const double nd = static_cast<double>(n);
    return degen * 2.0 / (nd * (nd - 1.0));
}

std::pair<double, double> linear_part_variance_check(const TestDensity& d,
                                                     const KernelSpec& k, double h) {
    const auto [lo, hi] = effective_support(d);
    std::vector<double> splits = density_breaks(d);

    quad::Options opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-14;
    opt.max_segments = 100000;

    const double lhs = quad::integrate_split(
        [&](double x) {
            const double delta = 2.0 * (kde_mean(d, k, h, x) - pdf(d, x));
            return delta * delta * pdf(d, x);
        },
        lo, hi, splits, opt);

    double rhs = kInf;
    if (std::isfinite(d.sup_norm)) {
        const double l2 = quad::integrate_split(
            [&](double x) {
                const double delta = kde_mean(d, k, h, x) - pdf(d, x);
                return delta * delta;
            },
            lo - k.cutoff_radius * h, hi + k.cutoff_radius * h, splits, opt);
        rhs = 4.0 * d.sup_norm * l2;
    }
    return {lhs, rhs};
}

} // namespace isd::oracle
