#include "isd/estimators.hpp"

#include "isd/errors.hpp"
#include "isd/stats.hpp"

#include <algorithm>
#include <cmath>

namespace isd {

namespace {

struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::tn: return "tn";
        case Method::tbar: return "tbar";
        case Method::bickel_ritov: return "bickel_ritov";
        case Method::adaptive: return "adaptive";
    }
    return "?";
}

namespace detail {

std::vector<double> sorted_copy(const Sample& s) {
    std::vector<double> v = s.values();
    std::sort(v.begin(), v.end());
    return v;
}

PairSums pairwise_kernel_sums(const std::vector<double>& x, const KernelSpec& k,
                              double h, bool want_rows) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    const std::size_t n = x.size();
    const double radius = k.cutoff_radius * h;

    PairSums out;
    Neumaier total;
    std::vector<double> rows, comps;
    if (want_rows) {
        rows.assign(n, 0.0);
        comps.assign(n, 0.0);
    }
    auto row_add = [&](std::size_t i, double v) {
        double& s = rows[i];
        double& c = comps[i];
        const double t = s + v;
        if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[j] - x[i];
            if (dx > radius) break;
            const double v = eval_kernel(k, dx / h);
            total.add(v);
            if (want_rows) {
                row_add(i, v);
                row_add(j, v);
            }
        }
    }
    out.total = total.value();
    if (want_rows) {
        for (std::size_t i = 0; i < n; ++i) rows[i] += comps[i];
        out.rows = std::move(rows);
    }
    return out;
}

} // namespace detail

double t_n(const Sample& s, const KernelSpec& k, double h) {
    const auto x = detail::sorted_copy(s);
    const auto sums = detail::pairwise_kernel_sums(x, k, h, false);
    const double n = static_cast<double>(s.n());
    return 2.0 * sums.total / (n * (n - 1.0) * h);
}

double t_bar_n(const Sample& s, const KernelSpec& k, double h) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    const auto x = detail::sorted_copy(s);
    const std::size_t n = x.size();
    const double radius = 2.0 * k.cutoff_radius * h;   // support of K*K doubles
    Neumaier total;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[j] - x[i];
            if (dx > radius) break;
            total.add(self_convolution(k, dx / h));
        }
    }
    const double nd = static_cast<double>(n);
    return 2.0 * total.value() / (nd * (nd - 1.0) * h);
}

double bickel_ritov(const Sample& s, const KernelSpec& k, double h) {
    return 2.0 * t_n(s, k, h) - t_bar_n(s, k, h);
}

double tau_sq_hat(const Sample& s, const KernelSpec& k, double h) {
    const auto x = detail::sorted_copy(s);
    const auto sums = detail::pairwise_kernel_sums(x, k, h, true);
    const double n = static_cast<double>(s.n());
    const double tn = 2.0 * sums.total / (n * (n - 1.0) * h);
    Neumaier gsq;
    for (double row : sums.rows) {
        const double g = row / ((n - 1.0) * h);   // leave-one-out KDE at X_i
        gsq.add(g * g);
    }
    return std::max(0.0, gsq.value() / n - tn * tn);
}

std::pair<double, double> confidence_interval(double theta_hat, double tau_sq,
                                              std::size_t n, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence level must be in (0,1)");
    if (!(tau_sq >= 0.0))
        throw std::invalid_argument("tau_sq_hat must be nonnegative");
    const double z = stats::norm_quantile(0.5 * (1.0 + level));
    const double half = z * 2.0 * std::sqrt(tau_sq) / std::sqrt(static_cast<double>(n));
    return {theta_hat - half, theta_hat + half};
}

double variance_budget(std::size_t n, double h, double L, double alpha) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    if (n < 2) throw sample_too_small(n);
    if (!(L > 0.0 && alpha > 0.0))
        throw std::invalid_argument("variance_budget: need L > 0 and alpha > 0");
    const double nd = static_cast<double>(n);
    return std::max(1.0 / (nd * nd * h), L * std::pow(h, 2.0 * alpha) / nd);
}

} // namespace isd
