#pragma once

#include "isd/kernels.hpp"
#include "isd/sample.hpp"

#include <string>
#include <utility>
#include <vector>

namespace isd {

enum class Method { tn, tbar, bickel_ritov, adaptive };

std::string method_name(Method m);

struct EstimateResult {
    double theta_hat;
    double bandwidth;
    double tau_sq_hat;
    std::size_t n;
    double ci_low;
    double ci_high;
    double level;
    Method method;
    bool fallback = false;
};

// T_n(h) = 2/(n(n-1)h) sum_{i<j} K((X_i - X_j)/h).
// Sorted window fast path plus compensated summation; the result does not
// depend on the input order.
double t_n(const Sample& s, const KernelSpec& k, double h);

// Integrated-squared-KDE variant with the diagonal deleted:
// 2/(n(n-1)h) sum_{i<j} (K*K)((X_i - X_j)/h).
double t_bar_n(const Sample& s, const KernelSpec& k, double h);

// 2 T_n - T_bar_n
double bickel_ritov(const Sample& s, const KernelSpec& k, double h);

// Leave-one-out plug-in estimate of tau^2 = int f^3 - (int f^2)^2,
// clamped at zero.
double tau_sq_hat(const Sample& s, const KernelSpec& k, double h);

// theta_hat +- z_{(1+level)/2} * 2 sqrt(tau_sq_hat / n)
std::pair<double, double> confidence_interval(double theta_hat, double tau_sq_hat,
                                              std::size_t n, double level);

// Variance envelope shape (1/(n^2 h)) v (L h^{2 alpha} / n).
double variance_budget(std::size_t n, double h, double L, double alpha);

namespace detail {

// Row sums S_i = sum_{j != i} K((x_i - x_j)/h) for a sorted sample, using
// the kernel cutoff window. total = sum_{i<j} K((x_i - x_j)/h).
struct PairSums {
    double total = 0.0;
    std::vector<double> rows;   // empty unless requested
};

PairSums pairwise_kernel_sums(const std::vector<double>& sorted_values,
                              const KernelSpec& k, double h, bool want_rows);

std::vector<double> sorted_copy(const Sample& s);

} // namespace detail

} // namespace isd
