#pragma once

#include "isd/densities.hpp"
#include "isd/estimators.hpp"
#include "isd/kernels.hpp"
#include "isd/sample.hpp"

#include <utility>
#include <vector>

// Independent brute-force and closed-form references used by the test
// suites. Everything here is deterministic (fixed quadrature rules) and
// deliberately naive; the optimized estimator paths are checked against it.

namespace isd::oracle {

// Literal double loop with naive accumulation.
double t_n_naive(const Sample& s, const KernelSpec& k, double h);

// (K_h * f)(x), closed form for gaussian kernel + gaussian-family density,
// quadrature otherwise.
double kde_mean(const TestDensity& d, const KernelSpec& k, double h, double x);

// E T_n(h) = int K(u) (f_bar * f)(u h) du, always by quadrature over u.
double expected_tn_quadrature(const TestDensity& d, const KernelSpec& k, double h);

// E T_n(h); closed form 1/sqrt(2 pi (2 sigma^2 + h^2)) for gaussian
// density + gaussian kernel, quadrature otherwise.
double expected_tn_exact(const TestDensity& d, const KernelSpec& k, double h);

struct RateProbe {
    double slope = 0.0;
    bool ok = false;                  // false when fewer than 2 usable points
    std::vector<double> h_used;
    std::vector<double> bias;         // at the used points
    std::vector<double> h_excluded;   // |bias| below noise floor
};

// Least-squares slope of log |bias| against log h.
RateProbe bias_rate_probe(const TestDensity& d, const KernelSpec& k,
                          const std::vector<double>& h_list);

// |U_n^(2)(R - ER) - 2 U_n^(1)(pi_1 R) - U_n^(2)(pi_2 R)| on a concrete
// sample, with the projections computed against the generating density.
double hoeffding_check(const Sample& s, const TestDensity& d, const KernelSpec& k, double h);

// U_n^(2)(pi_2 R), the degenerate part of T_n - E T_n.
double degenerate_part(const Sample& s, const TestDensity& d, const KernelSpec& k, double h);

// lhs = E[2 (K_h*f)(X) - 2 f(X)]^2 (the computable middle bound on n E S_1^2),
// rhs = 4 ||f||_inf int ((K_h*f) - f)^2 (the next bound in the chain; +inf
// when the density is unbounded).
std::pair<double, double> linear_part_variance_check(const TestDensity& d,
                                                     const KernelSpec& k, double h);

} // namespace isd::oracle
