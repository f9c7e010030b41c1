#include "isd/kernels.hpp"

#include "isd/errors.hpp"
#include "isd/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
const double kInvTwoSqrtPi = 1.0 / (2.0 * std::sqrt(M_PI));

// Gaussian evaluations beyond this radius are below 1e-37 of the peak;
// fast paths treat the kernel as zero there.
constexpr double kGaussianCutoff = 13.0;

const std::vector<KernelSpec> kKernels = {
    {Kernel::gaussian, "gaussian", kInf, kGaussianCutoff,
     kInvSqrt2Pi, 1.0, kInvTwoSqrtPi, true},
    {Kernel::box, "box", 1.0, 1.0, 0.5, 1.0, 0.5, true},
    {Kernel::triangular, "triangular", 1.0, 1.0, 1.0, 1.0, 2.0 / 3.0, false},
    {Kernel::epanechnikov, "epanechnikov", 1.0, 1.0, 0.75, 1.0, 0.6, false},
};

} // namespace

const std::vector<KernelSpec>& all_kernels() { return kKernels; }

const KernelSpec& kernel(Kernel id) {
    return kKernels[static_cast<std::size_t>(id)];
}

const KernelSpec& kernel_by_name(const std::string& name) {
    for (const auto& k : kKernels)
        if (k.name == name) return k;
    throw std::invalid_argument("unknown kernel: " + name);
}

double eval_kernel(const KernelSpec& k, double u) {
    const double a = std::fabs(u);
    switch (k.id) {
        case Kernel::gaussian:
            return kInvSqrt2Pi * std::exp(-0.5 * a * a);
        case Kernel::box:
            return a <= 1.0 ? 0.5 : 0.0;   // closed support, K(+-1) = 1/2
        case Kernel::triangular:
            return a <= 1.0 ? 1.0 - a : 0.0;
        case Kernel::epanechnikov:
            return a <= 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
    }
    return 0.0;
}

double scaled_eval(const KernelSpec& k, double h, double x) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    return eval_kernel(k, x / h) / h;
}

double abs_moment(const KernelSpec& k, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("abs_moment: beta must be >= 0");
    switch (k.id) {
        case Kernel::gaussian:
            // E|Z|^beta = 2^{beta/2} Gamma((beta+1)/2) / sqrt(pi)
            return std::pow(2.0, 0.5 * beta) * std::tgamma(0.5 * (beta + 1.0)) / std::sqrt(M_PI);
        case Kernel::box:
            return 1.0 / (beta + 1.0);
        case Kernel::triangular:
            return 2.0 / ((beta + 1.0) * (beta + 2.0));
        case Kernel::epanechnikov:
            return 3.0 / ((beta + 1.0) * (beta + 3.0));
    }
    return 0.0;
}

double l2_norm_sq(const KernelSpec& k) { return k.l2_norm_sq; }

double self_convolution(const KernelSpec& k, double t) {
    const double a = std::fabs(t);
    switch (k.id) {
        case Kernel::gaussian:
            return std::exp(-0.25 * a * a) / (2.0 * std::sqrt(M_PI));
        case Kernel::box:
            return a <= 2.0 ? 0.25 * (2.0 - a) : 0.0;
        default: {
            if (a >= 2.0 * k.support_radius) return 0.0;
            const double lo = std::max(-k.support_radius, a - k.support_radius);
            const double hi = std::min(k.support_radius, a + k.support_radius);
            if (lo >= hi) return 0.0;
            quad::Options opt;
            opt.rel_tol = 1e-8;
            opt.abs_tol = 1e-12;
            return quad::integrate(
                [&](double u) { return eval_kernel(k, u) * eval_kernel(k, a - u); }, lo, hi, opt);
        }
    }
}

} // namespace isd
