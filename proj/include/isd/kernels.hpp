#pragma once

#include <string>
#include <vector>

namespace isd {

enum class Kernel { gaussian, box, triangular, epanechnikov };

// A symmetric bounded kernel with unit mass and finite first absolute
// moment, together with the exact norms that enter the adaptive
// threshold constants.
struct KernelSpec {
    Kernel id;
    std::string name;
    double support_radius;   // infinity for the gaussian
    double cutoff_radius;    // radius beyond which evaluations are dropped by fast paths
    double sup_norm;
    double l1_norm;
    double l2_norm_sq;
    bool has_closed_self_convolution;
};

const KernelSpec& kernel(Kernel id);
const KernelSpec& kernel_by_name(const std::string& name);
const std::vector<KernelSpec>& all_kernels();

double eval_kernel(const KernelSpec& k, double u);

// K_h(x) = K(x/h)/h
double scaled_eval(const KernelSpec& k, double h, double x);

// \int |K(u)| |u|^beta du, closed form for every built-in.
double abs_moment(const KernelSpec& k, double beta);

double l2_norm_sq(const KernelSpec& k);

// (K*K)(t); closed form for gaussian and box, quadrature otherwise.
double self_convolution(const KernelSpec& k, double t);

} // namespace isd
