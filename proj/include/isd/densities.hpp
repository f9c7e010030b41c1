#pragma once

#include "isd/sample.hpp"

#include <cstdint>
#include <string>

namespace isd {

enum class DensityFamily { gaussian, laplace, uniform, mixture, cusp };

// A test density with analytic integral functionals and an exact
// inverse-CDF sampler. theta3 (and hence tau_sq) is +infinity for cusp
// densities with gamma <= -1/3, where the third-power integral diverges.
struct TestDensity {
    DensityFamily family;
    std::string spec;        // canonical "name:key=val,..." form

    // family parameters (unused ones are zero)
    double mu = 0.0, sigma = 1.0;          // gaussian
    double b = 1.0;                        // laplace
    double a = 0.0, c = 1.0;               // uniform on [a,c]
    double w = 0.5, mu1 = 0.0, sigma1 = 1.0, mu2 = 0.0, sigma2 = 1.0; // mixture
    double gamma = 0.0;                    // cusp

    double sobolev_sup;      // supremum of alpha with f in H_2^alpha (may be inf)
    double sup_norm;         // may be inf (cusp)
    double theta2;           // int f^2
    double theta3;           // int f^3, may be inf
};

TestDensity make_gaussian(double mu, double sigma);
TestDensity make_laplace(double b);
TestDensity make_uniform(double a, double b);
TestDensity make_mixture(double w, double mu1, double sigma1, double mu2, double sigma2);
TestDensity make_cusp(double gamma);   // gamma in (-1/2, 0)

// Parses "gaussian:mu=0,sigma=1", "cusp:gamma=-0.3", "laplace:b=1",
// "uniform:a=0,b=1", "mixture:w=...,mu1=...,sigma1=...,mu2=...,sigma2=...".
// Omitted parameters take defaults.
TestDensity parse_density(const std::string& spec);

double pdf(const TestDensity& d, double x);
double cdf(const TestDensity& d, double x);

double theta2(const TestDensity& d);
double theta3(const TestDensity& d);
double tau_sq(const TestDensity& d);   // theta3 - theta2^2

// (f_bar * f)(t), the autocorrelation of the density; closed form for
// gaussian, laplace, uniform and mixture, quadrature for the cusp.
double autocorrelation(const TestDensity& d, double t);

// n i.i.d. draws; each draw is a pure function of (seed, index).
Sample sample(const TestDensity& d, std::size_t n, std::uint64_t seed);

// Interval outside which the pdf is below 1e-14 of its peak.
std::pair<double, double> effective_support(const TestDensity& d);

} // namespace isd
