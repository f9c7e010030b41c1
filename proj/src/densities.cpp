#include "isd/densities.hpp"

#include "isd/quadrature.hpp"
#include "isd/rng.hpp"
#include "isd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace isd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// int phi(x;m1,s1) phi(x;m2,s2) dx
double gauss_pair(double m1, double s1, double m2, double s2) {
    return normal_pdf(m1 - m2, 0.0, std::sqrt(s1 * s1 + s2 * s2));
}

// int phi(x;m1,s1) phi(x;m2,s2) phi(x;m3,s3) dx
double gauss_triple(double m1, double s1, double m2, double s2, double m3, double s3) {
    const double v1 = s1 * s1, v2 = s2 * s2;
    const double z12 = gauss_pair(m1, s1, m2, s2);
    const double m12 = (m1 * v2 + m2 * v1) / (v1 + v2);
    const double v12 = v1 * v2 / (v1 + v2);
    return z12 * normal_pdf(m12 - m3, 0.0, std::sqrt(v12 + s3 * s3));
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

TestDensity make_gaussian(double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be > 0");
    TestDensity d;
    d.family = DensityFamily::gaussian;
    d.spec = "gaussian:mu=" + fmt(mu) + ",sigma=" + fmt(sigma);
    d.mu = mu;
    d.sigma = sigma;
    d.sobolev_sup = kInf;
    d.sup_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    d.theta2 = 1.0 / (2.0 * sigma * std::sqrt(M_PI));
    d.theta3 = 1.0 / (2.0 * std::sqrt(3.0) * M_PI * sigma * sigma);
    return d;
}

TestDensity make_laplace(double b) {
    if (!(b > 0.0)) throw std::invalid_argument("laplace: b must be > 0");
    TestDensity d;
    d.family = DensityFamily::laplace;
    d.spec = "laplace:b=" + fmt(b);
    d.b = b;
    d.sobolev_sup = 1.5;
    d.sup_norm = 1.0 / (2.0 * b);
    d.theta2 = 1.0 / (4.0 * b);
    d.theta3 = 1.0 / (12.0 * b * b);
    return d;
}

TestDensity make_uniform(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("uniform: need b > a");
    TestDensity d;
    d.family = DensityFamily::uniform;
    d.spec = "uniform:a=" + fmt(a) + ",b=" + fmt(b);
    d.a = a;
    d.c = b;
    const double w = b - a;
    d.sobolev_sup = 0.5;
    d.sup_norm = 1.0 / w;
    d.theta2 = 1.0 / w;
    d.theta3 = 1.0 / (w * w);
    return d;
}

TestDensity make_mixture(double w, double mu1, double sigma1, double mu2, double sigma2) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("mixture: weight must be in (0,1)");
    if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw std::invalid_argument("mixture: sigmas must be > 0");
    TestDensity d;
    d.family = DensityFamily::mixture;
    d.spec = "mixture:w=" + fmt(w) + ",mu1=" + fmt(mu1) + ",sigma1=" + fmt(sigma1) +
             ",mu2=" + fmt(mu2) + ",sigma2=" + fmt(sigma2);
    d.w = w;
    d.mu1 = mu1;
    d.sigma1 = sigma1;
    d.mu2 = mu2;
    d.sigma2 = sigma2;
    d.sobolev_sup = kInf;

    const double w2 = 1.0 - w;
    d.theta2 = w * w * gauss_pair(mu1, sigma1, mu1, sigma1) +
               2.0 * w * w2 * gauss_pair(mu1, sigma1, mu2, sigma2) +
               w2 * w2 * gauss_pair(mu2, sigma2, mu2, sigma2);

    const double m[2] = {mu1, mu2};
    const double s[2] = {sigma1, sigma2};
    const double wt[2] = {w, w2};
    double t3 = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                t3 += wt[i] * wt[j] * wt[k] *
                      gauss_triple(m[i], s[i], m[j], s[j], m[k], s[k]);
    d.theta3 = t3;

    // sup norm by dense scan (recorded metadata only)
    double lo = std::min(mu1 - 6 * sigma1, mu2 - 6 * sigma2);
    double hi = std::max(mu1 + 6 * sigma1, mu2 + 6 * sigma2);
    double best = 0.0;
    for (int i = 0; i <= 8000; ++i) {
        const double x = lo + (hi - lo) * i / 8000.0;
        best = std::max(best, pdf(d, x));
    }
    d.sup_norm = best;
    return d;
}

TestDensity make_cusp(double gamma) {
    if (!(gamma > -0.5 && gamma < 0.0))
        throw std::invalid_argument("cusp: gamma must be in (-1/2, 0)");
    TestDensity d;
    d.family = DensityFamily::cusp;
    d.spec = "cusp:gamma=" + fmt(gamma);
    d.gamma = gamma;
    const double c = 0.5 * (gamma + 1.0);
    d.sobolev_sup = gamma + 0.5;
    d.sup_norm = kInf;
    d.theta2 = 2.0 * c * c / (2.0 * gamma + 1.0);
    d.theta3 = (3.0 * gamma + 1.0 > 0.0) ? 2.0 * c * c * c / (3.0 * gamma + 1.0) : kInf;
    return d;
}

TestDensity parse_density(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, double> kv;
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::stringstream rest(spec.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw malformed_input("density parameter without '=': " + item);
            try {
                kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw malformed_input("bad density parameter value: " + item);
            }
        }
    }
    auto get = [&](const std::string& key, double def) {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    };
    if (name == "gaussian") return make_gaussian(get("mu", 0.0), get("sigma", 1.0));
    if (name == "laplace") return make_laplace(get("b", 1.0));
    if (name == "uniform") return make_uniform(get("a", 0.0), get("b", 1.0));
    if (name == "mixture")
        return make_mixture(get("w", 0.5), get("mu1", -1.0), get("sigma1", 0.5),
                            get("mu2", 1.0), get("sigma2", 0.5));
    if (name == "cusp") return make_cusp(get("gamma", -0.3));
    throw malformed_input("unknown density family: " + name);
}

double pdf(const TestDensity& d, double x) {
    switch (d.family) {
        case DensityFamily::gaussian:
            return normal_pdf(x, d.mu, d.sigma);
        case DensityFamily::laplace:
            return std::exp(-std::fabs(x) / d.b) / (2.0 * d.b);
        case DensityFamily::uniform:
            return (x >= d.a && x <= d.c) ? 1.0 / (d.c - d.a) : 0.0;
        case DensityFamily::mixture:
            return d.w * normal_pdf(x, d.mu1, d.sigma1) +
                   (1.0 - d.w) * normal_pdf(x, d.mu2, d.sigma2);
        case DensityFamily::cusp:
            if (std::fabs(x) > 1.0) return 0.0;
            return 0.5 * (d.gamma + 1.0) * std::pow(std::fabs(x), d.gamma);
    }
    return 0.0;
}

double cdf(const TestDensity& d, double x) {
    switch (d.family) {
        case DensityFamily::gaussian:
            return stats::norm_cdf((x - d.mu) / d.sigma);
        case DensityFamily::laplace:
            return x < 0.0 ? 0.5 * std::exp(x / d.b) : 1.0 - 0.5 * std::exp(-x / d.b);
        case DensityFamily::uniform:
            return std::clamp((x - d.a) / (d.c - d.a), 0.0, 1.0);
        case DensityFamily::mixture:
            return d.w * stats::norm_cdf((x - d.mu1) / d.sigma1) +
                   (1.0 - d.w) * stats::norm_cdf((x - d.mu2) / d.sigma2);
        case DensityFamily::cusp: {
            if (x <= -1.0) return 0.0;
            if (x >= 1.0) return 1.0;
            const double s = x < 0.0 ? -1.0 : 1.0;
            return 0.5 + s * 0.5 * std::pow(std::fabs(x), d.gamma + 1.0);
        }
    }
    return 0.0;
}

double theta2(const TestDensity& d) { return d.theta2; }
double theta3(const TestDensity& d) { return d.theta3; }

double tau_sq(const TestDensity& d) {
    if (!std::isfinite(d.theta3)) return kInf;
    return std::max(0.0, d.theta3 - d.theta2 * d.theta2);
}

double autocorrelation(const TestDensity& d, double t) {
    const double a = std::fabs(t);
    switch (d.family) {
        case DensityFamily::gaussian:
            return normal_pdf(a, 0.0, d.sigma * std::sqrt(2.0));
        case DensityFamily::laplace:
            return (1.0 + a / d.b) * std::exp(-a / d.b) / (4.0 * d.b);
        case DensityFamily::uniform: {
            const double w = d.c - d.a;
            return a >= w ? 0.0 : (w - a) / (w * w);
        }
        case DensityFamily::mixture: {
            const double m[2] = {d.mu1, d.mu2};
            const double s[2] = {d.sigma1, d.sigma2};
            const double wt[2] = {d.w, 1.0 - d.w};
            double r = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    r += wt[i] * wt[j] *
                         normal_pdf(a - (m[i] - m[j]), 0.0,
                                    std::sqrt(s[i] * s[i] + s[j] * s[j]));
            return r;
        }
        case DensityFamily::cusp: {
            // integrand f(x) f(x+a) is supported on [-1, 1-a] with integrable
            // singularities at x = 0 and x = -a
            if (a >= 2.0) return 0.0;
            const double cc = 0.5 * (d.gamma + 1.0);
            quad::Options opt;
            opt.rel_tol = 1e-9;
            opt.abs_tol = 1e-12;
            opt.max_segments = 60000;
            const double g = d.gamma;
            return cc * cc *
                   quad::integrate_split(
                       [g, a](double x) {
                           return std::pow(std::fabs(x), g) * std::pow(std::fabs(x + a), g);
                       },
                       -1.0, 1.0 - a, {0.0, -a}, opt);
        }
    }
    return 0.0;
}

Sample sample(const TestDensity& d, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw sample_too_small(n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng::uniform01(seed, 2 * i);
        switch (d.family) {
            case DensityFamily::gaussian:
                out[i] = d.mu + d.sigma * stats::norm_quantile(u);
                break;
            case DensityFamily::laplace:
                out[i] = u < 0.5 ? d.b * std::log(2.0 * u) : -d.b * std::log(2.0 * (1.0 - u));
                break;
            case DensityFamily::uniform:
                out[i] = d.a + (d.c - d.a) * u;
                break;
            case DensityFamily::mixture: {
                const double u2 = rng::uniform01(seed, 2 * i + 1);
                if (u < d.w)
                    out[i] = d.mu1 + d.sigma1 * stats::norm_quantile(u2);
                else
                    out[i] = d.mu2 + d.sigma2 * stats::norm_quantile(u2);
                break;
            }
            case DensityFamily::cusp: {
                const double q = u - 0.5;
                const double s = q < 0.0 ? -1.0 : 1.0;
                out[i] = s * std::pow(2.0 * std::fabs(q), 1.0 / (d.gamma + 1.0));
                break;
            }
        }
    }
    return Sample(std::move(out));
}

std::pair<double, double> effective_support(const TestDensity& d) {
    switch (d.family) {
        case DensityFamily::gaussian:
            return {d.mu - 9.0 * d.sigma, d.mu + 9.0 * d.sigma};
        case DensityFamily::laplace:
            return {-34.0 * d.b, 34.0 * d.b};
        case DensityFamily::uniform:
            return {d.a, d.c};
        case DensityFamily::mixture:
            return {std::min(d.mu1 - 9.0 * d.sigma1, d.mu2 - 9.0 * d.sigma2),
                    std::max(d.mu1 + 9.0 * d.sigma1, d.mu2 + 9.0 * d.sigma2)};
        case DensityFamily::cusp:
            return {-1.0, 1.0};
    }
    return {0.0, 0.0};
}

} // namespace isd
