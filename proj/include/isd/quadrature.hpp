#pragma once

#include "isd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace isd::quad {

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
inline constexpr double kron_x[8] = {
    0.000000000000000000, 0.207784955007898468, 0.405845151377397167,
    0.586087235467691130, 0.741531185599394440, 0.864864423359769073,
    0.949107912342758525, 0.991455371120812639};
inline constexpr double kron_w[8] = {
    0.209482141084727828, 0.204432940075298892, 0.190350578064785410,
    0.169004726639267903, 0.140653259715525919, 0.104790010322250184,
    0.063092092629978554, 0.022935322010529225};
inline constexpr double gauss_w[4] = {
    0.417959183673469388, 0.381830050505118945, 0.279705391489276668,
    0.129484966168869693};

struct Segment {
    double a, b, value, error;
};

template <class F>
Segment gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(c);
    double kron = kron_w[0] * f0;
    double gauss = gauss_w[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kron_x[i];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kron_w[i] * fsum;
        if (i % 2 == 0) gauss += gauss_w[i / 2] * fsum;
    }
    kron *= half;
    gauss *= half;
    return {a, b, kron, std::fabs(kron - gauss)};
}

} // namespace detail

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_segments = 20000;
};

// Adaptive Gauss-Kronrod integration of f over [a,b].
template <class F>
double integrate(const F& f, double a, double b, Options opt = {}) {
    if (a == b) return 0.0;
    std::vector<detail::Segment> segs;
    segs.push_back(detail::gk15(f, a, b));
    for (;;) {
        double total = 0.0, err = 0.0;
        for (const auto& s : segs) {
            total += s.value;
            err += s.error;
        }
        if (err <= opt.abs_tol + opt.rel_tol * std::fabs(total)) return total;
        if (static_cast<int>(segs.size()) >= opt.max_segments)
            throw quadrature_failure("did not converge within segment budget");
        auto worst = std::max_element(segs.begin(), segs.end(),
                                      [](const auto& l, const auto& r) { return l.error < r.error; });
        const detail::Segment bad = *worst;
        const double mid = 0.5 * (bad.a + bad.b);
        if (mid <= bad.a || mid >= bad.b) {
            // interval exhausted at machine precision; accept current estimate
            double v = 0.0;
            for (const auto& s : segs) v += s.value;
            return v;
        }
        *worst = detail::gk15(f, bad.a, mid);
        segs.push_back(detail::gk15(f, mid, bad.b));
    }
}

// Integration with user-supplied interior split points (e.g. integrable
// singularities or kinks); points outside (a,b) are ignored.
template <class F>
double integrate_split(const F& f, double a, double b, std::vector<double> points, Options opt = {}) {
    points.push_back(a);
    points.push_back(b);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    double total = 0.0;
    Options seg_opt = opt;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double lo = points[i], hi = points[i + 1];
        if (hi <= a || lo >= b) continue;
        total += integrate(f, std::max(lo, a), std::min(hi, b), seg_opt);
    }
    return total;
}

} // namespace isd::quad
