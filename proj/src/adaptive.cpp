#include "isd/adaptive.hpp"

#include "isd/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace isd {

std::string mode_name(GridConfig::Mode m) {
    return m == GridConfig::Mode::paper ? "paper" : "practical";
}

GridConfig::Mode mode_by_name(const std::string& name) {
    if (name == "paper") return GridConfig::Mode::paper;
    if (name == "practical") return GridConfig::Mode::practical;
    throw std::invalid_argument("unknown grid mode: " + name);
}

BandwidthGrid build_grid(std::size_t n, const GridConfig& cfg) {
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("delta must be in (0,1)");
    if (!(cfg.rho > 1.0)) throw std::invalid_argument("rho must be > 1");
    if (!(cfg.ell_scale > 0.0)) throw std::invalid_argument("ell_scale must be > 0");
    if (n < 8) throw grid_infeasible("need n >= 8 so that log log n > 0");

    const double nd = static_cast<double>(n);
    const double logn = std::log(nd);

    BandwidthGrid g;
    g.n = n;
    g.mode = cfg.mode;
    g.ell_n = cfg.ell_scale / std::log(logn);
    g.h0 = std::pow(nd, -(1.0 - cfg.delta));
    g.h1 = logn / nd;
    g.h2 = g.ell_n / nd;
    g.h_lower_bound = (cfg.mode == GridConfig::Mode::paper)
                          ? std::pow(logn, 4.0) / (nd * nd)
                          : 1.0 / (nd * nd);

    if (!(g.h1 < g.h0))
        throw grid_infeasible("ordering h1 < h0 violated: need n^delta > log n");
    if (!(g.h2 < g.h1))
        throw grid_infeasible("ordering h2 < h1 violated: need ell(n) < log n");

    g.bandwidths = {g.h0, g.h1};
    for (double h = g.h2; h >= g.h_lower_bound; h /= cfg.rho)
        g.bandwidths.push_back(h);
    g.degenerate = g.bandwidths.size() <= 3;
    return g;
}

double sigma_tilde(double h, std::size_t n) {
    if (!(h > 0.0)) throw invalid_bandwidth(h);
    return 1.0 / (static_cast<double>(n) * std::sqrt(h));
}

double threshold_M(const KernelSpec& k, double L) {
    if (!(L > 0.0)) throw std::invalid_argument("L must be > 0");
    return 144.0 * l2_norm_sq(k) * L;
}

void resolve_threshold(BandwidthGrid& grid, const KernelSpec& k, double L) {
    grid.L = L;
    grid.M = threshold_M(k, L);
}

double threshold_d(double h, const BandwidthGrid& grid) {
    if (h > grid.h0 * (1.0 + 1e-12) || h < grid.h_lower_bound * (1.0 - 1e-12))
        throw std::out_of_range("threshold_d: bandwidth outside grid range");
    if (h >= grid.h2 * (1.0 - 1e-12)) return 1.0 / std::sqrt(grid.ell_n);
    return std::sqrt(2.0 * grid.M * std::log(grid.h0 / h));
}

std::pair<double, SelectionTrace> select_bandwidth(const Sample& s, const KernelSpec& k,
                                                   const BandwidthGrid& grid) {
    if (grid.bandwidths.empty()) throw std::invalid_argument("empty bandwidth grid");
    if (!(grid.M > 0.0)) throw std::invalid_argument("grid threshold constant M unset");

    SelectionTrace trace;
    trace.grid = grid.bandwidths;
    trace.M = grid.M;
    trace.L = grid.L;
    trace.mode = mode_name(grid.mode);

    const std::size_t m = grid.bandwidths.size();
    trace.t_values.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        trace.t_values[i] = t_n(s, k, grid.bandwidths[i]);

    std::size_t selected = m;   // sentinel: none
    for (std::size_t i = 0; i < m; ++i) {
        bool all_pass = true;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double g = grid.bandwidths[j];
            const double delta_t = std::fabs(trace.t_values[i] - trace.t_values[j]);
            const double thr = sigma_tilde(g, grid.n) * threshold_d(g, grid);
            const bool pass = delta_t <= thr;
            trace.tests.push_back({grid.bandwidths[i], g, delta_t, thr, pass});
            if (!pass) all_pass = false;
        }
        // the smallest element has no comparisons; it only counts as a
        // regular candidate when the grid has a single element
        const bool vacuous = (i + 1 == m) && m > 1;
        if (all_pass && !vacuous && selected == m) selected = i;
    }

    if (selected == m) {
        trace.fallback = true;
        selected = m - 1;
    }
    trace.h_hat = grid.bandwidths[selected];
    trace.theta_at_h_hat = trace.t_values[selected];
    return {trace.h_hat, std::move(trace)};
}

double estimate_L(const Sample& s, const KernelSpec& k, const BandwidthGrid& grid) {
    constexpr double kFloor = 1e-3;
    return std::max(t_n(s, k, grid.h_min()), kFloor);
}

EstimateResult adaptive_estimate(const Sample& s, const KernelSpec& k,
                                 const GridConfig& cfg, double level,
                                 SelectionTrace* trace_out) {
    BandwidthGrid grid = build_grid(s.n(), cfg);
    double L;
    if (cfg.L) {
        L = *cfg.L;
    } else if (cfg.mode == GridConfig::Mode::paper) {
        L = estimate_L(s, k, grid);
    } else {
        // the practical-mode floor 1/n^2 leaves T_n(h_min) with O(1)
        // expected pair count, far too noisy for L; estimate at the
        // paper-mode floor (log n)^4/n^2 where the statistic concentrates
        GridConfig pc = cfg;
        pc.mode = GridConfig::Mode::paper;
        L = estimate_L(s, k, build_grid(s.n(), pc));
    }
    resolve_threshold(grid, k, L);

    auto [h_hat, trace] = select_bandwidth(s, k, grid);

    EstimateResult r;
    r.theta_hat = trace.theta_at_h_hat;
    r.bandwidth = h_hat;
    r.tau_sq_hat = tau_sq_hat(s, k, h_hat);
    r.n = s.n();
    r.level = level;
    std::tie(r.ci_low, r.ci_high) = confidence_interval(r.theta_hat, r.tau_sq_hat, r.n, level);
    r.method = Method::adaptive;
    r.fallback = trace.fallback;
    if (trace_out) *trace_out = std::move(trace);
    return r;
}

std::string trace_to_json(const SelectionTrace& trace) {
    nlohmann::json j;
    j["h_hat"] = trace.h_hat;
    j["fallback"] = trace.fallback;
    j["mode"] = trace.mode;
    j["M"] = trace.M;
    j["L"] = trace.L;
    j["grid"] = trace.grid;
    j["t_values"] = trace.t_values;
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : trace.tests)
        tests.push_back({{"h", t.h},
                         {"g", t.g},
                         {"delta_T", t.delta_t},
                         {"threshold", t.threshold},
                         {"pass", t.pass}});
    j["tests"] = std::move(tests);
    return j.dump();
}

} // namespace isd
