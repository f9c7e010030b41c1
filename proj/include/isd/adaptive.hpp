#pragma once

#include "isd/estimators.hpp"
#include "isd/kernels.hpp"
#include "isd/sample.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isd {

struct GridConfig {
    enum class Mode { paper, practical };

    double delta = 0.5;        // h0 = n^{-(1-delta)}
    double rho = 1.2;          // geometric factor below h2
    double ell_scale = 3.0;    // ell(n) = ell_scale / log log n
    Mode mode = Mode::practical;
    std::optional<double> L;   // bound on int f^2; nullopt => estimate via T_n(h_min)
};

std::string mode_name(GridConfig::Mode m);
GridConfig::Mode mode_by_name(const std::string& name);

// Grid of candidate bandwidths: h0 = n^{-(1-delta)}, h1 = log n / n,
// h2 = ell(n)/n, then geometric decay by rho down to the lower bound
// ((log n)^4/n^2 in paper mode, 1/n^2 in practical mode).
struct BandwidthGrid {
    std::vector<double> bandwidths;   // strictly decreasing
    std::size_t n = 0;
    double h0 = 0.0, h1 = 0.0, h2 = 0.0;
    double ell_n = 0.0;
    double h_lower_bound = 0.0;
    double M = 0.0;                   // 144 ||K||_2^2 L, set once L is resolved
    double L = 0.0;
    GridConfig::Mode mode = GridConfig::Mode::practical;
    bool degenerate = false;          // no geometric tail below h2

    double h_min() const { return bandwidths.back(); }
};

// Throws grid_infeasible when the ordering h0 > h1 > h2 fails (the message
// names the violated inequality) or when n < 8.
BandwidthGrid build_grid(std::size_t n, const GridConfig& cfg);

// sigma_tilde(h, n) = 1/(n sqrt(h))
double sigma_tilde(double h, std::size_t n);

// M = 144 ||K||_2^2 L
double threshold_M(const KernelSpec& k, double L);

// Attaches the threshold constant to a built grid.
void resolve_threshold(BandwidthGrid& grid, const KernelSpec& k, double L);

// d(h): sqrt(2 M log(h0/h)) below h2, ell(n)^{-1/2} on [h2, h0].
double threshold_d(double h, const BandwidthGrid& grid);

struct SelectionTest {
    double h;          // candidate
    double g;          // smaller grid element tested against
    double delta_t;    // |T_n(h) - T_n(g)|
    double threshold;  // sigma_tilde(g,n) d(g)
    bool pass;
};

struct SelectionTrace {
    std::vector<SelectionTest> tests;
    std::vector<double> grid;
    std::vector<double> t_values;   // T_n at each grid element
    double h_hat = 0.0;
    double theta_at_h_hat = 0.0;
    bool fallback = false;
    double M = 0.0;
    double L = 0.0;
    std::string mode;
};

// Lepski rule: the largest grid element whose T_n agrees with every
// smaller element within sigma_tilde * d. If every element with at least
// one comparison fails, returns the smallest element with fallback set.
std::pair<double, SelectionTrace> select_bandwidth(const Sample& s, const KernelSpec& k,
                                                   const BandwidthGrid& grid);

// max(T_n(h_min), 1e-3); the clamp keeps M positive with signed kernels.
double estimate_L(const Sample& s, const KernelSpec& k, const BandwidthGrid& grid);

EstimateResult adaptive_estimate(const Sample& s, const KernelSpec& k,
                                 const GridConfig& cfg, double level,
                                 SelectionTrace* trace_out = nullptr);

std::string trace_to_json(const SelectionTrace& trace);

} // namespace isd
