#pragma once

#include "isd/adaptive.hpp"
#include "isd/densities.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace isd {

// h = c * n^{-2/(4 alpha + 1)}
struct FixedBandwidthRule {
    double alpha = 1.0;
    double c = 1.0;

    double bandwidth(std::size_t n) const;
};

struct ExperimentPlan {
    std::string density_spec = "gaussian:mu=0,sigma=1";
    std::string kernel_name = "gaussian";
    std::variant<FixedBandwidthRule, GridConfig> estimator = FixedBandwidthRule{};
    std::vector<std::size_t> n_list;
    std::size_t replicates = 2;
    std::uint64_t master_seed = 0;
    double ci_level = 0.95;
    int threads = 1;            // execution detail; never affects results
};

struct HistogramBin {
    double h;
    std::size_t count;
};

struct ReportRow {
    std::size_t n = 0;
    bool ok = false;
    std::string error;          // set when the whole row failed (e.g. infeasible grid)
    double mean_error = 0.0;
    double sd_error = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;
    double mean_h = 0.0;
    double median_h = 0.0;
    double fallback_rate = 0.0;
    std::vector<HistogramBin> h_histogram;
    std::optional<double> ks;   // empty when tau^2 is zero or not finite
    std::string ks_reason;      // why ks is absent
};

struct ExperimentReport {
    // resolved configuration echo
    std::string density_spec;
    std::string kernel_name;
    std::string estimator_kind;   // "fixed_h" or "adaptive"
    double fixed_alpha = 0.0, fixed_c = 0.0;
    double delta = 0.0, rho = 0.0, ell_scale = 0.0;
    std::string mode;
    std::string l_mode;           // "given" or "estimated"
    double L = 0.0;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;
    double ci_level = 0.0;
    double theta2_true = 0.0;
    double tau_sq_true = 0.0;     // may be inf

    std::vector<ReportRow> rows;

    std::optional<double> rate_slope;           // log rmse ~ log n
    std::optional<double> rate_slope_stderr;
    std::optional<double> adj_rate_slope;       // log rmse ~ log(n / sqrt(log n))
    std::optional<double> adj_rate_slope_stderr;

    double wall_time_seconds = 0.0;   // not emitted: reports must be byte-reproducible
};

ExperimentReport run_experiment(const ExperimentPlan& plan);

// OLS slope and its standard error for log(rmse) against log(n).
std::pair<double, double> fit_rate(const std::vector<std::size_t>& n_list,
                                   const std::vector<double>& rmse_list);

// sup |F_hat - Phi| over the sample points.
double ks_normality(const std::vector<double>& z);

void emit_csv(const ExperimentReport& report, std::ostream& out);
void emit_json(const ExperimentReport& report, std::ostream& out);
void emit(const ExperimentReport& report, const std::string& format, const std::string& path);

ExperimentReport report_from_json(const std::string& text);
std::string report_to_json_string(const ExperimentReport& report);

ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json_string(const ExperimentPlan& plan);

} // namespace isd
