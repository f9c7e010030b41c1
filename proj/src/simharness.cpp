#include "isd/simharness.hpp"

#include "isd/errors.hpp"
#include "isd/oracle.hpp"
#include "isd/rng.hpp"
#include "isd/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace isd {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_finite_or_string(const json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

struct RepResult {
    double theta = 0.0;
    double h = 0.0;
    bool covered = false;
    bool fallback = false;
};

} // namespace

double FixedBandwidthRule::bandwidth(std::size_t n) const {
    return c * std::pow(static_cast<double>(n), -2.0 / (4.0 * alpha + 1.0));
}

double ks_normality(const std::vector<double>& z) {
    if (z.size() < 20) throw std::invalid_argument("ks_normality: need at least 20 points");
    std::vector<double> s = z;
    std::sort(s.begin(), s.end());
    const double m = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double cdf = stats::norm_cdf(s[i]);
        d = std::max(d, std::fabs((i + 1) / m - cdf));
        d = std::max(d, std::fabs(cdf - i / m));
    }
    return d;
}

std::pair<double, double> fit_rate(const std::vector<std::size_t>& n_list,
                                   const std::vector<double>& rmse_list) {
    if (n_list.size() != rmse_list.size() || n_list.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 matching points");
    const std::size_t m = n_list.size();
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(rmse_list[i] > 0.0))
            throw std::invalid_argument("fit_rate: rmse values must be positive");
        x[i] = std::log(static_cast<double>(n_list[i]));
        y[i] = std::log(rmse_list[i]);
    }
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ssr += r * r;
    }
    const double stderr_ = (m > 2) ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
    return {slope, stderr_};
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
    if (plan.replicates < 2) throw std::invalid_argument("plan: need replicates >= 2");
    if (plan.n_list.empty()) throw std::invalid_argument("plan: empty n_list");
    for (std::size_t i = 1; i < plan.n_list.size(); ++i)
        if (plan.n_list[i] <= plan.n_list[i - 1])
            throw std::invalid_argument("plan: n_list must be strictly increasing");
    if (!(plan.ci_level > 0.0 && plan.ci_level < 1.0))
        throw std::invalid_argument("plan: ci_level must be in (0,1)");

    const auto start = std::chrono::steady_clock::now();
    const TestDensity density = parse_density(plan.density_spec);
    const KernelSpec& kern = kernel_by_name(plan.kernel_name);
    const double theta_true = theta2(density);
    const double tau2_true = tau_sq(density);

    ExperimentReport report;
    report.density_spec = density.spec;
    report.kernel_name = kern.name;
    report.replicates = plan.replicates;
    report.master_seed = plan.master_seed;
    report.ci_level = plan.ci_level;
    report.theta2_true = theta_true;
    report.tau_sq_true = tau2_true;

    const bool adaptive = std::holds_alternative<GridConfig>(plan.estimator);
    if (adaptive) {
        const auto& cfg = std::get<GridConfig>(plan.estimator);
        report.estimator_kind = "adaptive";
        report.delta = cfg.delta;
        report.rho = cfg.rho;
        report.ell_scale = cfg.ell_scale;
        report.mode = mode_name(cfg.mode);
        report.l_mode = cfg.L ? "given" : "estimated";
        report.L = cfg.L ? *cfg.L : 0.0;
    } else {
        const auto& rule = std::get<FixedBandwidthRule>(plan.estimator);
        report.estimator_kind = "fixed_h";
        report.fixed_alpha = rule.alpha;
        report.fixed_c = rule.c;
        report.mode = "none";
    }

    for (std::size_t n : plan.n_list) {
        ReportRow row;
        row.n = n;

        // deterministic feasibility probe before spending replicates
        if (adaptive) {
            try {
                (void)build_grid(n, std::get<GridConfig>(plan.estimator));
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
                std::fprintf(stderr, "skipped n=%zu: %s\n", n, row.error.c_str());
                report.rows.push_back(std::move(row));
                continue;
            }
        }

        const std::size_t reps = plan.replicates;
        std::vector<RepResult> results(reps);
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= reps) return;
                const std::uint64_t seed = rng::derive_seed(plan.master_seed, n, r);
                const Sample s = sample(density, n, seed);
                EstimateResult est;
                if (adaptive) {
                    est = adaptive_estimate(s, kern, std::get<GridConfig>(plan.estimator),
                                            plan.ci_level);
                } else {
                    const double h = std::get<FixedBandwidthRule>(plan.estimator).bandwidth(n);
                    est.theta_hat = t_n(s, kern, h);
                    est.bandwidth = h;
                    est.tau_sq_hat = tau_sq_hat(s, kern, h);
                    est.n = n;
                    std::tie(est.ci_low, est.ci_high) =
                        confidence_interval(est.theta_hat, est.tau_sq_hat, n, plan.ci_level);
                    est.method = Method::tn;
                }
                RepResult& out = results[r];
                out.theta = est.theta_hat;
                out.h = est.bandwidth;
                out.covered = est.ci_low <= theta_true && theta_true <= est.ci_high;
                out.fallback = est.fallback;
            }
        };
        const int nthreads = std::max(1, plan.threads);
        if (nthreads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        // aggregate in replicate order so results do not depend on threading
        double sum_err = 0.0, sum_sq = 0.0, sum_h = 0.0;
        std::size_t n_cov = 0, n_fb = 0;
        for (const auto& r : results) {
            const double err = r.theta - theta_true;
            sum_err += err;
            sum_sq += err * err;
            sum_h += r.h;
            if (r.covered) ++n_cov;
            if (r.fallback) ++n_fb;
        }
        const double R = static_cast<double>(reps);
        row.ok = true;
        row.mean_error = sum_err / R;
        row.rmse = std::sqrt(sum_sq / R);
        row.sd_error = std::sqrt(std::max(0.0, (sum_sq - R * row.mean_error * row.mean_error) / (R - 1.0)));
        row.coverage = static_cast<double>(n_cov) / R;
        row.fallback_rate = static_cast<double>(n_fb) / R;
        row.mean_h = sum_h / R;

        std::vector<double> hs(reps);
        for (std::size_t r = 0; r < reps; ++r) hs[r] = results[r].h;
        std::sort(hs.begin(), hs.end());
        row.median_h = (reps % 2 == 1) ? hs[reps / 2]
                                       : 0.5 * (hs[reps / 2 - 1] + hs[reps / 2]);
        std::map<double, std::size_t> hist;
        for (double h : hs) ++hist[h];
        for (const auto& [h, cnt] : hist) row.h_histogram.push_back({h, cnt});

        if (!std::isfinite(tau2_true)) {
            row.ks_reason = "tau_sq not finite";
        } else if (tau2_true <= 0.0) {
            row.ks_reason = "tau_sq = 0";
        } else if (reps < 20) {
            row.ks_reason = "fewer than 20 replicates";
        } else {
            std::vector<double> z(reps);
            const double scale = 2.0 * std::sqrt(tau2_true);
            for (std::size_t r = 0; r < reps; ++r)
                z[r] = std::sqrt(static_cast<double>(n)) * (results[r].theta - theta_true) / scale;
            row.ks = ks_normality(z);
        }
        std::fprintf(stderr, "done n=%zu (%zu replicates)\n", n, reps);
        report.rows.push_back(std::move(row));
    }

    // rate fits over successful rows
    std::vector<std::size_t> ns;
    std::vector<double> rmses;
    for (const auto& row : report.rows)
        if (row.ok && row.rmse > 0.0) {
            ns.push_back(row.n);
            rmses.push_back(row.rmse);
        }
    if (ns.size() >= 3) {
        auto [slope, se] = fit_rate(ns, rmses);
        report.rate_slope = slope;
        report.rate_slope_stderr = se;
        // regression against log(n / sqrt(log n)), the penalized rate scale
        std::vector<std::size_t> dummy(ns.size());
        std::vector<double> xs(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i)
            xs[i] = static_cast<double>(ns[i]) / std::sqrt(std::log(static_cast<double>(ns[i])));
        double sx = 0, sy = 0;
        std::vector<double> lx(ns.size()), ly(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i) {
            lx[i] = std::log(xs[i]);
            ly[i] = std::log(rmses[i]);
            sx += lx[i];
            sy += ly[i];
        }
        const double mx = sx / ns.size(), my = sy / ns.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        const double slope2 = sxy / sxx;
        double ssr = 0.0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double r = ly[i] - my - slope2 * (lx[i] - mx);
            ssr += r * r;
        }
        report.adj_rate_slope = slope2;
        report.adj_rate_slope_stderr =
            (ns.size() > 2) ? std::sqrt(ssr / (ns.size() - 2) / sxx) : 0.0;
    }

    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void emit_csv(const ExperimentReport& report, std::ostream& out) {
    out << "n,mean_error,sd_error,rmse,coverage,mean_h,ks\n";
    for (const auto& row : report.rows) {
        if (!row.ok) {
            out << row.n << ",nan,nan,nan,nan,nan,nan\n";
            continue;
        }
        out << row.n << ',' << fmt_double(row.mean_error) << ',' << fmt_double(row.sd_error)
            << ',' << fmt_double(row.rmse) << ',' << fmt_double(row.coverage) << ','
            << fmt_double(row.mean_h) << ',' << (row.ks ? fmt_double(*row.ks) : "nan") << '\n';
    }
    out << "# density=" << report.density_spec << '\n';
    out << "# kernel=" << report.kernel_name << '\n';
    out << "# estimator=" << report.estimator_kind << '\n';
    if (report.estimator_kind == "fixed_h") {
        out << "# fixed_alpha=" << fmt_double(report.fixed_alpha)
            << " fixed_c=" << fmt_double(report.fixed_c) << '\n';
    } else {
        out << "# delta=" << fmt_double(report.delta) << " rho=" << fmt_double(report.rho)
            << " ell_scale=" << fmt_double(report.ell_scale) << '\n';
        out << "# L_mode=" << report.l_mode;
        if (report.l_mode == "given") out << " L=" << fmt_double(report.L);
        out << '\n';
    }
    out << "# mode=" << report.mode << '\n';
    out << "# seed=" << report.master_seed << '\n';
    out << "# replicates=" << report.replicates << '\n';
    out << "# ci_level=" << fmt_double(report.ci_level) << '\n';
    out << "# theta2_true=" << fmt_double(report.theta2_true) << '\n';
    out << "# tau_sq_true=" << fmt_double(report.tau_sq_true) << '\n';
    if (report.rate_slope)
        out << "# rate_slope=" << fmt_double(*report.rate_slope)
            << " stderr=" << fmt_double(*report.rate_slope_stderr) << '\n';
    if (report.adj_rate_slope)
        out << "# adj_rate_slope=" << fmt_double(*report.adj_rate_slope)
            << " stderr=" << fmt_double(*report.adj_rate_slope_stderr) << '\n';
    for (const auto& row : report.rows) {
        if (!row.ok) out << "# error n=" << row.n << ": " << row.error << '\n';
        else if (!row.ks) out << "# ks omitted n=" << row.n << ": " << row.ks_reason << '\n';
    }
}

namespace {

json row_to_json(const ReportRow& row) {
    json j;
    j["n"] = row.n;
    j["ok"] = row.ok;
    if (!row.ok) {
        j["error"] = row.error;
        return j;
    }
    j["mean_error"] = row.mean_error;
    j["sd_error"] = row.sd_error;
    j["rmse"] = row.rmse;
    j["coverage"] = row.coverage;
    j["mean_h"] = row.mean_h;
    j["median_h"] = row.median_h;
    j["fallback_rate"] = row.fallback_rate;
    json hist = json::array();
    for (const auto& bin : row.h_histogram)
        hist.push_back({{"h", bin.h}, {"count", bin.count}});
    j["selected_h_histogram"] = std::move(hist);
    if (row.ks)
        j["ks"] = *row.ks;
    else
        j["ks_reason"] = row.ks_reason;
    return j;
}

ReportRow row_from_json(const json& j) {
    ReportRow row;
    row.n = j.at("n").get<std::size_t>();
    row.ok = j.at("ok").get<bool>();
    if (!row.ok) {
        row.error = j.at("error").get<std::string>();
        return row;
    }
    row.mean_error = j.at("mean_error").get<double>();
    row.sd_error = j.at("sd_error").get<double>();
    row.rmse = j.at("rmse").get<double>();
    row.coverage = j.at("coverage").get<double>();
    row.mean_h = j.at("mean_h").get<double>();
    row.median_h = j.at("median_h").get<double>();
    row.fallback_rate = j.at("fallback_rate").get<double>();
    for (const auto& bin : j.at("selected_h_histogram"))
        row.h_histogram.push_back({bin.at("h").get<double>(), bin.at("count").get<std::size_t>()});
    if (j.contains("ks"))
        row.ks = j.at("ks").get<double>();
    else
        row.ks_reason = j.at("ks_reason").get<std::string>();
    return row;
}

json report_to_json(const ExperimentReport& r) {
    json j;
    j["density"] = r.density_spec;
    j["kernel"] = r.kernel_name;
    j["estimator"] = r.estimator_kind;
    if (r.estimator_kind == "fixed_h") {
        j["fixed_alpha"] = r.fixed_alpha;
        j["fixed_c"] = r.fixed_c;
    } else {
        j["delta"] = r.delta;
        j["rho"] = r.rho;
        j["ell_scale"] = r.ell_scale;
        j["L_mode"] = r.l_mode;
        if (r.l_mode == "given") j["L"] = r.L;
    }
    j["mode"] = r.mode;
    j["seed"] = r.master_seed;
    j["replicates"] = r.replicates;
    j["ci_level"] = r.ci_level;
    j["theta2_true"] = r.theta2_true;
    j["tau_sq_true"] = finite_or_string(r.tau_sq_true);
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back(row_to_json(row));
    j["rows"] = std::move(rows);
    if (r.rate_slope) {
        j["rate_slope"] = *r.rate_slope;
        j["rate_slope_stderr"] = *r.rate_slope_stderr;
    }
    if (r.adj_rate_slope) {
        j["adj_rate_slope"] = *r.adj_rate_slope;
        j["adj_rate_slope_stderr"] = *r.adj_rate_slope_stderr;
    }
    return j;
}

} // namespace

std::string report_to_json_string(const ExperimentReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentReport r;
    r.density_spec = j.at("density").get<std::string>();
    r.kernel_name = j.at("kernel").get<std::string>();
    r.estimator_kind = j.at("estimator").get<std::string>();
    if (r.estimator_kind == "fixed_h") {
        r.fixed_alpha = j.at("fixed_alpha").get<double>();
        r.fixed_c = j.at("fixed_c").get<double>();
        r.mode = j.value("mode", "none");
    } else {
        r.delta = j.at("delta").get<double>();
        r.rho = j.at("rho").get<double>();
        r.ell_scale = j.at("ell_scale").get<double>();
        r.l_mode = j.at("L_mode").get<std::string>();
        if (j.contains("L")) r.L = j.at("L").get<double>();
        r.mode = j.at("mode").get<std::string>();
    }
    if (j.contains("mode")) r.mode = j.at("mode").get<std::string>();
    r.master_seed = j.at("seed").get<std::uint64_t>();
    r.replicates = j.at("replicates").get<std::size_t>();
    r.ci_level = j.at("ci_level").get<double>();
    r.theta2_true = j.at("theta2_true").get<double>();
    r.tau_sq_true = from_finite_or_string(j.at("tau_sq_true"));
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from_json(row));
    if (j.contains("rate_slope")) {
        r.rate_slope = j.at("rate_slope").get<double>();
        r.rate_slope_stderr = j.at("rate_slope_stderr").get<double>();
    }
    if (j.contains("adj_rate_slope")) {
        r.adj_rate_slope = j.at("adj_rate_slope").get<double>();
        r.adj_rate_slope_stderr = j.at("adj_rate_slope_stderr").get<double>();
    }
    return r;
}

void emit(const ExperimentReport& report, const std::string& format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    if (format == "csv")
        emit_csv(report, out);
    else if (format == "json")
        emit_json(report, out);
    else
        throw std::invalid_argument("unknown report format: " + format);
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

void emit_json(const ExperimentReport& report, std::ostream& out) {
    out << report_to_json_string(report);
}

std::string plan_to_json_string(const ExperimentPlan& plan) {
    json j;
    j["density"] = plan.density_spec;
    j["kernel"] = plan.kernel_name;
    if (std::holds_alternative<FixedBandwidthRule>(plan.estimator)) {
        const auto& rule = std::get<FixedBandwidthRule>(plan.estimator);
        j["estimator"] = {{"kind", "fixed_h"}, {"alpha", rule.alpha}, {"c", rule.c}};
    } else {
        const auto& cfg = std::get<GridConfig>(plan.estimator);
        json e = {{"kind", "adaptive"},
                  {"delta", cfg.delta},
                  {"rho", cfg.rho},
                  {"ell_scale", cfg.ell_scale},
                  {"mode", mode_name(cfg.mode)}};
        if (cfg.L)
            e["L"] = *cfg.L;
        else
            e["L"] = "estimated";
        j["estimator"] = std::move(e);
    }
    j["n_list"] = plan.n_list;
    j["replicates"] = plan.replicates;
    j["seed"] = plan.master_seed;
    j["ci_level"] = plan.ci_level;
    j["threads"] = plan.threads;
    return j.dump(2) + "\n";
}

ExperimentPlan plan_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw malformed_input(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentPlan plan;
    try {
        plan.density_spec = j.at("density").get<std::string>();
        plan.kernel_name = j.at("kernel").get<std::string>();
        const json& e = j.at("estimator");
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "fixed_h") {
            FixedBandwidthRule rule;
            rule.alpha = e.value("alpha", 1.0);
            rule.c = e.value("c", 1.0);
            plan.estimator = rule;
        } else if (kind == "adaptive") {
            GridConfig cfg;
            cfg.delta = e.value("delta", 0.5);
            cfg.rho = e.value("rho", 1.2);
            cfg.ell_scale = e.value("ell_scale", 3.0);
            cfg.mode = mode_by_name(e.value("mode", "practical"));
            if (e.contains("L") && e.at("L").is_number()) cfg.L = e.at("L").get<double>();
            plan.estimator = cfg;
        } else {
            throw malformed_input("unknown estimator kind: " + kind);
        }
        plan.n_list = j.at("n_list").get<std::vector<std::size_t>>();
        plan.replicates = j.at("replicates").get<std::size_t>();
        plan.master_seed = j.at("seed").get<std::uint64_t>();
        plan.ci_level = j.value("ci_level", 0.95);
        plan.threads = j.value("threads", 1);
    } catch (const json::exception& e) {
        throw malformed_input(std::string("bad plan config: ") + e.what());
    }
    return plan;
}

} // namespace isd
