#include "isd/adaptive.hpp"
#include "isd/densities.hpp"
#include "isd/errors.hpp"
#include "isd/estimators.hpp"
#include "isd/kernels.hpp"
#include "isd/sample.hpp"
#include "isd/simharness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitMalformed = 2;
constexpr int kExitGridInfeasible = 3;
constexpr int kExitSampleTooSmall = 4;

bool parse_number(const std::string& token, double& out) {
    std::size_t pos = 0;
    try {
        out = std::stod(token, &pos);
    } catch (const std::exception&) {
        return false;
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    return pos == token.size() && std::isfinite(out);
}

// One finite real per line; blank lines ignored; a non-numeric first line
// is treated as a single-column CSV header.
std::vector<double> read_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw isd::malformed_input("cannot open input file: " + path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = line;
        while (!t.empty() && (t.back() == '\r' || std::isspace(static_cast<unsigned char>(t.back()))))
            t.pop_back();
        std::size_t start = 0;
        while (start < t.size() && std::isspace(static_cast<unsigned char>(t[start]))) ++start;
        t = t.substr(start);
        if (t.empty()) continue;
        double v;
        if (!parse_number(t, v)) {
            if (first_content) {
                first_content = false;   // header row
                continue;
            }
            throw isd::malformed_input("line " + std::to_string(lineno) +
                                       " is not a finite number: '" + t + "'");
        }
        first_content = false;
        values.push_back(v);
    }
    return values;
}

struct GridFlags {
    double delta = 0.5;
    double rho = 1.2;
    double ell_scale = 3.0;
    std::string mode = "practical";
    double L = 0.0;   // 0 means "estimate from the data"

    isd::GridConfig to_config() const {
        isd::GridConfig cfg;
        cfg.delta = delta;
        cfg.rho = rho;
        cfg.ell_scale = ell_scale;
        cfg.mode = isd::mode_by_name(mode);
        if (L > 0.0) cfg.L = L;
        return cfg;
    }
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--delta", g.delta, "largest bandwidth exponent: h0 = n^-(1-delta)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    cmd->add_option("--rho", g.rho, "geometric grid factor (> 1)")
        ->check(CLI::Range(1.0 + 1e-9, 1e9))
        ->capture_default_str();
    cmd->add_option("--ell-scale", g.ell_scale, "ell(n) = ell_scale / log log n")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--mode", g.mode, "grid lower bound: paper ((log n)^4/n^2) or practical (1/n^2)")
        ->check(CLI::IsMember({"paper", "practical"}))
        ->capture_default_str();
    cmd->add_option("--L", g.L, "known bound on the integrated squared density (default: estimated)")
        ->check(CLI::NonNegativeNumber);
}

json grid_config_json(const GridFlags& g) {
    json j{{"delta", g.delta},
           {"rho", g.rho},
           {"ell_scale", g.ell_scale},
           {"mode", g.mode}};
    if (g.L > 0.0)
        j["L"] = g.L;
    else
        j["L"] = "estimated";
    return j;
}

int run_estimate(const std::string& input, const std::string& kernel_name,
                 double h, bool adaptive, const std::string& method_flag,
                 const GridFlags& gflags, double level) {
    const isd::KernelSpec& k = isd::kernel_by_name(kernel_name);
    std::vector<double> values = read_column(input);
    if (values.size() < 2) {
        std::cerr << "error: need at least 2 observations, got " << values.size() << "\n";
        return kExitSampleTooSmall;
    }
    isd::Sample s(std::move(values));

    isd::EstimateResult r;
    json config{{"input", input},
                {"kernel", k.name},
                {"level", level}};
    if (adaptive) {
        config["method"] = "adaptive";
        config["grid"] = grid_config_json(gflags);
        r = isd::adaptive_estimate(s, k, gflags.to_config(), level);
    } else {
        config["method"] = method_flag;
        config["h"] = h;
        r.bandwidth = h;
        r.n = s.n();
        r.level = level;
        if (method_flag == "tn") {
            r.theta_hat = isd::t_n(s, k, h);
            r.method = isd::Method::tn;
        } else if (method_flag == "tbar") {
            r.theta_hat = isd::t_bar_n(s, k, h);
            r.method = isd::Method::tbar;
        } else {
            r.theta_hat = isd::bickel_ritov(s, k, h);
            r.method = isd::Method::bickel_ritov;
        }
        r.tau_sq_hat = isd::tau_sq_hat(s, k, h);
        std::tie(r.ci_low, r.ci_high) = isd::confidence_interval(r.theta_hat, r.tau_sq_hat,
                                                                 r.n, level);
    }

    json out{{"theta_hat", r.theta_hat},
             {"h", r.bandwidth},
             {"tau_sq_hat", r.tau_sq_hat},
             {"ci", {r.ci_low, r.ci_high}},
             {"n", r.n},
             {"method", isd::method_name(r.method)},
             {"config", std::move(config)}};
    if (adaptive) out["fallback"] = r.fallback;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_grid(std::size_t n, const std::string& kernel_name, const GridFlags& gflags,
             bool as_json) {
    const isd::KernelSpec& k = isd::kernel_by_name(kernel_name);
    isd::GridConfig cfg = gflags.to_config();
    const double L = cfg.L ? *cfg.L : 1.0;

    isd::BandwidthGrid grid;
    try {
        grid = isd::build_grid(n, cfg);
    } catch (const isd::grid_infeasible& e) {
        if (as_json) {
            std::cout << json{{"n", n}, {"feasible", false}, {"reason", e.what()}}.dump() << "\n";
        } else {
            std::cout << "infeasible: " << e.what() << "\n";
        }
        return kExitGridInfeasible;
    }
    isd::resolve_threshold(grid, k, L);

    if (as_json) {
        json rows = json::array();
        for (double h : grid.bandwidths)
            rows.push_back({{"h", h},
                            {"d", isd::threshold_d(h, grid)},
                            {"sigma_tilde", isd::sigma_tilde(h, n)}});
        json j{{"n", n},
               {"feasible", true},
               {"mode", isd::mode_name(grid.mode)},
               {"h0", grid.h0},
               {"h1", grid.h1},
               {"h2", grid.h2},
               {"ell_n", grid.ell_n},
               {"lower_bound", grid.h_lower_bound},
               {"kernel", k.name},
               {"L", L},
               {"M", grid.M},
               {"size", grid.bandwidths.size()},
               {"degenerate", grid.degenerate},
               {"grid", std::move(rows)}};
        std::cout << j.dump() << "\n";
        return 0;
    }

    std::cout << "n=" << n << " mode=" << isd::mode_name(grid.mode)
              << " delta=" << gflags.delta << " rho=" << gflags.rho
              << " ell_scale=" << gflags.ell_scale << "\n";
    std::cout << "kernel=" << k.name << " L=" << L << " M=" << grid.M << "\n";
    std::cout << "h0=" << grid.h0 << " h1=" << grid.h1 << " h2=" << grid.h2
              << " lower_bound=" << grid.h_lower_bound
              << " size=" << grid.bandwidths.size()
              << (grid.degenerate ? " (degenerate)" : "") << "\n";
    std::cout << "      h                d(h)             sigma_tilde(h,n)\n";
    for (double h : grid.bandwidths) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-16.8e %-16.8e %-16.8e\n", h,
                      isd::threshold_d(h, grid), isd::sigma_tilde(h, n));
        std::cout << buf;
    }
    return 0;
}

int run_simulate(const isd::ExperimentPlan& plan, const std::string& format,
                 const std::string& output) {
    isd::ExperimentReport report = isd::run_experiment(plan);
    if (output.empty() || output == "-") {
        if (format == "csv")
            isd::emit_csv(report, std::cout);
        else
            isd::emit_json(report, std::cout);
    } else {
        isd::emit(report, format, output);
    }
    std::cerr << "wall time: " << report.wall_time_seconds << " s\n";
    bool any_ok = false;
    for (const auto& row : report.rows) {
        any_ok = any_ok || row.ok;
        if (!row.ok) std::cerr << "warning: n=" << row.n << " failed: " << row.error << "\n";
    }
    return any_ok ? 0 : kExitGridInfeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"integrated squared density estimation"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate int f^2 from a column of data");
    est->set_help_flag("--help", "print help");   // frees -h/--h for the bandwidth
    std::string input, kernel_name = "gaussian", method_flag = "tn";
    double h = 0.0, level = 0.95;
    bool adaptive = false;
    GridFlags est_grid;
    est->add_option("--input", input, "data file: one number per line")->required();
    est->add_option("--kernel", kernel_name, "gaussian|box|triangular|epanechnikov")
        ->check(CLI::IsMember({"gaussian", "box", "triangular", "epanechnikov"}))
        ->capture_default_str();
    auto* h_opt = est->add_option("--h", h, "fixed bandwidth")->check(CLI::PositiveNumber);
    auto* ad_opt = est->add_flag("--adaptive", adaptive, "data-driven bandwidth selection");
    h_opt->excludes(ad_opt);
    est->add_option("--method", method_flag, "fixed-bandwidth estimator: tn|tbar|bickel_ritov")
        ->check(CLI::IsMember({"tn", "tbar", "bickel_ritov"}))
        ->capture_default_str();
    est->add_option("--level", level, "confidence level")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    add_grid_flags(est, est_grid);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment over sample sizes");
    std::string config_path, density_spec = "gaussian:mu=0,sigma=1", sim_kernel = "gaussian";
    std::string format = "csv", output;
    std::vector<std::size_t> n_list;
    std::size_t replicates = 100;
    std::uint64_t seed = 0;
    double fixed_alpha = 1.0, fixed_c = 1.0, ci_level = 0.95;
    bool sim_adaptive = false;
    int threads = 1;
    GridFlags sim_grid;
    auto* cfg_opt = sim->add_option("--config", config_path, "plan as a JSON file");
    sim->add_option("--density", density_spec, "density spec, e.g. laplace:b=1")
        ->capture_default_str();
    sim->add_option("--kernel", sim_kernel, "gaussian|box|triangular|epanechnikov")
        ->check(CLI::IsMember({"gaussian", "box", "triangular", "epanechnikov"}))
        ->capture_default_str();
    sim->add_option("--n", n_list, "sample sizes (strictly increasing)")->delimiter(',');
    sim->add_option("--replicates", replicates, "Monte Carlo replicates per n")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
        ->capture_default_str();
    auto* seed_opt = sim->add_option("--seed", seed, "master seed (required)");
    sim->add_flag("--adaptive", sim_adaptive, "use the data-driven bandwidth");
    sim->add_option("--fixed-alpha", fixed_alpha, "fixed rule: h = c n^{-2/(4 alpha + 1)}")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--fixed-c", fixed_c, "fixed rule constant")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--ci-level", ci_level, "confidence level for coverage")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    sim->add_option("--threads", threads, "worker threads (0 = hardware)")
        ->check(CLI::Range(0, 4096))
        ->capture_default_str();
    sim->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sim->add_option("--output", output, "output path (default stdout)");
    add_grid_flags(sim, sim_grid);

    // grid
    auto* grd = app.add_subcommand("grid", "print the candidate bandwidth grid");
    std::size_t grid_n = 0;
    std::string grid_kernel = "gaussian";
    bool grid_json = false;
    GridFlags grd_grid;
    grd->add_option("--n", grid_n, "sample size")->required()->check(CLI::PositiveNumber);
    grd->add_option("--kernel", grid_kernel, "kernel for the threshold constant")
        ->check(CLI::IsMember({"gaussian", "box", "triangular", "epanechnikov"}))
        ->capture_default_str();
    grd->add_flag("--json", grid_json, "single-line JSON output");
    add_grid_flags(grd, grd_grid);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (est->parsed()) {
            if (!adaptive && !(h > 0.0)) {
                std::cerr << "error: provide --h or --adaptive\n";
                return kExitMalformed;
            }
            return run_estimate(input, kernel_name, h, adaptive, method_flag, est_grid, level);
        }
        if (sim->parsed()) {
            isd::ExperimentPlan plan;
            if (*cfg_opt) {
                std::ifstream in(config_path);
                if (!in) throw isd::malformed_input("cannot open config file: " + config_path);
                std::ostringstream ss;
                ss << in.rdbuf();
                plan = isd::plan_from_json(ss.str());
            } else {
                if (!*seed_opt) {
                    std::cerr << "error: --seed is required (no silent nondeterminism)\n";
                    return kExitMalformed;
                }
                if (n_list.empty()) {
                    std::cerr << "error: --n is required\n";
                    return kExitMalformed;
                }
                plan.density_spec = density_spec;
                plan.kernel_name = sim_kernel;
                plan.n_list = n_list;
                plan.replicates = replicates;
                plan.master_seed = seed;
                plan.ci_level = ci_level;
                if (sim_adaptive)
                    plan.estimator = sim_grid.to_config();
                else
                    plan.estimator = isd::FixedBandwidthRule{fixed_alpha, fixed_c};
            }
            if (sim->count("--threads")) plan.threads = threads;
            if (plan.threads == 0)
                plan.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            std::cerr << "resolved plan: " << isd::plan_to_json_string(plan);
            return run_simulate(plan, format, output);
        }
        return run_grid(grid_n, grid_kernel, grd_grid, grid_json);
    } catch (const isd::grid_infeasible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGridInfeasible;
    } catch (const isd::sample_too_small& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSampleTooSmall;
    } catch (const isd::malformed_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    }
}
