#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "opshrink/opshrink.hpp"

namespace opshrink::cli {

namespace {

namespace fs = std::filesystem;

/// Files are written next to their destination and renamed into place only
/// after every output succeeded; leftovers are removed on failure.
class StagedOutputs {
public:
    StagedOutputs() = default;
    StagedOutputs(const StagedOutputs&) = delete;
    StagedOutputs& operator=(const StagedOutputs&) = delete;
    ~StagedOutputs() {
        for (const auto& [staged, final_path] : files_) {
            std::error_code ec;
            fs::remove(staged, ec);
        }
    }

    fs::path stage(const fs::path& destination) {
        fs::path staged = destination;
        staged += ".partial";
        files_.emplace_back(staged, destination);
        return staged;
    }

    void commit() {
        for (const auto& [staged, final_path] : files_) {
            std::error_code ec;
            fs::rename(staged, final_path, ec);
            if (ec) {
                throw IoError(final_path.string() + ": cannot move output into place: " + ec.message());
            }
        }
        files_.clear();
    }

private:
    std::vector<std::pair<fs::path, fs::path>> files_;
};

std::vector<double> parse_real_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError(flag + ": cannot parse '" + item + "' as a number");
        }
    }
    return values;
}

std::vector<double> linspace(double lo, double hi, int points) {
    if (points < 1) {
        throw ConfigError("--points must be >= 1");
    }
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) {
        grid.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    }
    return grid;
}

std::string render_report(const DenoiseReport& report, const DataMatrix& y, double tolerance) {
    std::ostringstream os;
    os << "shrinker=" << shrinker_name(report.shrinker) << '\n';
    os << "rows=" << y.rows() << '\n';
    os << "cols=" << y.cols() << '\n';
    os << "gamma=" << format_real(report.gamma_used) << '\n';
    os << "noise_scale=" << format_real(y.noise_scale) << '\n';
    os << "tolerance=" << format_real(tolerance) << '\n';
    os << "detected_rank=" << report.detected_rank << '\n';
    os << "predicted_loss=" << format_real(report.predicted_loss) << '\n';
    for (std::size_t k = 0; k < report.per_component.size(); ++k) {
        const auto& c = report.per_component[k];
        const std::string prefix = "component." + std::to_string(k + 1) + ".";
        os << prefix << "sigma=" << format_real(c.sigma_observed) << '\n';
        os << prefix << "t_hat=" << format_real(c.t_hat) << '\n';
        os << prefix << "c_hat=" << format_real(c.c_hat) << '\n';
        os << prefix << "c_tilde_hat=" << format_real(c.c_tilde_hat) << '\n';
        os << prefix << "q=" << format_real(c.q_applied) << '\n';
    }
    return os.str();
}

ShrinkerKind parse_shrinker(const std::string& name) {
    if (name == "optimal") {
        return Optimal{};
    }
    if (name == "oracle-t") {
        return OracleTruth{};
    }
    if (name == "none") {
        return NoShrink{};
    }
    if (name == "hard") {
        return HardThreshold{};
    }
    throw ConfigError("unknown shrinker '" + name + "'");
}

struct DenoiseArgs {
    std::string input;
    std::string output;
    std::string shrinker = "optimal";
    double noise_scale = 1.0;
    double tolerance = 0.02;
    std::string format = "csv";
    bool csv_header = false;
    std::string report;
};

int cmd_denoise(const DenoiseArgs& a, std::ostream& out) {
    const MatrixFormat format = parse_matrix_format(a.format);
    const ShrinkerKind kind = parse_shrinker(a.shrinker);
    const DataMatrix y{read_matrix(a.input, format, a.csv_header), a.noise_scale};
    validate(y);
    const DenoiseResult result = denoise(y, kind, DenoiseOptions{a.tolerance, std::nullopt});

    StagedOutputs staged;
    write_matrix(staged.stage(a.output), result.estimate.values, format, a.csv_header);
    if (!a.report.empty()) {
        const fs::path path = staged.stage(a.report);
        std::ofstream rep(path, std::ios::binary | std::ios::trunc);
        rep << render_report(result.report, y, a.tolerance);
        rep.close();
        if (!rep) {
            throw IoError(a.report + ": write failure");
        }
    }
    staged.commit();
    out << "detected_rank=" << result.report.detected_rank << '\n';
    return kExitOk;
}

struct AsymptoticsArgs {
    double sigma = 0.0;
    double gamma = 1.0;
    bool header = false;
};

int cmd_asymptotics(const AsymptoticsArgs& a, std::ostream& out) {
    if (!std::isfinite(a.sigma) || !std::isfinite(a.gamma)) {
        throw DomainError("--sigma and --gamma must be finite");
    }
    const AspectRatio gamma(a.gamma);
    const ComponentAsymptotics comp = component_from_sigma(a.sigma, gamma);
    const BlockParams block = BlockParams::from_component(comp);
    if (a.header) {
        out << "sigma,gamma,detectable,t,c,c_tilde,q_optimal,loss_optimal,loss_gd\n";
    }
    out << format_real(a.sigma) << ',' << format_real(a.gamma) << ',' << (comp.detectable ? "true" : "false") << ','
        << format_real(comp.t) << ',' << format_real(comp.c) << ',' << format_real(comp.c_tilde) << ','
        << format_real(optimal_q_from_sigma(a.sigma, gamma)) << ',' << format_real(optimal_loss(block)) << ','
        << format_real(gd_loss(block)) << '\n';
    return kExitOk;
}

int write_table(const CurveTable& table, const std::string& path, std::ostream& out) {
    StagedOutputs staged;
    write_curve_table(table, staged.stage(path));
    staged.commit();
    out << "wrote " << table.rows().size() << " rows to " << path << '\n';
    return kExitOk;
}

struct ExperimentArgs {
    std::string out;
    std::uint64_t seed = kDefaultSeed;
    int replicates = 0;
    unsigned threads = 0;
    double tolerance = 0.02;
    std::string factor_law = "gaussian";
    // curves
    double gamma = 0.5;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int points = 100;
    // ratio-sweep
    double gamma_min = 0.05;
    double gamma_max = 1.0;
    double t_offset = 0.05;
    long p = 0;
    // blp-convergence
    double t = 1.1;
    std::string n_grid;
    bool paper_scale = false;
};

void add_common_experiment_flags(CLI::App* sub, ExperimentArgs& a) {
    sub->add_option("--out", a.out, "Output CSV path")->required();
    sub->add_option("--seed", a.seed, "Base seed (u64); replicate j at grid point i uses a derived substream")
        ->capture_default_str();
    sub->add_option("--threads", a.threads, "Worker threads, 0 = all cores; output does not depend on it")
        ->capture_default_str();
}

} // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> head;
    std::vector<std::string> rest;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw ConfigError("--config needs a file argument");
            }
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            (i == 0 ? head : rest).push_back(args[i]);
            continue;
        }
        std::ifstream in(path);
        if (!in) {
            throw IoError(path + ": cannot open config file");
        }
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
            }
            auto strip = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            const std::string key = strip(line.substr(0, eq));
            const std::string value = strip(line.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
            }
            if (value == "true") {
                from_file.push_back("--" + key);
            } else if (value != "false") {
                from_file.push_back("--" + key + "=" + value);
            }
        }
    }
    head.insert(head.end(), from_file.begin(), from_file.end());
    head.insert(head.end(), rest.begin(), rest.end());
    return head;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Operator-norm-optimal singular value shrinkage: denoising, spiked-model asymptotics and "
                 "Monte Carlo experiments.\nExit codes: 0 success, 2 I/O or file format, 3 configuration or domain."};
    app.name("opshrink");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    DenoiseArgs den;
    auto* denoise_cmd = app.add_subcommand("denoise", "Denoise a p x n matrix (rows = features) by singular value shrinkage");
    denoise_cmd->add_option("input", den.input, "Input matrix file")->required();
    denoise_cmd->add_option("output", den.output, "Output matrix file (same format as input)")->required();
    denoise_cmd->add_option("--shrinker", den.shrinker, "Singular value rule: optimal | oracle-t | none | hard")
        ->check(CLI::IsMember({"optimal", "oracle-t", "none", "hard"}))
        ->capture_default_str();
    denoise_cmd->add_option("--noise-scale", den.noise_scale,
                            "Per-entry noise std. deviation times sqrt(n) (1 = N(0,1/n) noise)")
        ->capture_default_str();
    denoise_cmd->add_option("--tolerance", den.tolerance, "Relative margin above the bulk edge for rank detection")
        ->capture_default_str();
    denoise_cmd->add_option("--format", den.format, "Matrix file format: csv | bin (OPSK)")
        ->check(CLI::IsMember({"csv", "bin"}))
        ->capture_default_str();
    denoise_cmd->add_flag("--csv-header", den.csv_header, "CSV input has a header line; one is written on output");
    denoise_cmd->add_option("--report", den.report, "Write a key=value text report to this path");

    AsymptoticsArgs asy;
    auto* asymptotics_cmd = app.add_subcommand(
        "asymptotics",
        "Print one CSV row: sigma,gamma,detectable,t,c,c_tilde,q_optimal,loss_optimal,loss_gd (noise units)");
    asymptotics_cmd->add_option("--sigma", asy.sigma, "Observed singular value in noise units")->required();
    asymptotics_cmd->add_option("--gamma", asy.gamma, "Aspect ratio p/n (> 0)")->required();
    asymptotics_cmd->add_flag("--header", asy.header, "Print the column header line first");

    ExperimentArgs cur;
    auto* curves_cmd = app.add_subcommand("curves", "Analytic q* and q = t with their losses over a sigma grid");
    add_common_experiment_flags(curves_cmd, cur);
    auto* curves_gamma = curves_cmd->add_option("--gamma", cur.gamma, "Aspect ratio")->capture_default_str();
    auto* curves_lo = curves_cmd->add_option("--sigma-min", cur.sigma_min, "First sigma (default: bulk edge + 0.01)");
    auto* curves_hi = curves_cmd->add_option("--sigma-max", cur.sigma_max, "Last sigma (default: bulk edge + 4)");
    auto* curves_points = curves_cmd->add_option("--points", cur.points, "Grid size")->capture_default_str();

    ExperimentArgs rat;
    auto* ratio_cmd = app.add_subcommand(
        "ratio-sweep", "Relative losses and their ratio over gamma with t = gamma^(1/4) + offset");
    add_common_experiment_flags(ratio_cmd, rat);
    ratio_cmd->add_option("--gamma-min", rat.gamma_min, "First gamma")->capture_default_str();
    ratio_cmd->add_option("--gamma-max", rat.gamma_max, "Last gamma (<= 1)")->capture_default_str();
    ratio_cmd->add_option("--points", rat.points, "Grid size")->default_val(20);
    ratio_cmd->add_option("--t-offset", rat.t_offset, "Signal strength offset above gamma^(1/4)")->capture_default_str();
    ratio_cmd->add_option("--replicates", rat.replicates, "Monte Carlo replicates per gamma (0 = analytic only)")
        ->capture_default_str();
    ratio_cmd->add_option("--p", rat.p, "Rows for Monte Carlo columns; n = round(p / gamma)")->default_val(100);
    ratio_cmd->add_option("--tolerance", rat.tolerance, "Rank detection margin")->capture_default_str();
    ratio_cmd->add_option("--factor-law", rat.factor_law, "gaussian | rademacher")
        ->check(CLI::IsMember({"gaussian", "rademacher"}))
        ->capture_default_str();

    ExperimentArgs blp;
    auto* blp_cmd = app.add_subcommand(
        "blp-convergence", "Operator-norm errors of BLP, q* and q = t and the q*-to-BLP gap over increasing n");
    add_common_experiment_flags(blp_cmd, blp);
    auto* blp_p = blp_cmd->add_option("--p", blp.p, "Rows (features); default 50, 100 with --paper-scale");
    auto* blp_t = blp_cmd->add_option("--t", blp.t, "Spike strength (rank 1)")->capture_default_str();
    auto* blp_grid = blp_cmd->add_option(
        "--n-grid", blp.n_grid, "Comma-separated increasing n values >= p (default 100,...,3200; --paper-scale adds 6400)");
    auto* blp_reps = blp_cmd->add_option("--replicates", blp.replicates, "Replicates per n; default 200, 4000 with --paper-scale");
    auto* blp_tol = blp_cmd->add_option("--tolerance", blp.tolerance, "Rank detection margin")->capture_default_str();
    auto* blp_law = blp_cmd->add_option("--factor-law", blp.factor_law, "gaussian | rademacher")
                        ->check(CLI::IsMember({"gaussian", "rademacher"}))
                        ->capture_default_str();
    blp_cmd->add_flag("--paper-scale", blp.paper_scale, "Use p = 100, 4000 replicates, n up to 6400");

    try {
        std::vector<std::string> expanded = expand_config(args);
        std::reverse(expanded.begin(), expanded.end());
        try {
            app.parse(expanded);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitConfig;
        }

        if (denoise_cmd->parsed()) {
            return cmd_denoise(den, out);
        }
        if (asymptotics_cmd->parsed()) {
            return cmd_asymptotics(asy, out);
        }
        if (curves_cmd->parsed()) {
            ExperimentConfig cfg = default_experiment(ExperimentKind::ShrinkerCurves);
            cfg.seed = cur.seed;
            cfg.threads = cur.threads;
            if (curves_gamma->count() > 0 || curves_lo->count() > 0 || curves_hi->count() > 0 ||
                curves_points->count() > 0) {
                cfg.gamma = cur.gamma;
                const double edge = AspectRatio(cfg.gamma).bulk_edge();
                const double lo = curves_lo->count() > 0 ? cur.sigma_min : edge + 0.01;
                const double hi = curves_hi->count() > 0 ? cur.sigma_max : edge + 4.0;
                cfg.grid = linspace(lo, hi, cur.points);
            }
            return write_table(run_shrinker_curves(cfg), cur.out, out);
        }
        if (ratio_cmd->parsed()) {
            ExperimentConfig cfg = default_experiment(ExperimentKind::RatioSweep);
            cfg.grid = linspace(rat.gamma_min, rat.gamma_max, rat.points);
            cfg.t_offset = rat.t_offset;
            cfg.replicates = rat.replicates;
            cfg.base.p = rat.p;
            cfg.base.factor_law = parse_factor_law(rat.factor_law);
            cfg.tolerance = rat.tolerance;
            cfg.seed = rat.seed;
            cfg.threads = rat.threads;
            return write_table(run_ratio_sweep(cfg), rat.out, out);
        }
        if (blp_cmd->parsed()) {
            ExperimentConfig cfg = blp.paper_scale ? paper_scale_blp_convergence()
                                                   : default_experiment(ExperimentKind::BlpConvergence);
            if (blp_p->count() > 0) {
                cfg.base.p = blp.p;
            }
            if (blp_t->count() > 0) {
                cfg.base.strengths = {blp.t};
            }
            if (blp_grid->count() > 0) {
                cfg.grid = parse_real_list(blp.n_grid, "--n-grid");
            }
            if (blp_reps->count() > 0) {
                cfg.replicates = blp.replicates;
            }
            if (blp_tol->count() > 0) {
                cfg.tolerance = blp.tolerance;
            }
            if (blp_law->count() > 0) {
                cfg.base.factor_law = parse_factor_law(blp.factor_law);
            }
            cfg.seed = blp.seed;
            cfg.threads = blp.threads;
            return write_table(run_blp_convergence(cfg), blp.out, out);
        }
        err << "no subcommand given\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace opshrink::cli
