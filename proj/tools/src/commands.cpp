#include "commands.hpp"

#include "gparc/error.hpp"
#include "gparc/integrand_dist.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace gparc::cli {

namespace {

using nlohmann::json;

const char* method_name(arclength::Method m) {
    switch (m) {
        case arclength::Method::ClosedForm: return "closed-form";
        case arclength::Method::SeriesPlusQuadrature: return "series-plus-quadrature";
        case arclength::Method::MonteCarloFallback: return "monte-carlo-fallback";
    }
    return "unknown";
}

json diagnostics_to_json(const arclength::Diagnostics& d) {
    json j = {
        {"quadrature_error", d.quadrature_error},
        {"quadrature_converged", d.quadrature_converged},
        {"quadrature_nodes", d.quadrature_nodes},
        {"series_terms", d.series_terms},
        {"series_converged", d.series_converged},
        {"variance_clamped", d.variance_clamped},
        {"predictive_clamps", d.predictive_clamps},
        {"deterministic_points", d.deterministic_points},
        {"integrand_fallbacks", d.integrand_fallbacks},
        {"shape_below_half", d.shape_below_half},
        {"notes", d.notes},
    };
    if (d.series_tail_bound) j["series_tail_bound"] = *d.series_tail_bound;
    if (d.symmetrization_difference) j["symmetrization_difference"] = *d.symmetrization_difference;
    if (d.min_shape) j["min_shape"] = *d.min_shape;
    return j;
}

json with_model(json j, const RunConfig& cfg, const char* command, const gp::GpPosterior& gp) {
    j["command"] = command;
    j["model"] = cfg.vector_model() ? "vector" : "graph-1d";
    j["output_dim"] = cfg.output_dim();
    j["observation_count"] = gp.observation_count();
    j["interval"] = {{"a", cfg.interval.a}, {"b", cfg.interval.b}};
    return j;
}

json moments_for(const RunConfig& cfg, const gp::GpPosterior& gp) {
    if (!cfg.vector_model()) {
        if (gp.is_prior()) return moments_to_json(arclength::prior_moments_1d(cfg.kernel, cfg.interval));
        return moments_to_json(arclength::posterior_mean_1d(gp, cfg.interval, cfg.quadrature));
    }
    if (gp.is_prior()) {
        return moments_to_json(arclength::prior_moments_nd(gp.kernel(), cfg.interval,
                                                           cfg.quadrature, cfg.series));
    }
    return moments_to_json(
        arclength::posterior_moments_nd(gp, cfg.interval, cfg.quadrature, cfg.series));
}

std::ostringstream precise_stream() {
    std::ostringstream out;
    out << std::setprecision(17);
    return out;
}

void write_text(const std::optional<std::string>& path, const std::string& text) {
    if (!path || *path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(*path);
    if (!out) throw InputError("cannot open output file '" + *path + "'");
    out << text;
}

}  // namespace

json moments_to_json(const arclength::ArcLengthMoments& m) {
    json j = {{"mean", m.mean}, {"method", method_name(m.method)},
              {"diagnostics", diagnostics_to_json(m.diagnostics)}};
    if (m.second_moment) j["second_moment"] = *m.second_moment;
    if (m.variance) {
        j["variance"] = *m.variance;
    } else {
        j["variance_absent_reason"] = arclength::kOneDimVarianceNote;
    }
    return j;
}

json mc_report_to_json(const mc::McReport& r) {
    return {{"sample_count", r.sample_count},       {"empirical_mean", r.empirical_mean},
            {"empirical_variance", r.empirical_variance}, {"mean_std_error", r.mean_std_error},
            {"grid_size", r.grid_size},             {"seed", r.seed}};
}

json cmd_prior_moments(const RunConfig& cfg) {
    const gp::GpPosterior gp = gp::GpPosterior::prior(cfg.coregionalized());
    return with_model(moments_for(cfg, gp), cfg, "prior-moments", gp);
}

json cmd_posterior_moments(const RunConfig& cfg) {
    const gp::GpPosterior gp = build_model(cfg, true);
    return with_model(moments_for(cfg, gp), cfg, "posterior-moments", gp);
}

std::string cmd_integrand_pdf(const IntegrandGrid& grid) {
    const integrand::Integrand1D d{grid.mu, grid.sigma};
    d.validate();
    if (grid.points < 2) throw InputError("integrand-pdf: need at least two points");
    const double y_max =
        grid.y_max.value_or(std::hypot(1.0, std::abs(grid.mu) + 10.0 * grid.sigma));
    if (!(y_max > 1.0)) throw InputError("integrand-pdf: y_max must exceed 1");
    auto out = precise_stream();
    out << "y,pdf,cdf\n";
    const double last = static_cast<double>(grid.points - 1);
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double s = static_cast<double>(i) / last;
        const double y = i + 1 == grid.points ? y_max : 1.0 + (y_max - 1.0) * s * s * s;
        out << y << ',' << integrand::pdf_1d(d, y) << ',' << integrand::cdf_1d(d, y) << '\n';
    }
    return out.str();
}

std::string cmd_heatmap(const RunConfig& cfg, const std::vector<double>& lambdas,
                        const std::vector<double>& sigmas) {
    auto out = precise_stream();
    out << "lambda,sigma,log_mean\n";
    for (double lambda : lambdas) {
        for (double sigma : sigmas) {
            if (!(lambda > 0.0) || !(sigma > 0.0)) throw InputError("heatmap: grids must be positive");
            kernels::KernelSpec k = cfg.kernel;
            k.signal_variance = lambda * lambda;
            k.length_scale = sigma;
            out << lambda << ',' << sigma << ','
                << std::log(arclength::prior_mean_1d(k, cfg.interval)) << '\n';
        }
    }
    return out.str();
}

SampleLengths cmd_sample_lengths(const RunConfig& cfg) {
    const gp::GpPosterior gp = build_model(cfg, false);
    const auto mode = cfg.vector_model() ? mc::LengthMode::VectorLength : mc::LengthMode::GraphLength1D;
    const mc::McReport r =
        mc::empirical_arclength(gp, cfg.interval, cfg.mc.grid_size, cfg.mc.count, cfg.mc.seed, mode);
    auto out = precise_stream();
    out << "draw_index,length\n";
    for (std::size_t i = 0; i < r.lengths.size(); ++i) out << i << ',' << r.lengths[i] << '\n';
    json report = mc_report_to_json(r);
    report["command"] = "sample-lengths";
    return {out.str(), std::move(report)};
}

ValidateResult cmd_validate(const RunConfig& cfg) {
    const gp::GpPosterior gp = build_model(cfg, false);
    const json analytic = moments_for(cfg, gp);
    const auto mode = cfg.vector_model() ? mc::LengthMode::VectorLength : mc::LengthMode::GraphLength1D;
    const mc::McReport r =
        mc::empirical_arclength(gp, cfg.interval, cfg.mc.grid_size, cfg.mc.count, cfg.mc.seed, mode);

    const double mean = analytic.at("mean").get<double>();
    const double z = (mean - r.empirical_mean) / r.mean_std_error;
    json report = with_model(json::object(), cfg, "validate", gp);
    report["analytic_mean"] = mean;
    report["empirical_mean"] = r.empirical_mean;
    report["mean_std_error"] = r.mean_std_error;
    report["z_mean"] = z;
    report["empirical_variance"] = r.empirical_variance;
    if (analytic.contains("variance")) {
        const double var = analytic.at("variance").get<double>();
        report["analytic_variance"] = var;
        report["variance_ratio"] = var / r.empirical_variance;
    } else {
        report["analytic_variance"] = nullptr;
        report["variance_ratio"] = nullptr;
        report["variance_absent_reason"] = arclength::kOneDimVarianceNote;
    }
    report["sample_count"] = r.sample_count;
    report["grid_size"] = r.grid_size;
    report["seed"] = r.seed;
    return {std::move(report), std::abs(z) <= 4.0};
}

std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size()) throw InputError(what + ": bad number '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::istringstream in(spec);
        for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw InputError(what + ": range must be lo:hi:n");
        const double lo = number(parts[0]);
        const double hi = number(parts[1]);
        const double n = number(parts[2]);
        if (!(lo > 0.0) || !(hi >= lo) || n < 1 || n != std::floor(n)) {
            throw InputError(what + ": range needs 0 < lo <= hi and integer n >= 1");
        }
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            out.push_back(lo * std::pow(hi / lo, f));
        }
        return out;
    }
    std::istringstream in(spec);
    for (std::string p; std::getline(in, p, ',');) out.push_back(number(p));
    if (out.empty()) throw InputError(what + ": empty grid");
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Arc-length moments of Gaussian process curves"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_path;
    std::optional<std::string> report_path;
    IntegrandGrid grid;
    std::optional<double> y_max;
    std::string lambdas = "0.1:10:20";
    std::string sigmas = "0.1:10:20";

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed, "Override mc.seed");
        cmd->add_option("--out", out_path, "Output file (default stdout)");
    };
    auto* prior = app.add_subcommand("prior-moments", "Prior arc-length moments as JSON");
    add_common(prior, true);
    auto* post = app.add_subcommand("posterior-moments", "Posterior arc-length moments as JSON");
    add_common(post, true);
    auto* pdf = app.add_subcommand("integrand-pdf", "CSV y,pdf,cdf of sqrt(1 + X^2)");
    add_common(pdf, false);
    pdf->add_option("--mu", grid.mu, "Mean of X");
    pdf->add_option("--sigma", grid.sigma, "Standard deviation of X");
    pdf->add_option("--y-max", y_max, "Upper end of the y grid");
    pdf->add_option("--points", grid.points, "Number of grid points");
    auto* heat = app.add_subcommand("heatmap", "CSV lambda,sigma,log_mean of the 1-D prior mean");
    add_common(heat, true);
    heat->add_option("--lambdas", lambdas, "Amplitudes: v1,v2,... or lo:hi:n (geometric)");
    heat->add_option("--sigmas", sigmas, "Length scales: v1,v2,... or lo:hi:n (geometric)");
    auto* sample = app.add_subcommand("sample-lengths", "CSV draw_index,length of sampled paths");
    add_common(sample, true);
    sample->add_option("--report", report_path, "McReport JSON file (default stderr)");
    auto* validate = app.add_subcommand("validate", "Analytic moments against Monte Carlo");
    add_common(validate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        auto config = [&] {
            RunConfig cfg = load_config(config_path);
            if (seed) cfg.mc.seed = *seed;
            return cfg;
        };
        if (prior->parsed()) {
            write_text(out_path, cmd_prior_moments(config()).dump(2) + "\n");
        } else if (post->parsed()) {
            write_text(out_path, cmd_posterior_moments(config()).dump(2) + "\n");
        } else if (pdf->parsed()) {
            if (!config_path.empty()) (void)config();
            grid.y_max = y_max;
            write_text(out_path, cmd_integrand_pdf(grid));
        } else if (heat->parsed()) {
            const RunConfig cfg = config();
            write_text(out_path, cmd_heatmap(cfg, parse_grid(lambdas, "--lambdas"),
                                             parse_grid(sigmas, "--sigmas")));
        } else if (sample->parsed()) {
            const SampleLengths s = cmd_sample_lengths(config());
            write_text(out_path, s.csv);
            const std::string report = s.report.dump(2) + "\n";
            if (report_path) {
                write_text(report_path, report);
            } else {
                std::cerr << report;
            }
        } else if (validate->parsed()) {
            const ValidateResult v = cmd_validate(config());
            write_text(out_path, v.report.dump(2) + "\n");
            if (!v.passed) {
                std::cerr << "validate: |z_mean| exceeds 4\n";
                return kNumericalError;
            }
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    }
    return kOk;
}

}  // namespace gparc::cli
