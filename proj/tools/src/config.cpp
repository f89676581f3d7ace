#include "config.hpp"

#include "gparc/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace gparc::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw InputError("config: '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) known = known || item.key() == key;
        if (!known) {
            throw InputError("config: unknown key '" + item.key() + "' in '" + where + "'");
        }
    }
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw InputError("config: '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t count(const json& obj, const char* key, const std::string& where,
                    std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        throw InputError("config: '" + where + "." + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

Eigen::MatrixXd parse_matrix(const json& v) {
    if (!v.is_array() || v.empty()) throw InputError("config: 'B' must be a nonempty array of rows");
    const auto d = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
            throw InputError("config: 'B' must be square, row " + std::to_string(i) +
                             " has the wrong length");
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            const json& x = row[static_cast<std::size_t>(j)];
            if (!x.is_number()) throw InputError("config: 'B' entries must be numbers");
            m(i, j) = x.get<double>();
        }
    }
    return m;
}

arclength::CorrelationPolicy parse_correlation(const std::string& name) {
    if (name == "prior-stationary") return arclength::CorrelationPolicy::PriorStationary;
    if (name == "posterior-normalized") return arclength::CorrelationPolicy::PosteriorNormalized;
    throw InputError("config: 'series.correlation' must be 'prior-stationary' or "
                     "'posterior-normalized', got '" + name + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& file) {
    const std::string t = trim(cell);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw InputError(file + ":" + std::to_string(line_no) + ": not a number: '" + t + "'");
    }
    return v;
}

}  // namespace

kernels::CoregionalizedKernel RunConfig::coregionalized() const {
    if (mixing) return kernels::CoregionalizedKernel(kernel, *mixing);
    return kernels::CoregionalizedKernel(kernel);
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(doc, "<root>",
               {"kernel", "B", "interval", "observations_path", "noise_variance", "quadrature",
                "series", "mc"});
    if (!doc.contains("kernel")) throw InputError("config: missing required key 'kernel'");

    RunConfig cfg;
    const json& k = doc.at("kernel");
    check_keys(k, "kernel", {"family", "signal_variance", "length_scale", "rq_shape"});
    if (!k.contains("family") || !k.at("family").is_string()) {
        throw InputError("config: 'kernel.family' must be one of se, m32, m52, rq");
    }
    cfg.kernel.family = kernels::parse_family(k.at("family").get<std::string>());
    cfg.kernel.signal_variance = number(k, "signal_variance", "kernel", 1.0);
    cfg.kernel.length_scale = number(k, "length_scale", "kernel", 1.0);
    cfg.kernel.rq_shape = number(k, "rq_shape", "kernel", 1.0);
    cfg.kernel.validate();

    if (doc.contains("B")) {
        cfg.mixing = parse_matrix(doc.at("B"));
        // Validates symmetry and PSD.
        (void)kernels::CoregionalizedKernel(cfg.kernel, *cfg.mixing);
    }

    if (doc.contains("interval")) {
        const json& iv = doc.at("interval");
        check_keys(iv, "interval", {"a", "b"});
        cfg.interval.a = number(iv, "a", "interval", 0.0);
        cfg.interval.b = number(iv, "b", "interval", 1.0);
    }
    cfg.interval.validate();

    if (doc.contains("observations_path")) {
        const json& p = doc.at("observations_path");
        if (!p.is_string()) throw InputError("config: 'observations_path' must be a string");
        std::filesystem::path path = p.get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        cfg.observations_path = path;
    }

    if (doc.contains("noise_variance")) {
        const json& nv = doc.at("noise_variance");
        cfg.noise_variance.clear();
        if (nv.is_number()) {
            cfg.noise_variance.push_back(nv.get<double>());
        } else if (nv.is_array() && !nv.empty()) {
            for (const json& x : nv) {
                if (!x.is_number()) throw InputError("config: 'noise_variance' entries must be numbers");
                cfg.noise_variance.push_back(x.get<double>());
            }
        } else {
            throw InputError("config: 'noise_variance' must be a number or an array of numbers");
        }
        for (double v : cfg.noise_variance) {
            if (!(v >= 0.0)) throw InputError("config: 'noise_variance' must be nonnegative");
        }
        const auto d = static_cast<std::size_t>(cfg.output_dim());
        if (cfg.noise_variance.size() != 1 && cfg.noise_variance.size() != d) {
            throw InputError("config: 'noise_variance' needs 1 or " + std::to_string(d) + " entries");
        }
    }

    if (doc.contains("quadrature")) {
        const json& q = doc.at("quadrature");
        check_keys(q, "quadrature", {"nodes_per_axis", "refinements", "abs_tol", "rel_tol"});
        cfg.quadrature.nodes_per_axis = count(q, "nodes_per_axis", "quadrature", 128);
        cfg.quadrature.refinements = count(q, "refinements", "quadrature", 1);
        cfg.quadrature.abs_tol = number(q, "abs_tol", "quadrature", 1e-8);
        cfg.quadrature.rel_tol = number(q, "rel_tol", "quadrature", 1e-8);
    }
    cfg.quadrature.validate();

    if (doc.contains("series")) {
        const json& s = doc.at("series");
        check_keys(s, "series", {"rel_tol", "max_terms", "correlation"});
        cfg.series.rel_tol = number(s, "rel_tol", "series", 1e-10);
        cfg.series.max_terms = count(s, "max_terms", "series", 60);
        if (s.contains("correlation")) {
            if (!s.at("correlation").is_string()) {
                throw InputError("config: 'series.correlation' must be a string");
            }
            cfg.series.correlation = parse_correlation(s.at("correlation").get<std::string>());
        }
    }
    if (!(cfg.series.rel_tol > 0.0) || cfg.series.max_terms < 1) {
        throw InputError("config: 'series' needs rel_tol > 0 and max_terms >= 1");
    }

    if (doc.contains("mc")) {
        const json& mc = doc.at("mc");
        check_keys(mc, "mc", {"count", "grid_size", "seed"});
        cfg.mc.count = count(mc, "count", "mc", 2000);
        cfg.mc.grid_size = count(mc, "grid_size", "mc", 2000);
        cfg.mc.seed = count(mc, "seed", "mc", 0);
    }
    if (cfg.mc.count < 2 || cfg.mc.grid_size < 2) {
        throw InputError("config: 'mc.count' and 'mc.grid_size' must be >= 2");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::optional<gp::Observations> load_observations(const std::filesystem::path& path,
                                                  Eigen::Index expected_outputs,
                                                  const std::vector<double>& noise_variance) {
    std::ifstream in(path);
    if (!in) throw InputError("observations: cannot open '" + path.string() + "'");
    const std::string file = path.string();
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw InputError(file + ": empty file, expected header t,y1,...,yD");
    if (trim(header[0]) != "t") throw InputError(file + ":" + std::to_string(line_no) + ": first column must be 't'");
    const auto d = static_cast<Eigen::Index>(header.size()) - 1;
    for (Eigen::Index o = 0; o < d; ++o) {
        const std::string want = "y" + std::to_string(o + 1);
        if (trim(header[static_cast<std::size_t>(o + 1)]) != want) {
            throw InputError(file + ":" + std::to_string(line_no) + ": expected column '" + want + "'");
        }
    }
    if (d != expected_outputs) {
        throw InputError(file + ": " + std::to_string(d) + " output columns but the model has D=" +
                         std::to_string(expected_outputs));
    }

    std::vector<double> inputs;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<Eigen::Index>(cells.size()) != d + 1) {
            throw InputError(file + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(d + 1) + " columns, got " + std::to_string(cells.size()));
        }
        inputs.push_back(parse_cell(cells[0], line_no, file));
        for (Eigen::Index o = 0; o < d; ++o) {
            values.push_back(parse_cell(cells[static_cast<std::size_t>(o + 1)], line_no, file));
        }
    }
    if (inputs.empty()) return std::nullopt;

    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::MatrixXd targets(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index o = 0; o < d; ++o) targets(i, o) = values[static_cast<std::size_t>(i * d + o)];
    }
    Eigen::VectorXd noise = Eigen::Map<const Eigen::VectorXd>(
        noise_variance.data(), static_cast<Eigen::Index>(noise_variance.size()));
    return gp::Observations::make(std::move(inputs), std::move(targets), std::move(noise));
}

gp::GpPosterior build_model(const RunConfig& cfg, bool require_observations) {
    const kernels::CoregionalizedKernel ck = cfg.coregionalized();
    if (!cfg.observations_path) {
        if (require_observations) throw InputError("config: 'observations_path' is required");
        return gp::GpPosterior::prior(ck);
    }
    auto obs = load_observations(*cfg.observations_path, ck.output_dim(), cfg.noise_variance);
    if (!obs) return gp::GpPosterior::prior(ck);
    return gp::fit(ck, *obs);
}

}  // namespace gparc::cli
