#include "covidx/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "covidx/error.hpp"

namespace covidx {

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& node, std::string where) : node_(node), where_(std::move(where)) {
        if (!node_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError("config " + (where_.empty() ? std::string("root") : where_) + ": " + message);
    }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    const json& at(const std::string& key) {
        if (!has(key)) throw ConfigError("config: missing field '" + path(key) + "'");
        return node_.at(key);
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError("config: field '" + path(key) + "' must be a string");
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, std::string fallback) {
        return has(key) ? string(key) : fallback;
    }

    double number_or(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ConfigError("config: field '" + path(key) + "' must be a number");
        return v.get<double>();
    }

    int integer_or(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer()) throw ConfigError("config: field '" + path(key) + "' must be an integer");
        return v.get<int>();
    }

    std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError("config: field '" + path(key) + "' must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::vector<std::string> strings_or(const std::string& key, std::vector<std::string> fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_array()) throw ConfigError("config: field '" + path(key) + "' must be an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError("config: field '" + path(key) + "' must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    /// Call after reading every known key.
    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.count(key)) throw ConfigError("config: unknown field '" + path(key) + "'");
        }
    }

private:
    const json& node_;
    std::string where_;
    std::set<std::string> seen_;
};

Smoothing read_smoothing(const json& node, const std::string& where) {
    if (node.is_string()) return parse_smoothing(node.get<std::string>());
    Reader r(node, where);
    const std::string method = r.string("method");
    Smoothing s;
    if (method == "none") {
        s = Smoothing::none();
    } else if (method == "ema") {
        s = Smoothing::ema(r.number_or("alpha", 0.3));
    } else if (method == "moving_average") {
        s = Smoothing::moving_average(r.integer_or("window", 7));
    } else {
        r.fail("unknown smoothing method '" + method + "'");
    }
    r.finish();
    if (s.kind == Smoothing::Kind::ema && !(s.alpha > 0.0 && s.alpha <= 1.0)) {
        throw ConfigError("config: " + where + ".alpha must lie in (0, 1]");
    }
    if (s.kind == Smoothing::Kind::moving_average && s.window < 1) {
        throw ConfigError("config: " + where + ".window must be >= 1");
    }
    return s;
}

Transform read_transform(const json& node, const std::string& where) {
    if (node.is_string()) return Transform::parse(node.get<std::string>());
    Reader r(node, where);
    Transform t = Transform::parse(r.string("kind"));
    if (t.kind == TransformKind::positivity_ratio) {
        t.numerator = r.string_or("numerator", t.numerator);
        t.denominator = r.string_or("denominator", t.denominator);
    }
    r.finish();
    return t;
}

ModelParams read_params(Family family, const json* node, const std::string& where) {
    static const json empty = json::object();
    Reader r(node ? *node : empty, where);
    ModelParams params;
    switch (family) {
    case Family::pca_full:
        params = PcaFullParams{};
        break;
    case Family::pca_rolling: {
        PcaRollingParams p;
        p.window = r.integer_or("window", p.window);
        params = p;
        break;
    }
    case Family::ica: {
        IcaParams p;
        const std::string nonlinearity = r.string_or("nonlinearity", "logcosh");
        if (nonlinearity != "logcosh") r.fail("nonlinearity must be 'logcosh'");
        p.n_components = r.integer_or("n_components", p.n_components);
        p.max_iter = r.integer_or("max_iter", p.max_iter);
        p.tol = r.number_or("tol", p.tol);
        p.seed = r.seed_or("seed", p.seed);
        params = p;
        break;
    }
    case Family::factor_analysis: {
        FactorAnalysisParams p;
        p.em_max_iter = r.integer_or("em_max_iter", p.em_max_iter);
        p.em_tol = r.number_or("em_tol", p.em_tol);
        params = p;
        break;
    }
    case Family::state_space: {
        StateSpaceParams p;
        p.em_max_iter = r.integer_or("em_max_iter", p.em_max_iter);
        p.em_tol = r.number_or("em_tol", p.em_tol);
        params = p;
        break;
    }
    case Family::sparse_filtering: {
        SparseFilteringParams p;
        p.n_features = r.integer_or("n_features", p.n_features);
        p.max_iter = r.integer_or("max_iter", p.max_iter);
        p.tol = r.number_or("tol", p.tol);
        p.seed = r.seed_or("seed", p.seed);
        params = p;
        break;
    }
    }
    r.finish();
    return params;
}

ModelSpec read_model_spec(const json& node, const std::string& where) {
    Reader r(node, where);
    const Family family = parse_family(r.string("family"));
    ModelSpec spec;
    spec.transform = r.has("transform") ? read_transform(r.at("transform"), r.path("transform")) : Transform{};
    spec.params = read_params(family, r.has("params") ? &r.at("params") : nullptr, r.path("params"));
    spec.id = r.string_or("id", family_name(family) + "." + spec.transform.name());
    r.finish();
    return spec;
}

void read_input(RunConfig& cfg, const json& node) {
    Reader r(node, "input");
    const std::string kind = r.string_or("kind", "csv");
    if (kind == "csv") {
        cfg.input.kind = InputConfig::Kind::csv;
        cfg.input.date_column = r.string_or("date_column", "date");
        cfg.input.columns = r.strings_or("columns", {});
    } else if (kind == "dpc_national") {
        cfg.input.kind = InputConfig::Kind::dpc_national;
    } else {
        r.fail("kind must be 'csv' or 'dpc_national', got '" + kind + "'");
    }
    cfg.input.path = r.string("path");
    r.finish();
}

void read_preprocess(RunConfig& cfg, const json& node) {
    Reader r(node, "preprocess");
    if (r.has("smoothing")) cfg.preprocess.smoothing = read_smoothing(r.at("smoothing"), "preprocess.smoothing");
    if (r.has("em")) {
        Reader em(r.at("em"), "preprocess.em");
        cfg.preprocess.em.max_iter = em.integer_or("max_iter", cfg.preprocess.em.max_iter);
        cfg.preprocess.em.tol = em.number_or("tol", cfg.preprocess.em.tol);
        cfg.preprocess.em.ridge = em.number_or("ridge", cfg.preprocess.em.ridge);
        em.finish();
        if (cfg.preprocess.em.max_iter < 1) em.fail("max_iter must be >= 1");
        if (!(cfg.preprocess.em.tol > 0.0)) em.fail("tol must be positive");
        if (!(cfg.preprocess.em.ridge >= 0.0)) em.fail("ridge must be non-negative");
    }
    cfg.preprocess.reference_exclude = r.strings_or("reference_exclude", cfg.preprocess.reference_exclude);
    r.finish();
}

void read_output(RunConfig& cfg, const json& node) {
    Reader r(node, "output");
    cfg.output.path = r.string("path");
    cfg.output.format = parse_output_format(r.string_or("format", "csv"));
    r.finish();
}

void read_spread(RunConfig& cfg, const json& node) {
    Reader r(node, "spread");
    SpreadConfig s;
    s.input = r.string("input");
    s.output = r.string("output");
    if (r.has("smoothing")) s.smoothing = read_smoothing(r.at("smoothing"), "spread.smoothing");
    r.finish();
    cfg.spread = s;
}

} // namespace

Smoothing parse_smoothing(const std::string& text) {
    if (text == "none") return Smoothing::none();
    const auto colon = text.find(':');
    const std::string method = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        std::size_t used = 0;
        if (method == "ema") {
            const double alpha = std::stod(arg, &used);
            if (used == arg.size() && alpha > 0.0 && alpha <= 1.0) return Smoothing::ema(alpha);
        } else if (method == "moving_average" || method == "ma") {
            const int window = std::stoi(arg, &used);
            if (used == arg.size() && window >= 1) return Smoothing::moving_average(window);
        }
    } catch (const std::logic_error&) {
    }
    throw ConfigError("invalid smoothing '" + text +
                      "' (expected none, ema:<alpha in (0,1]> or moving_average:<window >= 1>)");
}

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Reader r(root, "");
    read_input(cfg, r.at("input"));
    if (r.has("preprocess")) read_preprocess(cfg, r.at("preprocess"));
    read_output(cfg, r.at("output"));
    if (r.has("spread")) read_spread(cfg, r.at("spread"));

    const json& space = r.at("model_space");
    if (space.is_string()) {
        if (space.get<std::string>() != "default") {
            throw ConfigError("config: model_space must be \"default\" or a list of model specs");
        }
        cfg.default_model_space = true;
    } else if (space.is_array()) {
        if (space.empty()) throw ConfigError("config: model_space must contain at least one model spec");
        for (std::size_t i = 0; i < space.size(); ++i) {
            cfg.model_space.push_back(read_model_spec(space[i], "model_space[" + std::to_string(i) + "]"));
        }
        try {
            validate_model_space(cfg.model_space);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("config: model_space: ") + e.what());
        }
    } else {
        throw ConfigError("config: model_space must be \"default\" or a list of model specs");
    }
    r.finish();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunConfig cfg = parse_run_config(buffer.str());

    const auto base = path.parent_path();
    auto resolve = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    resolve(cfg.input.path);
    resolve(cfg.output.path);
    if (cfg.spread) {
        resolve(cfg.spread->input);
        resolve(cfg.spread->output);
    }
    return cfg;
}

std::vector<ModelSpec> resolve_model_space(const RunConfig& config, const Panel& panel) {
    if (!config.default_model_space) return config.model_space;
    const CleanPanel prepared = smooth(to_clean(impute_em(panel, config.preprocess.em)), config.preprocess.smoothing);
    return default_model_space(transform_defined(prepared, Transform::parse("log_first_difference")));
}

std::string example_config() {
    using ordered = nlohmann::ordered_json;
    ordered out;
    out["input"] = {{"kind", "dpc_national"}, {"path", "dpc-covid19-ita-andamento-nazionale.csv"}};
    out["preprocess"] = {{"smoothing", {{"method", "none"}}},
                         {"em", {{"max_iter", 200}, {"tol", 1e-6}, {"ridge", 1e-6}}},
                         {"reference_exclude", {"tamponi"}}};
    out["model_space"] = "default";
    out["output"] = {{"path", "index.csv"}, {"format", "csv"}};
    out["spread"] = {{"input", "dpc-covid19-ita-regioni.csv"}, {"output", "spread.csv"}};
    return out.dump(2) + "\n";
}

} // namespace covidx
