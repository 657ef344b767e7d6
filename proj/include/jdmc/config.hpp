#pragma once

#include "jdmc/harness.hpp"
#include "jdmc/models.hpp"
#include "jdmc/parametrix.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace jdmc {

/// Fully validated description of one CLI run.
///
/// Config files are INI with sections [run], [model], [payoff], [estimator],
/// [euler], [sweep] and [reference]; command-line flags override file values
/// key by key.
struct RunConfig {
    std::string command = "estimate";

    std::string model_id = "trig";
    TrigParams trig;
    AffineParams affine;
    ConstantParams custom;
    std::vector<double> x0;  ///< empty means the origin of the model's dimension

    std::string payoff_id = "indicator";
    double strike = 1.8;

    EstimatorParams params;
    std::int64_t trials = 50'000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "results.csv";

    /// (M, p) pairs for the Euler baseline in `compare`.
    std::vector<std::pair<std::int64_t, int>> euler_pairs{{4'000, 200}, {16'000, 400}, {64'000, 800}};

    std::string sweep_param = "sigma_a";
    std::vector<double> sweep_values{0.01, 0.1, 0.5, 1.0, 5.0};
    int sweep_repeats = 3;

    std::int64_t reference_trials = 10'000'000;
    int reference_steps = 4096;
    std::optional<double> reference_value;

    /// Non-fatal notes raised during validation (finite-variance warning,
    /// assumption-violating model).
    std::vector<std::string> notes;

    ModelSpec build_model() const {
        if (model_id == "trig") return build_model_trig(trig);
        if (model_id == "affine") return build_model_affine(affine);
        return build_model_constant(custom);
    }

    Payoff build_payoff() const {
        return payoff_id == "call" ? payoff_call(strike) : payoff_indicator(strike);
    }

    Vec start_state(int d) const {
        if (x0.empty()) return Vec::Zero(d);
        Vec v(static_cast<int>(x0.size()));
        for (std::size_t i = 0; i < x0.size(); ++i) v[static_cast<int>(i)] = x0[i];
        return v;
    }
};

namespace detail {

using Tree = boost::property_tree::ptree;

inline double parse_real(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    if (pos != text.size() || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + text + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (v != std::floor(v) || std::abs(v) > 9e15)
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return static_cast<std::int64_t>(v);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_real(key, item));
    if (out.empty()) throw ConfigError(key + ": expected a non-empty comma-separated list");
    return out;
}

inline void check(bool ok, const std::string& key, const std::string& constraint) {
    if (!ok) throw ConfigError(key + ": must satisfy " + constraint);
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "run.seed", "run.workers", "run.trials", "run.out",
        "model.id", "model.x0", "model.mu1", "model.mu2", "model.mu3", "model.mu4",
        "model.sigma1", "model.sigma2", "model.lambda1", "model.lambda2", "model.lambda3",
        "model.lambda4", "model.jump_size", "model.intensity_floor", "model.covariance_floor",
        "model.intensity_cap", "model.dim", "model.drift", "model.vol", "model.intensity",
        "model.jump",
        "payoff.id", "payoff.strike",
        "estimator.horizon", "estimator.sigma_a", "estimator.gamma", "estimator.epsilon",
        "euler.pairs", "euler.steps",
        "sweep.param", "sweep.values", "sweep.repeats",
        "reference.trials", "reference.steps", "reference.value"};
    return keys;
}

// Keys that only make sense for one model family.
inline bool key_applies_to_model(const std::string& key, const std::string& id) {
    static const std::set<std::string> trig{"mu1", "mu2", "sigma1", "sigma2", "lambda1",
                                            "lambda2", "lambda3", "lambda4", "jump_size"};
    static const std::set<std::string> affine{
        "mu1", "mu2", "mu3", "mu4", "sigma1", "sigma2", "lambda1", "lambda2", "lambda3",
        "jump_size", "intensity_floor", "covariance_floor", "intensity_cap"};
    static const std::set<std::string> custom{"dim", "drift", "vol", "intensity", "jump"};
    if (key == "id" || key == "x0") return true;
    if (id == "trig") return trig.count(key) > 0;
    if (id == "affine") return affine.count(key) > 0;
    return custom.count(key) > 0;
}

inline RunConfig config_from_tree(const Tree& tree) {
    RunConfig c;
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("'" + section + "': keys must live inside a [section]");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (!known_keys().count(full)) throw ConfigError("unknown configuration key '" + full + "'");
            entries.emplace_back(full, value.get_value<std::string>());
        }
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        std::optional<std::string> found;
        for (const auto& [k, v] : entries)
            if (k == key) found = v;
        return found;
    };
    auto real = [&](const std::string& key, double& dst) {
        if (auto v = get(key)) dst = parse_real(key, *v);
    };

    if (auto v = get("model.id")) c.model_id = *v;
    check(c.model_id == "trig" || c.model_id == "affine" || c.model_id == "custom", "model.id",
          "one of {trig, affine, custom}");
    for (const auto& [k, v] : entries) {
        if (k.rfind("model.", 0) == 0 && !key_applies_to_model(k.substr(6), c.model_id))
            throw ConfigError("'" + k + "' does not apply to model '" + c.model_id + "'");
    }

    if (c.model_id == "trig") {
        auto& p = c.trig;
        real("model.mu1", p.mu1);
        real("model.mu2", p.mu2);
        real("model.sigma1", p.sigma1);
        real("model.sigma2", p.sigma2);
        real("model.lambda1", p.lambda1);
        real("model.lambda2", p.lambda2);
        real("model.lambda3", p.lambda3);
        real("model.lambda4", p.lambda4);
        real("model.jump_size", p.jump_size);
    } else if (c.model_id == "affine") {
        auto& p = c.affine;
        real("model.mu1", p.mu1);
        real("model.mu2", p.mu2);
        real("model.mu3", p.mu3);
        real("model.mu4", p.mu4);
        real("model.sigma1", p.sigma1);
        real("model.sigma2", p.sigma2);
        real("model.lambda1", p.lambda1);
        real("model.lambda2", p.lambda2);
        real("model.lambda3", p.lambda3);
        real("model.jump_size", p.jump_size);
        real("model.intensity_floor", p.intensity_floor);
        real("model.covariance_floor", p.covariance_floor);
        real("model.intensity_cap", p.intensity_cap);
    } else {
        auto& p = c.custom;
        if (auto v = get("model.dim")) p.dim = static_cast<int>(parse_int("model.dim", *v));
        real("model.drift", p.drift);
        real("model.vol", p.vol);
        real("model.intensity", p.intensity);
        real("model.jump", p.jump);
        check(p.intensity > 0.0, "model.intensity", "> 0");
    }
    if (auto v = get("model.x0")) c.x0 = parse_list("model.x0", *v);

    if (auto v = get("payoff.id")) c.payoff_id = *v;
    check(c.payoff_id == "indicator" || c.payoff_id == "call", "payoff.id",
          "one of {indicator, call}");
    real("payoff.strike", c.strike);

    real("estimator.horizon", c.params.horizon);
    real("estimator.sigma_a", c.params.sigma_a);
    real("estimator.gamma", c.params.gamma);
    real("estimator.epsilon", c.params.epsilon);

    if (auto v = get("run.trials")) c.trials = parse_int("run.trials", *v);
    if (auto v = get("run.seed")) {
        const auto s = parse_int("run.seed", *v);
        check(s >= 0, "run.seed", ">= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("run.workers")) c.workers = static_cast<int>(parse_int("run.workers", *v));
    if (auto v = get("run.out")) c.out = *v;

    if (auto v = get("euler.pairs")) {
        c.euler_pairs.clear();
        for (const auto& item : split(*v, ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) throw ConfigError("euler.pairs: expected M:p items, got '" + item + "'");
            c.euler_pairs.emplace_back(parse_int("euler.pairs", parts[0]),
                                       static_cast<int>(parse_int("euler.pairs", parts[1])));
        }
        check(!c.euler_pairs.empty(), "euler.pairs", "at least one M:p pair");
    }
    if (auto v = get("euler.steps"))
        c.euler_pairs = {{c.trials, static_cast<int>(parse_int("euler.steps", *v))}};

    if (auto v = get("sweep.param")) c.sweep_param = *v;
    if (auto v = get("sweep.values")) c.sweep_values = parse_list("sweep.values", *v);
    if (auto v = get("sweep.repeats")) c.sweep_repeats = static_cast<int>(parse_int("sweep.repeats", *v));

    if (auto v = get("reference.trials")) c.reference_trials = parse_int("reference.trials", *v);
    if (auto v = get("reference.steps"))
        c.reference_steps = static_cast<int>(parse_int("reference.steps", *v));
    if (auto v = get("reference.value")) c.reference_value = parse_real("reference.value", *v);

    // Cross-field validation against downstream preconditions.
    check(c.trials >= 2, "run.trials", ">= 2");
    check(c.workers >= 1 && c.workers <= 1024, "run.workers", "in [1, 1024]");
    check(!c.out.empty(), "run.out", "non-empty path");
    for (const auto& [m, p] : c.euler_pairs) {
        check(m >= 2, "euler.pairs", "M >= 2");
        check(p >= 1, "euler.pairs", "p >= 1");
    }
    check(c.reference_trials >= 2, "reference.trials", ">= 2");
    check(c.reference_steps >= 1, "reference.steps", ">= 1");
    check(c.sweep_param == "sigma_a" || c.sweep_param == "gamma" || c.sweep_param == "epsilon",
          "sweep.param", "one of {sigma_a, gamma, epsilon}");
    check(c.sweep_repeats >= 1, "sweep.repeats", ">= 1");
    try {
        c.params.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("estimator: ") + e.what());
    }
    for (double v : c.sweep_values) {
        EstimatorParams p = c.params;
        if (c.sweep_param == "sigma_a") p.sigma_a = v;
        if (c.sweep_param == "gamma") p.gamma = v;
        if (c.sweep_param == "epsilon") p.epsilon = v;
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("sweep.values: ") + e.what());
        }
        if (c.sweep_param == "gamma")
            for (const auto& w : p.warnings()) c.notes.push_back("sweep value: " + w);
    }

    const ModelSpec model = c.build_model();  // structural checks throw ConfigError
    if (!c.x0.empty())
        check(static_cast<int>(c.x0.size()) == model.d, "model.x0",
              "one entry per state dimension (" + std::to_string(model.d) + ")");
    if (model.assumption_violating)
        c.notes.push_back("model '" + model.name +
                          "' has unbounded coefficients and violates the bounded-coefficient "
                          "assumptions; it is run with clamped coefficients regardless");
    for (const auto& w : c.params.warnings()) c.notes.push_back(w);
    return c;
}

}  // namespace detail

/// Flag overrides, keyed "section.key".
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses INI text plus overrides into a validated RunConfig.
inline RunConfig parse_config_text(const std::string& ini_text, const Overrides& overrides = {}) {
    detail::Tree tree;
    std::istringstream in(ini_text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }
    for (const auto& [key, value] : overrides) {
        if (!detail::known_keys().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
        tree.put(detail::Tree::path_type(key, '.'), value);
    }
    return detail::config_from_tree(tree);
}

/// Reads the config file (if any) and applies flag overrides.
inline RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const Overrides& overrides = {}) {
    std::string text;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot open config file '" + file->string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config_text(text, overrides);
}

}  // namespace jdmc
