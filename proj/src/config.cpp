#include "hamlearn/config.hpp"

#include "toml.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hamlearn {

OptimizerSpec parse_optimizer(std::string_view kind) {
    OptimizerSpec spec;
    if (kind == "lstm" || kind == "LSTM") {
        spec.is_lstm = true;
    } else {
        spec.baseline.kind = parse_baseline_kind(kind);
        if (spec.baseline.kind == BaselineKind::SGD) spec.baseline.learning_rate = 0.001;
    }
    spec.label = default_label(spec);
    return spec;
}

std::string default_label(const OptimizerSpec& spec) {
    if (spec.is_lstm) return "lstm";
    const auto kind = spec.baseline.kind;
    if (kind == BaselineKind::SGD || kind == BaselineKind::Adam) {
        std::ostringstream ss;
        ss << to_string(kind) << '(' << spec.baseline.learning_rate << ')';
        return ss.str();
    }
    return to_string(kind);
}

std::vector<OptimizerSpec> default_optimizers() {
    std::vector<OptimizerSpec> out;
    for (const char* k : {"lstm", "adam", "sgd", "lbfgs", "nelder-mead"}) out.push_back(parse_optimizer(k));
    return out;
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.T = train_T;
    t.sampling = sampling;
    t.model = model;
    t.n_qubits = n_qubits;
    t.validate_every = validate_every;
    t.n_validation_problems = n_validation_problems;
    t.meta_lr = meta_lr;
    t.clip_norm = clip_norm;
    t.truncation = truncation;
    t.meta = lstm;
    t.seed = seed;
    t.threads = threads;
    return t;
}

void ExperimentConfig::validate() const {
    build_model(model, n_qubits);
    train_config().validate();
    if (n_test_problems < 1) throw std::invalid_argument("config: n_test_problems must be >= 1");
    if (T < 1) throw std::invalid_argument("config: bench T must be >= 1");
    if (optimizers.empty()) throw std::invalid_argument("config: empty optimizer list");
    for (const auto& o : optimizers)
        if (!o.is_lstm) o.baseline.validate();
    if (sweep_etas.empty()) throw std::invalid_argument("config: empty sweep eta list");
    if (!(ci_level >= 0.0 && ci_level < 1.0)) throw std::invalid_argument("config: ci_level must be in [0, 1)");
    if (bootstrap_resamples < 1 || histogram_bins < 1) throw std::invalid_argument("config: counts must be positive");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

namespace {

void check_keys(const toml::table& t, std::string_view where, const std::set<std::string>& allowed) {
    for (const auto& [key, node] : t) {
        if (!allowed.contains(std::string(key.str())))
            throw std::invalid_argument("config: unknown key '" + std::string(key.str()) + "' in " + std::string(where));
    }
}

template <typename T>
void read(const toml::table& t, std::string_view key, T& out) {
    const toml::node* n = t.get(key);
    if (!n) return;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = n->value<double>()) {
            out = *v;
            return;
        }
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = n->value<std::string>()) {
            out = *v;
            return;
        }
    } else if constexpr (std::is_same_v<T, bool>) {
        if (auto v = n->value<bool>()) {
            out = *v;
            return;
        }
    } else {
        if (auto v = n->value<std::int64_t>()) {
            if (*v < 0) throw std::invalid_argument("config: '" + std::string(key) + "' must be non-negative");
            out = static_cast<T>(*v);
            return;
        }
    }
    throw std::invalid_argument("config: '" + std::string(key) + "' has the wrong type");
}

std::vector<double> read_numbers(const toml::node& n, std::string_view key) {
    const toml::array* arr = n.as_array();
    if (!arr) throw std::invalid_argument("config: '" + std::string(key) + "' must be an array");
    std::vector<double> out;
    for (const auto& e : *arr) {
        auto v = e.value<double>();
        if (!v) throw std::invalid_argument("config: '" + std::string(key) + "' must contain numbers");
        out.push_back(*v);
    }
    return out;
}

const toml::table* sub(const toml::table& root, std::string_view name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    const toml::table* t = n->as_table();
    if (!t) throw std::invalid_argument("config: '" + std::string(name) + "' must be a table");
    return t;
}

OptimizerSpec read_optimizer(const toml::table& t) {
    check_keys(t, "[[bench.optimizers]]",
               {"kind", "label", "learning_rate", "beta1", "beta2", "epsilon", "memory", "c1", "c2",
                "max_line_search", "fallback_step", "initial_edge"});
    std::string kind;
    read(t, "kind", kind);
    if (kind.empty()) throw std::invalid_argument("config: optimizer entry without 'kind'");
    OptimizerSpec spec = parse_optimizer(kind);
    BaselineConfig& b = spec.baseline;
    read(t, "learning_rate", b.learning_rate);
    read(t, "beta1", b.beta1);
    read(t, "beta2", b.beta2);
    read(t, "epsilon", b.epsilon);
    read(t, "memory", b.lbfgs_memory);
    read(t, "c1", b.wolfe_c1);
    read(t, "c2", b.wolfe_c2);
    read(t, "max_line_search", b.max_line_search);
    read(t, "fallback_step", b.fallback_step);
    read(t, "initial_edge", b.nm_initial_edge);
    spec.label = default_label(spec);
    read(t, "label", spec.label);
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream ss;
        ss << "config: " << e.description() << " (line " << e.source().begin.line << ")";
        throw std::invalid_argument(ss.str());
    }
    check_keys(root, "top level", {"seed", "threads", "model", "data", "lstm", "train", "gen", "bench", "sweep"});

    ExperimentConfig c;
    c.optimizers = default_optimizers();
    read(root, "seed", c.seed);
    read(root, "threads", c.threads);

    if (const auto* t = sub(root, "model")) {
        check_keys(*t, "[model]", {"kind", "n_qubits"});
        std::string kind = to_string(c.model);
        read(*t, "kind", kind);
        c.model = parse_model_kind(kind);
        read(*t, "n_qubits", c.n_qubits);
    }
    if (const auto* t = sub(root, "data")) {
        check_keys(*t, "[data]", {"sigma", "sigma_in", "param_range", "n_times", "t_max", "initial_states", "loss"});
        auto& s = c.sampling;
        read(*t, "sigma", s.sigma);
        read(*t, "sigma_in", s.sigma_in);
        if (const auto* n = t->get("param_range")) {
            const auto r = read_numbers(*n, "param_range");
            if (r.size() != 2) throw std::invalid_argument("config: param_range must have two entries");
            s.param_lo = r[0];
            s.param_hi = r[1];
        }
        read(*t, "n_times", s.n_times);
        read(*t, "t_max", s.t_max);
        if (const auto* n = t->get("initial_states")) {
            const toml::array* arr = n->as_array();
            if (!arr) throw std::invalid_argument("config: initial_states must be an array");
            s.initial_states.clear();
            for (const auto& e : *arr) {
                auto v = e.value<std::string>();
                if (!v) throw std::invalid_argument("config: initial_states must contain strings");
                s.initial_states.push_back(parse_initial_state(*v));
            }
        }
        std::string loss = to_string(s.loss_kind);
        read(*t, "loss", loss);
        s.loss_kind = parse_loss_kind(loss);
    }
    if (const auto* t = sub(root, "lstm")) {
        check_keys(*t, "[lstm]", {"hidden_size", "n_layers", "preprocess", "logsign_p", "output_scale"});
        read(*t, "hidden_size", c.lstm.hidden_size);
        read(*t, "n_layers", c.lstm.n_layers);
        std::string pre = to_string(c.lstm.preprocess);
        read(*t, "preprocess", pre);
        c.lstm.preprocess = parse_preprocess(pre);
        read(*t, "logsign_p", c.lstm.logsign_p);
        read(*t, "output_scale", c.lstm.output_scale);
    }
    if (const auto* t = sub(root, "train")) {
        check_keys(*t, "[train]",
                   {"epochs", "T", "validate_every", "n_validation_problems", "meta_lr", "clip_norm", "truncation"});
        read(*t, "epochs", c.epochs);
        read(*t, "T", c.train_T);
        read(*t, "validate_every", c.validate_every);
        read(*t, "n_validation_problems", c.n_validation_problems);
        read(*t, "meta_lr", c.meta_lr);
        read(*t, "clip_norm", c.clip_norm);
        read(*t, "truncation", c.truncation);
    }
    if (const auto* t = sub(root, "gen")) {
        check_keys(*t, "[gen]", {"n_problems"});
        read(*t, "n_problems", c.gen_problems);
    }
    if (const auto* t = sub(root, "bench")) {
        check_keys(*t, "[bench]",
                   {"n_test_problems", "T", "checkpoint", "bootstrap_resamples", "ci_level", "histogram_bins", "optimizers"});
        read(*t, "n_test_problems", c.n_test_problems);
        read(*t, "T", c.T);
        read(*t, "checkpoint", c.checkpoint);
        read(*t, "bootstrap_resamples", c.bootstrap_resamples);
        read(*t, "ci_level", c.ci_level);
        read(*t, "histogram_bins", c.histogram_bins);
        if (const auto* n = t->get("optimizers")) {
            const toml::array* arr = n->as_array();
            if (!arr) throw std::invalid_argument("config: bench.optimizers must be an array of tables");
            c.optimizers.clear();
            for (const auto& e : *arr) {
                if (const auto* et = e.as_table()) {
                    c.optimizers.push_back(read_optimizer(*et));
                } else if (auto name = e.value<std::string>()) {
                    c.optimizers.push_back(parse_optimizer(*name));
                } else {
                    throw std::invalid_argument("config: bench.optimizers entries must be tables or strings");
                }
            }
        }
    }
    if (const auto* t = sub(root, "sweep")) {
        check_keys(*t, "[sweep]", {"kind", "etas", "n_problems"});
        std::string kind = to_string(c.sweep_kind);
        read(*t, "kind", kind);
        c.sweep_kind = parse_baseline_kind(kind);
        if (const auto* n = t->get("etas")) c.sweep_etas = read_numbers(*n, "etas");
        read(*t, "n_problems", c.sweep_problems);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json opts = nlohmann::json::array();
    for (const auto& o : c.optimizers) {
        nlohmann::json j = {{"label", o.label}, {"kind", o.is_lstm ? "lstm" : to_string(o.baseline.kind)}};
        if (!o.is_lstm) {
            const auto& b = o.baseline;
            j["learning_rate"] = b.learning_rate;
            j["beta1"] = b.beta1;
            j["beta2"] = b.beta2;
            j["epsilon"] = b.epsilon;
            j["memory"] = b.lbfgs_memory;
            j["c1"] = b.wolfe_c1;
            j["c2"] = b.wolfe_c2;
            j["max_line_search"] = b.max_line_search;
            j["fallback_step"] = b.fallback_step;
            j["initial_edge"] = b.nm_initial_edge;
        }
        opts.push_back(std::move(j));
    }
    nlohmann::json train = train_config_to_json(c.train_config());
    return {{"seed", c.seed},
            {"rng", kRngName},
            {"model", {{"kind", to_string(c.model)}, {"n_qubits", c.n_qubits}}},
            {"train", std::move(train)},
            {"gen", {{"n_problems", c.gen_problems == 0 ? c.n_test_problems : c.gen_problems}}},
            {"bench",
             {{"n_test_problems", c.n_test_problems},
              {"T", c.T},
              {"checkpoint", c.checkpoint},
              {"bootstrap_resamples", c.bootstrap_resamples},
              {"ci_level", c.ci_level},
              {"histogram_bins", c.histogram_bins},
              {"optimizers", std::move(opts)}}},
            {"sweep",
             {{"kind", to_string(c.sweep_kind)},
              {"etas", c.sweep_etas},
              {"n_problems", c.sweep_problems == 0 ? c.n_test_problems : c.sweep_problems}}}};
}

}  // namespace hamlearn
