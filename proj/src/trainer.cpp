#include "hamlearn/trainer.hpp"

#include "hamlearn/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hamlearn {

void TrainConfig::validate() const {
    if (epochs < 1 || T < 1 || validate_every < 1 || n_validation_problems < 1)
        throw std::invalid_argument("TrainConfig: counts must be positive");
    if (!(sampling.sigma >= 0.0) || !(sampling.sigma_in >= 0.0))
        throw std::invalid_argument("TrainConfig: sigma and sigma_in must be >= 0");
    if (!(sampling.param_lo < sampling.param_hi)) throw std::invalid_argument("TrainConfig: invalid parameter range");
    if (!(meta_lr > 0.0)) throw std::invalid_argument("TrainConfig: meta_lr must be > 0");
    meta.validate();
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    std::vector<std::string> states;
    for (auto s : c.sampling.initial_states) states.push_back(to_string(s));
    return {{"epochs", c.epochs},
            {"T", c.T},
            {"model", to_string(c.model)},
            {"n_qubits", c.n_qubits},
            {"sigma", c.sampling.sigma},
            {"sigma_in", c.sampling.sigma_in},
            {"param_range", {c.sampling.param_lo, c.sampling.param_hi}},
            {"n_times", c.sampling.n_times},
            {"t_max", c.sampling.t_max},
            {"initial_states", states},
            {"loss", to_string(c.sampling.loss_kind)},
            {"validate_every", c.validate_every},
            {"n_validation_problems", c.n_validation_problems},
            {"meta_optimizer", {{"name", "adam"}, {"lr", c.meta_lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}}},
            {"clip_norm", c.clip_norm},
            {"truncation", c.truncation},
            {"lstm", config_to_json(c.meta)},
            {"seed", c.seed},
            {"rng", kRngName}};
}

std::uint64_t training_problem_seed(std::uint64_t seed, std::size_t epoch) {
    return derive_seed(seed, seed_stream::train, epoch);
}

std::vector<ProblemInstance> validation_problems(const TrainConfig& config) {
    const ModelSpec spec = build_model(config.model, config.n_qubits);
    std::vector<ProblemInstance> out;
    for (std::size_t i = 0; i < config.n_validation_problems; ++i)
        out.push_back(sample_problem(spec, derive_seed(config.seed + 1, seed_stream::validation, i), config.sampling));
    return out;
}

ValidationSummary validate(const LstmWeights& weights, const MetaOptConfig& config,
                           const std::vector<ProblemInstance>& problems, std::size_t T, std::size_t threads) {
    if (problems.empty()) throw std::invalid_argument("validate: empty problem list");
    std::vector<double> finals(problems.size()), traj(problems.size());
    parallel_for(problems.size(), threads, [&](std::size_t p) {
        Objective obj(problems[p]);
        const Unroll u = unroll_forward(weights, config, problems[p].theta_init, obj, T,
                                        {.record_tape = false, .on_divergence = DivergencePolicy::Pad});
        finals[p] = u.trajectory.final_loss();
        traj[p] = meta_loss(u.trajectory) / static_cast<double>(T);
    });
    ValidationSummary s;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        s.mean_final += finals[p];
        s.mean_trajectory += traj[p];
    }
    s.mean_final /= static_cast<double>(problems.size());
    s.mean_trajectory /= static_cast<double>(problems.size());
    return s;
}

namespace {

nlohmann::json checkpoint_metadata(const TrainConfig& config, const TrainState& st) {
    return {{"seed", config.seed},
            {"epochs", st.epochs_done},
            {"best_epoch", st.best_epoch},
            {"best_validation", std::isfinite(st.best_validation) ? nlohmann::json(st.best_validation) : nlohmann::json()},
            {"rng", kRngName},
            {"train_config", train_config_to_json(config)}};
}

}  // namespace

TrainResult meta_train(const TrainConfig& config, const std::optional<TrainState>& resume,
                       const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    const ModelSpec spec = build_model(config.model, config.n_qubits);
    const std::vector<ProblemInstance> val = validation_problems(config);

    TrainResult result;
    TrainLog& log = result.log;
    TrainState& st = result.state;
    for (const auto& p : val) log.validation_seeds.push_back(p.rng_seed);

    if (resume) {
        st = *resume;
        st.weights.check_shape(config.meta);
    } else {
        Rng rng(derive_seed(config.seed, seed_stream::weights, 0));
        st.weights = init_weights(config.meta, rng);
        const auto n = static_cast<Eigen::Index>(st.weights.size());
        st.adam_m = Eigen::VectorXd::Zero(n);
        st.adam_v = Eigen::VectorXd::Zero(n);
        st.best_weights = st.weights;
        st.best_epoch = 0;
        st.best_validation = std::numeric_limits<double>::infinity();
    }

    const std::size_t first = st.epochs_done + 1;
    const std::size_t last = st.epochs_done + config.epochs;
    for (std::size_t epoch = first; epoch <= last; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.problem_seed = training_problem_seed(config.seed, epoch);
        const ProblemInstance problem = sample_problem(spec, rec.problem_seed, config.sampling);

        Eigen::VectorXd grad;
        try {
            Objective obj(problem);
            const Unroll u = unroll_forward(st.weights, config.meta, problem.theta_init, obj, config.T);
            rec.meta_loss = meta_loss(u.trajectory);
            grad = unroll_backward(st.weights, config.meta, u, config.truncation).flatten();
            rec.finite = std::isfinite(rec.meta_loss) && grad.allFinite();
        } catch (const std::runtime_error&) {
            rec.finite = false;
        } catch (const std::invalid_argument&) {
            rec.finite = false;
        }

        if (!rec.finite) {
            rec.meta_loss = std::numeric_limits<double>::quiet_NaN();
            ++log.nonfinite_epochs;
            if (static_cast<double>(log.nonfinite_epochs) > 0.1 * static_cast<double>(config.epochs))
                throw std::runtime_error("meta_train: more than 10% of epochs produced non-finite meta-losses");
        } else {
            rec.grad_norm = grad.norm();
            if (config.clip_norm > 0.0 && rec.grad_norm > config.clip_norm) {
                grad *= config.clip_norm / rec.grad_norm;
                rec.clipped = true;
                ++log.clip_events;
            }
            ++st.step;
            st.adam_m = config.beta1 * st.adam_m + (1.0 - config.beta1) * grad;
            st.adam_v = config.beta2 * st.adam_v + (1.0 - config.beta2) * grad.cwiseAbs2();
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(st.step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(st.step));
            Eigen::VectorXd flat = st.weights.flatten();
            flat.array() -= config.meta_lr * (st.adam_m.array() / bc1) / ((st.adam_v.array() / bc2).sqrt() + config.epsilon);
            st.weights.assign(flat);
        }
        st.epochs_done = epoch;

        if (epoch % config.validate_every == 0 || epoch == last) {
            const ValidationSummary v = validate(st.weights, config.meta, val, config.T, config.threads);
            rec.val_mean_final = v.mean_final;
            rec.val_mean_trajectory = v.mean_trajectory;
            if (v.mean_final < st.best_validation) {
                st.best_validation = v.mean_final;
                st.best_epoch = epoch;
                st.best_weights = st.weights;
            }
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_epoch) on_epoch(rec);
        log.epochs.push_back(std::move(rec));
    }

    log.best_epoch = st.best_epoch;
    log.best_validation = st.best_validation;
    result.best = Checkpoint{st.best_weights, config.meta, checkpoint_metadata(config, st)};
    return result;
}

nlohmann::json train_state_to_json(const TrainState& s, const MetaOptConfig& config) {
    return {{"schema", "hamlearn.train_state/1"},
            {"weights", save_checkpoint(s.weights, config)},
            {"best_weights", save_checkpoint(s.best_weights, config)},
            {"adam_m", std::vector<double>(s.adam_m.begin(), s.adam_m.end())},
            {"adam_v", std::vector<double>(s.adam_v.begin(), s.adam_v.end())},
            {"step", s.step},
            {"epochs_done", s.epochs_done},
            {"best_epoch", s.best_epoch},
            {"best_validation", std::isfinite(s.best_validation) ? nlohmann::json(s.best_validation) : nlohmann::json()}};
}

TrainState train_state_from_json(const nlohmann::json& doc, const MetaOptConfig& config) {
    try {
        if (doc.at("schema") != "hamlearn.train_state/1") throw SchemaError("train state: unsupported schema");
        TrainState s;
        Checkpoint w = load_checkpoint(doc.at("weights"));
        Checkpoint b = load_checkpoint(doc.at("best_weights"));
        w.weights.check_shape(config);
        s.weights = std::move(w.weights);
        s.best_weights = std::move(b.weights);
        const auto m = doc.at("adam_m").get<std::vector<double>>();
        const auto v = doc.at("adam_v").get<std::vector<double>>();
        if (m.size() != s.weights.size() || v.size() != s.weights.size())
            throw SchemaError("train state: optimizer moments have the wrong size");
        s.adam_m = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
        s.adam_v = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        s.step = doc.at("step").get<std::size_t>();
        s.epochs_done = doc.at("epochs_done").get<std::size_t>();
        s.best_epoch = doc.at("best_epoch").get<std::size_t>();
        const auto& bv = doc.at("best_validation");
        s.best_validation = bv.is_null() ? std::numeric_limits<double>::infinity() : bv.get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("train state: ") + e.what());
    }
}

}  // namespace hamlearn
