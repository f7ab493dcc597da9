#include "hamlearn/dataset.hpp"

#include <algorithm>
#include <stdexcept>

namespace hamlearn {

std::vector<double> default_time_grid(std::size_t n, double t_max) {
    if (n < 2) throw std::invalid_argument("default_time_grid: need at least two times");
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = t_max * static_cast<double>(k) / static_cast<double>(n - 1);
    return t;
}

QuenchDataset generate_dataset(const ModelSpec& spec, const Eigen::VectorXd& theta_true, std::vector<double> times,
                               double sigma, Rng& rng, const std::vector<InitialState>& states) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("generate_dataset: sigma must be >= 0");
    if (states.empty()) throw std::invalid_argument("generate_dataset: no initial states");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("generate_dataset: times must be strictly increasing");

    const SpectralDecomposition decomp = diagonalize(assemble_hamiltonian(spec, theta_true));
    QuenchDataset data;
    data.times = std::move(times);
    data.initial_states = states;
    data.noise_sigma = sigma;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (InitialState s : states) {
        Eigen::MatrixXd y = evolve_populations(decomp, initial_state(s, spec.n_qubits()), data.times);
        if (sigma > 0.0) {
            for (Eigen::Index t = 0; t < y.rows(); ++t)
                for (Eigen::Index i = 0; i < y.cols(); ++i)
                    y(t, i) = std::clamp(y(t, i) + sigma * noise(rng), 0.0, 1.0);
        }
        data.observed.push_back(std::move(y));
    }
    return data;
}

std::string to_string(LossKind kind) {
    return kind == LossKind::KL ? "kl" : "squared";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "squared" || name == "SquaredError" || name == "squared_error") return LossKind::SquaredError;
    if (name == "kl" || name == "KL") return LossKind::KL;
    throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

ProblemInstance sample_problem(const ModelSpec& spec, std::uint64_t seed, const SamplingOptions& opts) {
    if (!(opts.param_lo < opts.param_hi)) throw std::invalid_argument("sample_problem: invalid parameter range");
    if (!(opts.sigma_in >= 0.0)) throw std::invalid_argument("sample_problem: sigma_in must be >= 0");
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(spec.n_params());
    std::uniform_real_distribution<double> uniform(opts.param_lo, opts.param_hi);
    Eigen::VectorXd theta_true(n);
    for (Eigen::Index a = 0; a < n; ++a) theta_true[a] = uniform(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd theta_init(n);
    for (Eigen::Index a = 0; a < n; ++a) theta_init[a] = theta_true[a] + opts.sigma_in * normal(rng);

    QuenchDataset data = generate_dataset(spec, theta_true, default_time_grid(opts.n_times, opts.t_max), opts.sigma,
                                          rng, opts.initial_states);
    return ProblemInstance{spec, std::move(theta_true), std::move(data), std::move(theta_init), opts.loss_kind, seed};
}

ProblemInstance permute_problem(const ProblemInstance& p, const std::vector<std::size_t>& perm) {
    ProblemInstance out{permute_parameters(p.spec, perm), p.theta_true, p.dataset, p.theta_init, p.loss_kind,
                        p.rng_seed};
    for (std::size_t a = 0; a < perm.size(); ++a) {
        out.theta_true[static_cast<Eigen::Index>(a)] = p.theta_true[static_cast<Eigen::Index>(perm[a])];
        out.theta_init[static_cast<Eigen::Index>(a)] = p.theta_init[static_cast<Eigen::Index>(perm[a])];
    }
    return out;
}

nlohmann::json problem_to_json(const ProblemInstance& p) {
    if (p.spec.kind() == ModelKind::Custom)
        throw std::invalid_argument("problem_to_json: custom models cannot be exported");
    nlohmann::json observed = nlohmann::json::array();
    for (const auto& y : p.dataset.observed) {
        nlohmann::json block = nlohmann::json::array();
        for (Eigen::Index t = 0; t < y.rows(); ++t) {
            std::vector<double> row(static_cast<std::size_t>(y.cols()));
            for (Eigen::Index i = 0; i < y.cols(); ++i) row[static_cast<std::size_t>(i)] = y(t, i);
            block.push_back(std::move(row));
        }
        observed.push_back(std::move(block));
    }
    std::vector<std::string> states;
    for (auto s : p.dataset.initial_states) states.push_back(to_string(s));
    return {
        {"model_kind", to_string(p.spec.kind())},
        {"n_qubits", p.spec.n_qubits()},
        {"times", p.dataset.times},
        {"sigma", p.dataset.noise_sigma},
        {"seed", p.rng_seed},
        {"theta_true", std::vector<double>(p.theta_true.begin(), p.theta_true.end())},
        {"theta_init", std::vector<double>(p.theta_init.begin(), p.theta_init.end())},
        {"initial_states", states},
        {"loss_kind", to_string(p.loss_kind)},
        {"observed", std::move(observed)},
    };
}

namespace {

Eigen::VectorXd to_vector(const nlohmann::json& arr) {
    const auto v = arr.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ProblemInstance problem_from_json(const nlohmann::json& doc) {
    try {
        ModelSpec spec = build_model(parse_model_kind(doc.at("model_kind").get<std::string>()),
                                     doc.at("n_qubits").get<std::size_t>());
        QuenchDataset data;
        data.times = doc.at("times").get<std::vector<double>>();
        data.noise_sigma = doc.at("sigma").get<double>();
        for (const auto& s : doc.at("initial_states")) data.initial_states.push_back(parse_initial_state(s.get<std::string>()));
        const auto& obs = doc.at("observed");
        if (obs.size() != data.initial_states.size())
            throw std::invalid_argument("observed block count does not match initial_states");
        for (const auto& block : obs) {
            if (block.size() != data.times.size()) throw std::invalid_argument("observed time count mismatch");
            Eigen::MatrixXd y(static_cast<Eigen::Index>(data.times.size()), static_cast<Eigen::Index>(spec.dim()));
            for (std::size_t t = 0; t < block.size(); ++t) {
                const auto row = block[t].get<std::vector<double>>();
                if (row.size() != spec.dim()) throw std::invalid_argument("observed row length mismatch");
                for (std::size_t i = 0; i < row.size(); ++i) y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = row[i];
            }
            data.observed.push_back(std::move(y));
        }
        Eigen::VectorXd theta_true = to_vector(doc.at("theta_true"));
        Eigen::VectorXd theta_init = to_vector(doc.at("theta_init"));
        if (static_cast<std::size_t>(theta_true.size()) != spec.n_params() ||
            static_cast<std::size_t>(theta_init.size()) != spec.n_params())
            throw std::invalid_argument("parameter vector length mismatch");
        return ProblemInstance{std::move(spec),
                               std::move(theta_true),
                               std::move(data),
                               std::move(theta_init),
                               parse_loss_kind(doc.value("loss_kind", std::string("squared"))),
                               doc.at("seed").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("problem_from_json: ") + e.what());
    }
}

}  // namespace hamlearn
