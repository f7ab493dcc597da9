#include "hamlearn/lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hamlearn {

std::string to_string(Preprocess p) {
    return p == Preprocess::Raw ? "raw" : "logsign";
}

Preprocess parse_preprocess(std::string_view name) {
    if (name == "raw" || name == "Raw") return Preprocess::Raw;
    if (name == "logsign" || name == "LogSign") return Preprocess::LogSign;
    throw std::invalid_argument("unknown preprocessing mode: " + std::string(name));
}

void MetaOptConfig::validate() const {
    if (hidden_size < 1) throw std::invalid_argument("MetaOptConfig: hidden_size must be >= 1");
    if (n_layers < 1) throw std::invalid_argument("MetaOptConfig: n_layers must be >= 1");
    if (!(logsign_p > 0.0)) throw std::invalid_argument("MetaOptConfig: logsign_p must be > 0");
    if (!std::isfinite(output_scale)) throw std::invalid_argument("MetaOptConfig: output_scale must be finite");
}

LstmWeights LstmWeights::zeros(const MetaOptConfig& config) {
    config.validate();
    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    LstmWeights w;
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        const Eigen::Index in = l == 0 ? static_cast<Eigen::Index>(config.input_dim()) : h;
        w.layers.push_back({Eigen::MatrixXd::Zero(4 * h, in), Eigen::MatrixXd::Zero(4 * h, h), Eigen::VectorXd::Zero(4 * h)});
    }
    w.readout = Eigen::VectorXd::Zero(h);
    return w;
}

std::size_t LstmWeights::size() const {
    std::size_t n = static_cast<std::size_t>(readout.size()) + 1;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.w_in.size() + l.w_rec.size() + l.bias.size());
    return n;
}

Eigen::VectorXd LstmWeights::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(size()));
    Eigen::Index pos = 0;
    auto put = [&](const auto& m) {
        flat.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        pos += m.size();
    };
    for (const auto& l : layers) {
        put(l.w_in);
        put(l.w_rec);
        put(l.bias);
    }
    put(readout);
    flat[pos] = readout_bias;
    return flat;
}

void LstmWeights::assign(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != size())
        throw std::invalid_argument("LstmWeights::assign: size mismatch");
    Eigen::Index pos = 0;
    auto get = [&](auto& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(pos, m.size());
        pos += m.size();
    };
    for (auto& l : layers) {
        get(l.w_in);
        get(l.w_rec);
        get(l.bias);
    }
    get(readout);
    readout_bias = flat[pos];
}

bool LstmWeights::all_finite() const {
    return flatten().allFinite();
}

void LstmWeights::check_shape(const MetaOptConfig& config) const {
    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    if (layers.size() != config.n_layers) throw std::invalid_argument("LstmWeights: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Eigen::Index in = l == 0 ? static_cast<Eigen::Index>(config.input_dim()) : h;
        const auto& L = layers[l];
        if (L.w_in.rows() != 4 * h || L.w_in.cols() != in || L.w_rec.rows() != 4 * h || L.w_rec.cols() != h ||
            L.bias.size() != 4 * h)
            throw std::invalid_argument("LstmWeights: layer " + std::to_string(l) + " shape mismatch");
    }
    if (readout.size() != h) throw std::invalid_argument("LstmWeights: readout shape mismatch");
}

LstmWeights init_weights(const MetaOptConfig& config, Rng& rng) {
    LstmWeights w = LstmWeights::zeros(config);
    const double s = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
    std::uniform_real_distribution<double> u(-s, s);
    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    for (auto& l : w.layers) {
        for (Eigen::Index k = 0; k < l.w_in.size(); ++k) l.w_in.data()[k] = u(rng);
        for (Eigen::Index k = 0; k < l.w_rec.size(); ++k) l.w_rec.data()[k] = u(rng);
        l.bias.segment(h, h).setOnes();
    }
    for (Eigen::Index k = 0; k < h; ++k) w.readout[k] = 0.01 * u(rng);
    w.readout_bias = 0.0;
    return w;
}

Eigen::VectorXd preprocess_gradient(double g, const MetaOptConfig& config) {
    if (config.preprocess == Preprocess::Raw) return Eigen::VectorXd::Constant(1, g);
    const double p = config.logsign_p;
    Eigen::VectorXd out(2);
    if (std::abs(g) >= std::exp(-p)) {
        out << std::log(std::abs(g)) / p, (g > 0.0) - (g < 0.0);
    } else {
        out << -1.0, std::exp(p) * g;
    }
    return out;
}

LstmState LstmState::zeros(std::size_t n_coords, const MetaOptConfig& config) {
    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    CoordinateState cs;
    cs.h.assign(config.n_layers, Eigen::VectorXd::Zero(h));
    cs.c.assign(config.n_layers, Eigen::VectorXd::Zero(h));
    return LstmState{std::vector<CoordinateState>(n_coords, cs)};
}

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    return (1.0 + (-z.array()).exp()).inverse().matrix();
}

}  // namespace

LstmStepResult lstm_step(const LstmWeights& weights, const MetaOptConfig& config, const LstmState& state,
                         const Eigen::VectorXd& grad, StepTape* tape) {
    if (static_cast<std::size_t>(grad.size()) != state.n_coords())
        throw std::invalid_argument("lstm_step: state has " + std::to_string(state.n_coords()) +
                                    " coordinates, gradient has " + std::to_string(grad.size()));
    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    const std::size_t n = state.n_coords();
    LstmStepResult out{Eigen::VectorXd(grad.size()), state};
    if (tape) tape->assign(n, std::vector<CellRecord>(config.n_layers));

    for (std::size_t a = 0; a < n; ++a) {
        const double ga = grad[static_cast<Eigen::Index>(a)];
        if (!std::isfinite(ga))
            throw std::invalid_argument("lstm_step: non-finite gradient at coordinate " + std::to_string(a));
        Eigen::VectorXd x = preprocess_gradient(ga, config);
        CoordinateState& cs = out.state.coords[a];
        for (std::size_t l = 0; l < config.n_layers; ++l) {
            const LstmLayer& L = weights.layers[l];
            const Eigen::VectorXd z = L.w_in * x + L.w_rec * cs.h[l] + L.bias;
            Eigen::VectorXd i = sigmoid(z.segment(0, h));
            Eigen::VectorXd f = sigmoid(z.segment(h, h));
            Eigen::VectorXd g = z.segment(2 * h, h).array().tanh().matrix();
            Eigen::VectorXd o = sigmoid(z.segment(3 * h, h));
            Eigen::VectorXd c = f.cwiseProduct(cs.c[l]) + i.cwiseProduct(g);
            Eigen::VectorXd tc = c.array().tanh().matrix();
            Eigen::VectorXd hn = o.cwiseProduct(tc);
            if (tape) {
                (*tape)[a][l] = CellRecord{x, cs.h[l], cs.c[l], i, f, g, o, c, tc};
            }
            cs.h[l] = hn;
            cs.c[l] = std::move(c);
            x = std::move(hn);
        }
        out.update[static_cast<Eigen::Index>(a)] = config.output_scale * (weights.readout.dot(x) + weights.readout_bias);
    }
    return out;
}

Unroll unroll_forward(const LstmWeights& weights, const MetaOptConfig& config, const Eigen::VectorXd& theta0,
                      Objective& objective, std::size_t T, const UnrollOptions& options) {
    if (T < 1) throw std::invalid_argument("unroll_forward: T must be >= 1");
    weights.check_shape(config);
    Unroll out;
    Trajectory& traj = out.trajectory;
    LstmState state = LstmState::zeros(static_cast<std::size_t>(theta0.size()), config);
    Eigen::VectorXd theta = theta0;
    LossEvaluation eval = objective.evaluate(theta);
    traj.thetas.push_back(theta);
    traj.losses.push_back(eval.value);
    if (is_divergent(eval.value)) throw std::runtime_error("unroll_forward: non-finite initial loss");

    for (std::size_t k = 0; k < T; ++k) {
        StepTape* tape = nullptr;
        if (options.record_tape) tape = &out.tape.emplace_back();
        LstmStepResult step = lstm_step(weights, config, state, eval.gradient, tape);
        traj.gradients.push_back(eval.gradient);
        state = std::move(step.state);
        theta += step.update;
        eval = objective.evaluate(theta);
        if (is_divergent(eval.value) || !eval.gradient.allFinite()) {
            if (options.on_divergence == DivergencePolicy::Throw)
                throw std::runtime_error("unroll_forward: loss diverged at step " + std::to_string(k + 1) + " (f = " +
                                         std::to_string(eval.value) + ")");
            traj.gradient_calls = objective.gradient_calls();
            traj.value_calls = objective.value_calls();
            pad_diverged(traj, k + 1, T);
            return out;
        }
        traj.thetas.push_back(theta);
        traj.losses.push_back(eval.value);
    }
    traj.final_gradient = std::move(eval.gradient);
    traj.gradient_calls = objective.gradient_calls();
    traj.value_calls = objective.value_calls();
    return out;
}

double meta_loss(const Trajectory& traj) {
    double sum = 0.0;
    for (std::size_t k = 1; k < traj.losses.size(); ++k) sum += traj.losses[k];
    return sum;
}

LstmWeights unroll_backward(const LstmWeights& weights, const MetaOptConfig& config, const Unroll& unroll,
                            std::size_t truncation) {
    const Trajectory& traj = unroll.trajectory;
    const std::size_t T = traj.steps();
    if (T == 0 || unroll.tape.size() != T || traj.gradients.size() != T || traj.diverged ||
        traj.final_gradient.size() != traj.thetas.front().size())
        throw std::invalid_argument("unroll_backward: incomplete trajectory tape");

    const auto h = static_cast<Eigen::Index>(config.hidden_size);
    const std::size_t n_layers = config.n_layers;
    const std::size_t n = static_cast<std::size_t>(traj.thetas.front().size());
    LstmWeights grad = LstmWeights::zeros(config);

    const std::size_t window = truncation == 0 ? T : truncation;
    auto window_start = [&](std::size_t k) { return k % window == 0; };

    // dL/dg_k = sum_{j > k} grad f(theta^(j)): theta^(j) = theta^(j-1) + g_{j-1} with constant gradient inputs.
    std::vector<Eigen::VectorXd> seed(T);
    Eigen::VectorXd acc = traj.final_gradient;
    for (std::size_t k = T; k-- > 0;) {
        seed[k] = acc;
        if (k == 0) break;
        if (window_start(k)) acc.setZero();
        acc += traj.gradients[k];
    }

    for (std::size_t a = 0; a < n; ++a) {
        std::vector<Eigen::VectorXd> dh_next(n_layers, Eigen::VectorXd::Zero(h));
        std::vector<Eigen::VectorXd> dc_next(n_layers, Eigen::VectorXd::Zero(h));
        for (std::size_t k = T; k-- > 0;) {
            if (k + 1 < T && window_start(k + 1)) {
                for (auto& v : dh_next) v.setZero();
                for (auto& v : dc_next) v.setZero();
            }
            const auto& cells = unroll.tape[k].at(a);
            const double dg = config.output_scale * seed[k][static_cast<Eigen::Index>(a)];
            grad.readout += dg * cells.back().o.cwiseProduct(cells.back().tanh_c);
            grad.readout_bias += dg;

            Eigen::VectorXd dh_above = dg * weights.readout;
            for (std::size_t l = n_layers; l-- > 0;) {
                const CellRecord& r = cells[l];
                const LstmLayer& L = weights.layers[l];
                LstmLayer& G = grad.layers[l];
                const Eigen::VectorXd dh = dh_above + dh_next[l];
                const Eigen::VectorXd d_o = dh.cwiseProduct(r.tanh_c);
                const Eigen::VectorXd dc =
                    dh.cwiseProduct(r.o).cwiseProduct((1.0 - r.tanh_c.array().square()).matrix()) + dc_next[l];
                Eigen::VectorXd dz(4 * h);
                dz.segment(0, h) = dc.cwiseProduct(r.g).array() * r.i.array() * (1.0 - r.i.array());
                dz.segment(h, h) = dc.cwiseProduct(r.c_prev).array() * r.f.array() * (1.0 - r.f.array());
                dz.segment(2 * h, h) = dc.cwiseProduct(r.i).array() * (1.0 - r.g.array().square());
                dz.segment(3 * h, h) = d_o.array() * r.o.array() * (1.0 - r.o.array());
                dc_next[l] = dc.cwiseProduct(r.f);

                G.w_in.noalias() += dz * r.x.transpose();
                G.w_rec.noalias() += dz * r.h_prev.transpose();
                G.bias += dz;
                dh_next[l].noalias() = L.w_rec.transpose() * dz;
                if (l > 0) dh_above.noalias() = L.w_in.transpose() * dz;
            }
        }
    }
    return grad;
}

}  // namespace hamlearn
