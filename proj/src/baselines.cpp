#include "hamlearn/baselines.hpp"

#include "hamlearn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hamlearn {

std::string to_string(BaselineKind kind) {
    switch (kind) {
    case BaselineKind::SGD: return "sgd";
    case BaselineKind::Adam: return "adam";
    case BaselineKind::LBFGS: return "lbfgs";
    case BaselineKind::NelderMead: return "nelder-mead";
    }
    return "?";
}

BaselineKind parse_baseline_kind(std::string_view name) {
    if (name == "sgd" || name == "SGD") return BaselineKind::SGD;
    if (name == "adam" || name == "Adam") return BaselineKind::Adam;
    if (name == "lbfgs" || name == "LBFGS" || name == "l-bfgs") return BaselineKind::LBFGS;
    if (name == "nelder-mead" || name == "NelderMead" || name == "nm") return BaselineKind::NelderMead;
    throw std::invalid_argument("unknown baseline optimizer: " + std::string(name));
}

void BaselineConfig::validate() const {
    if ((kind == BaselineKind::SGD || kind == BaselineKind::Adam) && !(learning_rate >= 0.0))
        throw std::invalid_argument("BaselineConfig: learning rate must be >= 0");
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
        throw std::invalid_argument("BaselineConfig: need 0 < c1 < c2 < 1");
    if (lbfgs_memory < 1) throw std::invalid_argument("BaselineConfig: L-BFGS memory must be >= 1");
    if (max_line_search < 1) throw std::invalid_argument("BaselineConfig: max_line_search must be >= 1");
    if (!(nm_initial_edge > 0.0)) throw std::invalid_argument("BaselineConfig: simplex edge must be > 0");
}

namespace {

// Appends an accepted iterate; returns false (after padding) if it diverged.
bool accept(Trajectory& traj, const Eigen::VectorXd& theta, double f, std::size_t k, std::size_t T) {
    if (is_divergent(f)) {
        pad_diverged(traj, k, T);
        return false;
    }
    traj.thetas.push_back(theta);
    traj.losses.push_back(f);
    return true;
}

Trajectory run_first_order(const BaselineConfig& cfg, const Eigen::VectorXd& theta0, Objective& obj, std::size_t T) {
    Trajectory traj;
    Eigen::VectorXd theta = theta0;
    LossEvaluation e = obj.evaluate(theta);
    if (!accept(traj, theta, e.value, 0, T)) throw std::runtime_error("baseline: non-finite initial loss");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    double b1t = 1.0, b2t = 1.0;
    for (std::size_t k = 0; k < T; ++k) {
        traj.gradients.push_back(e.gradient);
        if (cfg.kind == BaselineKind::SGD) {
            theta -= cfg.learning_rate * e.gradient;
        } else {
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * e.gradient;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * e.gradient.cwiseAbs2();
            b1t *= cfg.beta1;
            b2t *= cfg.beta2;
            const Eigen::ArrayXd m_hat = m.array() / (1.0 - b1t);
            const Eigen::ArrayXd v_hat = v.array() / (1.0 - b2t);
            theta.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        e = obj.evaluate(theta);
        if (!accept(traj, theta, e.gradient.allFinite() ? e.value : std::numeric_limits<double>::infinity(), k + 1, T))
            break;
    }
    if (!traj.diverged) traj.final_gradient = e.gradient;
    traj.gradient_calls = obj.gradient_calls();
    return traj;
}

struct LinePoint {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd g;
};

// Cubic minimizer between two bracketing points, safeguarded into the
// interior of the interval; falls back to bisection.
double interpolate(const LinePoint& a, const LinePoint& b) {
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double mid = 0.5 * (lo + hi);
    if (!std::isfinite(a.f) || !std::isfinite(b.f) || !std::isfinite(a.slope) || !std::isfinite(b.slope)) return mid;
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc < 0.0) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double alpha = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) return mid;
    return alpha;
}

// Strong-Wolfe search (bracketing then zoom). Returns the accepted point, or
// the best sufficient-decrease point when the evaluation budget runs out
// before the curvature condition holds; alpha == 0 signals failure.
LinePoint wolfe_line_search(const BaselineConfig& cfg, Objective& obj, const LinePoint& start,
                            const Eigen::VectorXd& dir, double alpha0) {
    const double f0 = start.f;
    const double slope0 = start.slope;
    std::size_t evals = 0;
    auto probe = [&](double alpha) {
        LinePoint p;
        p.alpha = alpha;
        p.x = start.x + alpha * dir;
        LossEvaluation e = obj.evaluate(p.x);
        ++evals;
        const bool ok = std::isfinite(e.value) && e.gradient.allFinite();
        p.f = ok ? e.value : std::numeric_limits<double>::infinity();
        p.slope = ok ? e.gradient.dot(dir) : std::numeric_limits<double>::quiet_NaN();
        p.g = std::move(e.gradient);
        return p;
    };
    auto armijo = [&](const LinePoint& p) { return p.f <= f0 + cfg.wolfe_c1 * p.alpha * slope0; };
    auto curvature = [&](const LinePoint& p) { return std::abs(p.slope) <= -cfg.wolfe_c2 * slope0; };

    auto zoom = [&](LinePoint lo, LinePoint hi) {
        while (evals < cfg.max_line_search) {
            LinePoint p = probe(interpolate(lo, hi));
            if (!armijo(p) || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (curvature(p)) return p;
                if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(p);
            }
        }
        return lo;
    };

    LinePoint prev = start;
    prev.alpha = 0.0;
    double alpha = alpha0;
    for (std::size_t i = 0; evals < cfg.max_line_search; ++i) {
        LinePoint p = probe(alpha);
        if (!armijo(p) || (i > 0 && p.f >= prev.f)) return zoom(std::move(prev), std::move(p));
        if (curvature(p)) return p;
        if (p.slope >= 0.0) return zoom(std::move(p), std::move(prev));
        prev = std::move(p);
        alpha *= 2.0;
    }
    return prev;
}

Trajectory run_lbfgs(const BaselineConfig& cfg, const Eigen::VectorXd& theta0, Objective& obj, std::size_t T) {
    Trajectory traj;
    LinePoint cur;
    cur.x = theta0;
    {
        LossEvaluation e = obj.evaluate(cur.x);
        cur.f = e.value;
        cur.g = std::move(e.gradient);
    }
    if (!accept(traj, cur.x, cur.f, 0, T)) throw std::runtime_error("baseline: non-finite initial loss");

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    for (std::size_t k = 0; k < T; ++k) {
        traj.gradients.push_back(cur.g);

        // Two-loop recursion for d = -H g.
        Eigen::VectorXd q = cur.g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        cur.slope = cur.g.dot(dir);
        if (!(cur.slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -cur.g;
            cur.slope = -cur.g.squaredNorm();
        }
        if (cur.slope == 0.0) {
            // Stationary point: stay put.
            if (!accept(traj, cur.x, cur.f, k + 1, T)) break;
            continue;
        }
        const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / dir.norm()) : 1.0;

        LinePoint next = wolfe_line_search(cfg, obj, cur, dir, alpha0);
        if (next.alpha == 0.0) {
            ++traj.fallback_steps;
            next.x = cur.x - cfg.fallback_step * cur.g;
            LossEvaluation e = obj.evaluate(next.x);
            next.f = e.gradient.allFinite() ? e.value : std::numeric_limits<double>::infinity();
            next.g = std::move(e.gradient);
        }
        if (!accept(traj, next.x, next.f, k + 1, T)) break;

        const Eigen::VectorXd s = next.x - cur.x;
        const Eigen::VectorXd y = next.g - cur.g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > cfg.lbfgs_memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        cur = std::move(next);
    }
    if (!traj.diverged) traj.final_gradient = cur.g;
    traj.gradient_calls = obj.gradient_calls();
    return traj;
}

Trajectory run_nelder_mead(const BaselineConfig& cfg, const Eigen::VectorXd& theta0, Objective& obj, std::size_t T) {
    const auto n = theta0.size();
    std::vector<Eigen::VectorXd> x;
    std::vector<double> f;
    auto value = [&](const Eigen::VectorXd& p) {
        const double v = obj.value(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    x.push_back(theta0);
    f.push_back(value(theta0));
    Trajectory traj;
    if (!accept(traj, theta0, f[0], 0, T)) throw std::runtime_error("baseline: non-finite initial loss");
    for (Eigen::Index a = 0; a < n; ++a) {
        Eigen::VectorXd p = theta0;
        p[a] += cfg.nm_initial_edge;
        f.push_back(value(p));
        x.push_back(std::move(p));
    }

    std::vector<std::size_t> order(x.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<Eigen::VectorXd> xs;
        std::vector<double> fs;
        for (std::size_t i : order) {
            xs.push_back(std::move(x[i]));
            fs.push_back(f[i]);
        }
        x = std::move(xs);
        f = std::move(fs);
    };

    const auto worst = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < T; ++k) {
        sort_simplex();
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < worst; ++i) centroid += x[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + cfg.nm_reflect * (centroid - x[worst]);
        const double fr = value(xr);
        bool shrink = false;
        if (fr < f[0]) {
            const Eigen::VectorXd xe = centroid + cfg.nm_expand * (xr - centroid);
            const double fe = value(xe);
            if (fe < fr) {
                x[worst] = xe;
                f[worst] = fe;
            } else {
                x[worst] = xr;
                f[worst] = fr;
            }
        } else if (fr < f[worst - 1]) {
            x[worst] = xr;
            f[worst] = fr;
        } else if (fr < f[worst]) {
            const Eigen::VectorXd xc = centroid + cfg.nm_contract * (xr - centroid);
            const double fc = value(xc);
            if (fc <= fr) {
                x[worst] = xc;
                f[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            const Eigen::VectorXd xc = centroid + cfg.nm_contract * (x[worst] - centroid);
            const double fc = value(xc);
            if (fc < f[worst]) {
                x[worst] = xc;
                f[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i < x.size(); ++i) {
                x[i] = x[0] + cfg.nm_shrink * (x[i] - x[0]);
                f[i] = value(x[i]);
            }
        }
        const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
        if (!accept(traj, x[best], f[best], k + 1, T)) break;
    }
    traj.value_calls = obj.value_calls();
    traj.gradient_calls = obj.gradient_calls();
    return traj;
}

}  // namespace

Trajectory run_baseline(const BaselineConfig& config, const Eigen::VectorXd& theta0, Objective& objective,
                        std::size_t T) {
    config.validate();
    if (T < 1) throw std::invalid_argument("run_baseline: T must be >= 1");
    switch (config.kind) {
    case BaselineKind::SGD:
    case BaselineKind::Adam: return run_first_order(config, theta0, objective, T);
    case BaselineKind::LBFGS: return run_lbfgs(config, theta0, objective, T);
    case BaselineKind::NelderMead: return run_nelder_mead(config, theta0, objective, T);
    }
    throw std::invalid_argument("run_baseline: unknown kind");
}

std::vector<std::size_t> SweepTable::ranking() const {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[a].mean_final < rows[b].mean_final; });
    return idx;
}

SweepTable sweep_learning_rates(BaselineKind kind, const std::vector<double>& etas,
                                const std::vector<ProblemInstance>& problems, std::size_t T,
                                const BaselineConfig& base, std::size_t threads) {
    if (etas.empty() || problems.empty()) throw std::invalid_argument("sweep_learning_rates: empty input");
    SweepTable table;
    table.kind = kind;
    table.T = T;
    for (double eta : etas) {
        BaselineConfig cfg = base;
        cfg.kind = kind;
        cfg.learning_rate = eta;
        std::vector<Trajectory> runs(problems.size());
        parallel_for(problems.size(), threads, [&](std::size_t p) {
            Objective obj(problems[p]);
            runs[p] = run_baseline(cfg, problems[p].theta_init, obj, T);
        });

        SweepRow row;
        row.eta = eta;
        row.mean_curve.assign(T + 1, 0.0);
        const double np = static_cast<double>(problems.size());
        double sum_final = 0.0, sum_sq = 0.0;
        for (const auto& r : runs) {
            for (std::size_t k = 0; k <= T; ++k) row.mean_curve[k] += r.losses[k] / np;
            double traj_sum = 0.0;
            for (std::size_t k = 1; k <= T; ++k) traj_sum += r.losses[k];
            row.mean_trajectory += traj_sum / static_cast<double>(T) / np;
            sum_final += r.final_loss();
            sum_sq += r.final_loss() * r.final_loss();
            if (r.diverged) ++row.n_diverged;
        }
        const double mean = sum_final / np;
        row.std_final = std::sqrt(std::max(0.0, sum_sq / np - mean * mean));
        row.flagged = row.n_diverged > 0;
        row.mean_final = row.flagged ? std::numeric_limits<double>::infinity() : mean;
        table.rows.push_back(std::move(row));
    }
    table.best = table.ranking().front();
    return table;
}

}  // namespace hamlearn
