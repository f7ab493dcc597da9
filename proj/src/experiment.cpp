#include "hamlearn/experiment.hpp"

#include "hamlearn/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hamlearn {

namespace fs = std::filesystem;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    write_file(path, doc.dump(1) + "\n");
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Trajectory failed_run(const ProblemInstance& problem, std::size_t T) {
    Trajectory t;
    t.thetas.push_back(problem.theta_init);
    t.losses.push_back(std::numeric_limits<double>::infinity());
    pad_diverged(t, 0, T);
    return t;
}

bool uses_lstm(const ExperimentConfig& config) {
    for (const auto& o : config.optimizers)
        if (o.is_lstm) return true;
    return false;
}

}  // namespace

std::vector<ProblemInstance> test_problems(const ExperimentConfig& config, std::size_t n) {
    const ModelSpec spec = build_model(config.model, config.n_qubits);
    std::vector<std::optional<ProblemInstance>> slots(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        slots[i] = sample_problem(spec, derive_seed(config.seed, seed_stream::test, i), config.sampling);
    });
    std::vector<ProblemInstance> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::string instance_hash(const ProblemInstance& p) {
    return hex64(fnv1a(problem_to_json(p).dump()));
}

Trajectory run_optimizer(const OptimizerSpec& opt, const Checkpoint* checkpoint, const ProblemInstance& problem,
                         std::size_t T) {
    if (opt.is_lstm && !checkpoint) throw std::invalid_argument("run_optimizer: the LSTM needs a checkpoint");
    try {
        Objective obj(problem);
        if (opt.is_lstm)
            return unroll_forward(checkpoint->weights, checkpoint->config, problem.theta_init, obj, T,
                                  {.record_tape = false, .on_divergence = DivergencePolicy::Pad})
                .trajectory;
        return run_baseline(opt.baseline, problem.theta_init, obj, T);
    } catch (const std::runtime_error&) {
        return failed_run(problem, T);
    }
}

GenResult cmd_gen(const ExperimentConfig& config, const fs::path& out) {
    const std::size_t n = config.gen_problems == 0 ? config.n_test_problems : config.gen_problems;
    prepare_dir(out / "datasets");
    const std::vector<ProblemInstance> problems = test_problems(config, n);
    GenResult result;
    nlohmann::json instances = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "instance_%04zu.json", i);
        const std::string rel = std::string("datasets/") + name;
        const nlohmann::json doc = problem_to_json(problems[i]);
        write_json(out / rel, doc);
        result.files.push_back(rel);
        instances.push_back({{"index", i},
                             {"file", rel},
                             {"seed", problems[i].rng_seed},
                             {"theta_true", to_vector(problems[i].theta_true)},
                             {"theta_init", to_vector(problems[i].theta_init)},
                             {"hash", hex64(fnv1a(doc.dump()))}});
    }
    result.manifest = {{"rng", kRngName},
                       {"seed", config.seed},
                       {"model", to_string(config.model)},
                       {"n_qubits", config.n_qubits},
                       {"n_problems", n},
                       {"instances", std::move(instances)}};
    write_json(out / "manifest.json", result.manifest);
    write_json(out / "config_echo.json", config_to_json(config));
    return result;
}

TrainResult cmd_train(const ExperimentConfig& config, const fs::path& out, const TrainOptions& options) {
    prepare_dir(out);
    const TrainConfig tc = config.train_config();
    const fs::path log_path = out / "train_log.csv";
    const fs::path timing_path = out / "train_timing.csv";

    std::optional<TrainState> resume;
    std::string log_text = "epoch,meta_loss,val_mean_final_f,val_mean_trajectory_f,clipped,grad_norm,problem_seed\n";
    std::string timing_text = "epoch,seconds\n";
    if (options.resume) {
        const nlohmann::json doc = [&] {
            try {
                return nlohmann::json::parse(read_file(out / "train_state.json"));
            } catch (const nlohmann::json::parse_error& e) {
                throw SchemaError(std::string("train state: ") + e.what());
            }
        }();
        resume = train_state_from_json(doc, tc.meta);
        if (fs::exists(log_path)) log_text = read_file(log_path);
        if (options.timing && fs::exists(timing_path)) timing_text = read_file(timing_path);
    }

    TrainResult result = meta_train(tc, resume, [&](const EpochRecord& r) {
        log_text += std::to_string(r.epoch) + ',' + format_double(r.meta_loss) + ',' +
                    (r.val_mean_final ? format_double(*r.val_mean_final) : "") + ',' +
                    (r.val_mean_trajectory ? format_double(*r.val_mean_trajectory) : "") + ',' +
                    (r.clipped ? "1" : "0") + ',' + format_double(r.grad_norm) + ',' + std::to_string(r.problem_seed) +
                    '\n';
        if (options.timing) timing_text += std::to_string(r.epoch) + ',' + format_double(r.seconds) + '\n';
    });

    write_file(log_path, log_text);
    if (options.timing) write_file(timing_path, timing_text);
    write_file(out / "checkpoint.json",
               dump_checkpoint(save_checkpoint(result.best.weights, result.best.config, result.best.metadata)));
    write_json(out / "train_state.json", train_state_to_json(result.state, tc.meta));
    write_json(out / "config_echo.json", config_to_json(config));
    return result;
}

void apply_best_eta(ExperimentConfig& config, const fs::path& sweep_csv) {
    std::istringstream in(read_file(sweep_csv));
    std::string line;
    if (!std::getline(in, line) || line.rfind("kind,eta,", 0) != 0)
        throw std::invalid_argument("apply_best_eta: " + sweep_csv.string() + " is not a sweep table");
    std::map<BaselineKind, double> best;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() < 8) throw std::invalid_argument("apply_best_eta: malformed row '" + line + "'");
        if (cells.back() == "1") best[parse_baseline_kind(cells[0])] = std::stod(cells[1]);
    }
    if (best.empty()) throw std::invalid_argument("apply_best_eta: no best row in " + sweep_csv.string());
    for (auto& o : config.optimizers) {
        if (o.is_lstm) continue;
        const auto it = best.find(o.baseline.kind);
        if (it == best.end()) continue;
        const bool default_name = o.label == default_label(o);
        o.baseline.learning_rate = it->second;
        if (default_name) o.label = default_label(o);
    }
}

BenchResult cmd_bench(const ExperimentConfig& config, const fs::path& out) {
    if (uses_lstm(config) && config.checkpoint.empty())
        throw std::invalid_argument("bench: the optimizer list contains the LSTM but no checkpoint is configured");
    return cmd_bench(config, test_problems(config, config.n_test_problems), out);
}

BenchResult cmd_bench(const ExperimentConfig& config, const std::vector<ProblemInstance>& problems,
                      const fs::path& out) {
    if (problems.empty()) throw std::invalid_argument("bench: no test problems");
    std::optional<Checkpoint> checkpoint;
    if (uses_lstm(config)) {
        if (config.checkpoint.empty()) throw std::invalid_argument("bench: no checkpoint configured for the LSTM");
        checkpoint = read_checkpoint_file(config.checkpoint);
    }
    prepare_dir(out);

    const std::size_t P = problems.size();
    const std::size_t T = config.T;
    BenchResult result;
    std::vector<std::string> hashes(P);
    parallel_for(P, config.threads, [&](std::size_t p) { hashes[p] = instance_hash(problems[p]); });
    std::uint64_t combined = 0xcbf29ce484222325ULL;
    for (std::size_t p = 0; p < P; ++p) {
        result.seeds.push_back(problems[p].rng_seed);
        combined = fnv1a(hashes[p], combined);
    }

    std::string curves = "optimizer,iteration,mean_f,ci_lo,ci_hi,mean_log10_f\n";
    std::string finals = "optimizer,instance,problem_seed,final_loss,diverged\n";
    std::string deltas = "optimizer,parameter,mean_delta_theta2\n";
    nlohmann::json opt_docs = nlohmann::json::array();

    for (std::size_t o = 0; o < config.optimizers.size(); ++o) {
        const OptimizerSpec& opt = config.optimizers[o];
        std::vector<Trajectory> runs(P);
        parallel_for(P, config.threads, [&](std::size_t p) {
            runs[p] = run_optimizer(opt, checkpoint ? &*checkpoint : nullptr, problems[p], T);
        });

        OptimizerResult r;
        r.label = opt.label;
        // Instances are passed by reference, so every optimizer sees the same ones.
        r.instances_hash = hex64(combined);
        const auto n_params = static_cast<std::size_t>(problems.front().theta_true.size());
        r.mean_delta_theta2.assign(n_params, 0.0);
        for (std::size_t p = 0; p < P; ++p) {
            const Trajectory& t = runs[p];
            r.losses.push_back(t.losses);
            r.final_losses.push_back(t.final_loss());
            r.diverged.push_back(t.diverged);
            if (t.diverged) ++r.n_diverged;
            r.mean_gradient_calls += static_cast<double>(t.gradient_calls) / static_cast<double>(P);
            r.mean_value_calls += static_cast<double>(t.value_calls) / static_cast<double>(P);
            const Eigen::VectorXd d = t.thetas.back() - problems[p].theta_true;
            for (std::size_t a = 0; a < std::min<std::size_t>(n_params, static_cast<std::size_t>(d.size())); ++a)
                r.mean_delta_theta2[a] += d[static_cast<Eigen::Index>(a)] * d[static_cast<Eigen::Index>(a)] /
                                          static_cast<double>(P);
        }

        Rng rng(derive_seed(config.seed, seed_stream::bootstrap, o));
        std::vector<double> column(P);
        for (std::size_t k = 0; k <= T; ++k) {
            double log_sum = 0.0;
            for (std::size_t p = 0; p < P; ++p) {
                column[p] = r.losses[p][k];
                log_sum += std::log10(std::max(column[p], std::numeric_limits<double>::min()));
            }
            const double mean = summarize(column).mean;
            const Interval ci = P >= 2 ? bootstrap_ci(column, config.bootstrap_resamples, config.ci_level, rng)
                                       : Interval{mean, mean};
            r.mean_curve.push_back(mean);
            r.ci.push_back(ci);
            r.mean_log10_curve.push_back(log_sum / static_cast<double>(P));
            curves += opt.label + ',' + std::to_string(k) + ',' + format_double(mean) + ',' + format_double(ci.lo) +
                      ',' + format_double(ci.hi) + ',' + format_double(r.mean_log10_curve.back()) + '\n';
        }
        for (std::size_t p = 0; p < P; ++p)
            finals += opt.label + ',' + std::to_string(p) + ',' + std::to_string(problems[p].rng_seed) + ',' +
                      format_double(r.final_losses[p]) + ',' + (r.diverged[p] ? "1" : "0") + '\n';
        for (std::size_t a = 0; a < n_params; ++a)
            deltas += opt.label + ',' + std::to_string(a) + ',' + format_double(r.mean_delta_theta2[a]) + '\n';

        r.summary = summarize(r.final_losses);
        r.histogram = log_histogram(r.final_losses, config.histogram_bins);
        const Summary& s = r.summary;
        nlohmann::json doc = {
            {"label", r.label},
            {"kind", opt.is_lstm ? "lstm" : to_string(opt.baseline.kind)},
            {"instances_hash", r.instances_hash},
            {"final_loss",
             {{"mean", s.mean},
              {"std", s.std},
              {"median", s.median},
              {"p25", s.p25},
              {"p75", s.p75},
              {"min", s.min},
              {"max", s.max},
              {"count", s.count}}},
            {"initial_mean", r.mean_curve.front()},
            {"n_diverged", r.n_diverged},
            {"mean_gradient_calls", r.mean_gradient_calls},
            {"mean_value_calls", r.mean_value_calls},
            {"mean_delta_theta2", r.mean_delta_theta2},
            {"histogram", {{"edges", r.histogram.edges}, {"counts", r.histogram.counts}}}};
        if (!opt.is_lstm && (opt.baseline.kind == BaselineKind::SGD || opt.baseline.kind == BaselineKind::Adam))
            doc["learning_rate"] = opt.baseline.learning_rate;
        opt_docs.push_back(std::move(doc));
        result.optimizers.push_back(std::move(r));
    }

    std::vector<std::size_t> order(result.optimizers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.optimizers[a].summary.mean < result.optimizers[b].summary.mean;
    });
    std::vector<std::string> ranking;
    for (std::size_t i : order) ranking.push_back(result.optimizers[i].label);

    const nlohmann::json summary = {{"rng", kRngName},
                                    {"seed", config.seed},
                                    {"model", to_string(config.model)},
                                    {"n_qubits", config.n_qubits},
                                    {"sigma", config.sampling.sigma},
                                    {"n_test_problems", P},
                                    {"T", T},
                                    {"bootstrap_resamples", config.bootstrap_resamples},
                                    {"ci_level", config.ci_level},
                                    {"instances_hash", hex64(combined)},
                                    {"instance_hashes", hashes},
                                    {"ranking_by_mean_final", ranking},
                                    {"optimizers", std::move(opt_docs)}};
    write_file(out / "curves.csv", curves);
    write_file(out / "final_losses.csv", finals);
    write_file(out / "delta_theta.csv", deltas);
    write_json(out / "summary.json", summary);
    write_json(out / "config_echo.json", config_to_json(config));
    return result;
}

SweepTable cmd_sweep(const ExperimentConfig& config, const fs::path& out) {
    prepare_dir(out);
    const std::size_t n = config.sweep_problems == 0 ? config.n_test_problems : config.sweep_problems;
    BaselineConfig base;
    base.kind = config.sweep_kind;
    for (const auto& o : config.optimizers)
        if (!o.is_lstm && o.baseline.kind == config.sweep_kind) {
            base = o.baseline;
            break;
        }
    const SweepTable table =
        sweep_learning_rates(config.sweep_kind, config.sweep_etas, test_problems(config, n), config.T, base, config.threads);

    const std::string kind = to_string(table.kind);
    std::string rows = "kind,eta,mean_final,std_final,mean_trajectory,n_diverged,flagged,is_best\n";
    std::string curves = "kind,eta,iteration,mean_f\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const SweepRow& r = table.rows[i];
        rows += kind + ',' + format_double(r.eta) + ',' + format_double(r.mean_final) + ',' +
                format_double(r.std_final) + ',' + format_double(r.mean_trajectory) + ',' +
                std::to_string(r.n_diverged) + ',' + (r.flagged ? "1" : "0") + ',' + (i == table.best ? "1" : "0") +
                '\n';
        for (std::size_t k = 0; k < r.mean_curve.size(); ++k)
            curves += kind + ',' + format_double(r.eta) + ',' + std::to_string(k) + ',' + format_double(r.mean_curve[k]) +
                      '\n';
    }
    write_file(out / "sweep.csv", rows);
    write_file(out / "sweep_curves.csv", curves);
    write_json(out / "config_echo.json", config_to_json(config));
    return table;
}

}  // namespace hamlearn
