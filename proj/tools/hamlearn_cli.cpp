// hamlearn: dataset generation, meta-training, benchmarks and learning-rate
// sweeps for Hamiltonian parameter learning.

#include "hamlearn/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "TOML experiment file (defaults apply when omitted)");
    cmd->add_option("--seed", args.seed, "overrides the config seed");
    cmd->add_option("--out", args.out, "output directory")->capture_default_str();
    cmd->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
}

hamlearn::ExperimentConfig resolve(const CommonArgs& args) {
    hamlearn::ExperimentConfig c = args.config.empty() ? hamlearn::parse_config("") : hamlearn::load_config(args.config);
    if (args.seed) c.seed = *args.seed;
    if (args.threads) c.threads = *args.threads;
    c.validate();
    return c;
}

int fail(const std::string& kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamiltonian learning with a learned optimizer"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, bench_args, sweep_args;
    auto* gen = app.add_subcommand("gen", "write test datasets and an instance manifest");
    add_common(gen, gen_args);

    auto* train = app.add_subcommand("train", "meta-train the LSTM optimizer");
    add_common(train, train_args);
    bool resume = false, timing = false;
    train->add_flag("--resume", resume, "continue from <out>/train_state.json");
    train->add_flag("--timing", timing, "also write per-epoch wall-clock times");

    auto* bench = app.add_subcommand("bench", "run all optimizers on paired test instances");
    add_common(bench, bench_args);
    std::string checkpoint, best_eta;
    bench->add_option("--checkpoint", checkpoint, "LSTM checkpoint (overrides the config)");
    bench->add_option("--use-best-eta", best_eta, "sweep.csv whose best learning rates replace the configured ones");

    auto* sweep = app.add_subcommand("sweep", "learning-rate sweep of one baseline");
    add_common(sweep, sweep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*gen) {
            const auto r = hamlearn::cmd_gen(resolve(gen_args), gen_args.out);
            std::cout << "wrote " << r.files.size() << " datasets to " << gen_args.out << '\n';
        } else if (*train) {
            const auto r = hamlearn::cmd_train(resolve(train_args), train_args.out, {.resume = resume, .timing = timing});
            std::cout << "trained to epoch " << r.state.epochs_done << "; best epoch " << r.log.best_epoch
                      << " (validation mean final loss " << r.log.best_validation << ")\n";
        } else if (*bench) {
            auto c = resolve(bench_args);
            if (!checkpoint.empty()) c.checkpoint = checkpoint;
            if (!best_eta.empty()) hamlearn::apply_best_eta(c, best_eta);
            const auto r = hamlearn::cmd_bench(c, bench_args.out);
            for (const auto& o : r.optimizers)
                std::cout << o.label << ": mean final loss " << o.summary.mean << " (std " << o.summary.std << ", "
                          << o.n_diverged << " diverged)\n";
        } else if (*sweep) {
            const auto t = hamlearn::cmd_sweep(resolve(sweep_args), sweep_args.out);
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                std::cout << hamlearn::to_string(t.kind) << " eta=" << t.rows[i].eta << ": mean final loss "
                          << t.rows[i].mean_final << (i == t.best ? "  <- best" : "") << '\n';
        }
    } catch (const hamlearn::SchemaError& e) {
        return fail("schema", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
