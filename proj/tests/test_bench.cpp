#include "doctest.h"

#include "oracles.hpp"

#include "hamlearn/experiment.hpp"
#include "hamlearn/stats.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

using namespace hamlearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hamlearn_test_bench_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

/// Small N=3 configuration that runs in well under a second.
ExperimentConfig tiny_config() {
    ExperimentConfig c = parse_config(R"(
seed = 17
[model]
n_qubits = 3
[data]
n_times = 12
t_max = 3.0
[bench]
n_test_problems = 6
T = 8
bootstrap_resamples = 200
optimizers = ["adam", "sgd", "lbfgs", "nelder-mead"]
)");
    return c;
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
    const std::string cmd = std::string(HAMLEARN_CLI) + " " + args + " > /dev/null 2> " + stderr_file.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("quantiles and summary") {
    const std::vector<double> x{4.0, 1.0, 3.0, 2.0, 5.0};
    CHECK(quantile(x, 0.0) == 1.0);
    CHECK(quantile(x, 1.0) == 5.0);
    CHECK(quantile(x, 0.5) == 3.0);
    CHECK(quantile(x, 0.25) == 2.0);
    CHECK(quantile(std::vector<double>{0.0, 10.0}, 0.3) == doctest::Approx(3.0));
    const Summary s = summarize(x);
    CHECK(s.mean == 3.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0)));
    CHECK(s.median == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.count == 5);
    CHECK(s.p25 <= s.median);
    CHECK(s.median <= s.p75);
    CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("bootstrap interval") {
    Rng rng(1);
    const std::vector<double> same(50, 0.25);
    const Interval c = bootstrap_ci(same, 500, 0.95, rng);
    CHECK(c.lo == 0.25);
    CHECK(c.hi == 0.25);

    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> g(1000);
    for (auto& v : g) v = n01(rng);
    const Interval ci = bootstrap_ci(g, 2000, 0.95, rng);
    const double mean = summarize(g).mean;
    CHECK(ci.lo < mean);
    CHECK(mean < ci.hi);
    const double expected = 2 * 1.96 / std::sqrt(1000.0);
    CHECK(ci.hi - ci.lo > 0.8 * expected);
    CHECK(ci.hi - ci.lo < 1.2 * expected);

    const Interval zero = bootstrap_ci(g, 2001, 0.0, rng);
    CHECK(zero.lo == zero.hi);

    Rng a(5), b(5);
    const Interval ia = bootstrap_ci(g, 300, 0.9, a);
    const Interval ib = bootstrap_ci(g, 300, 0.9, b);
    CHECK(ia.lo == ib.lo);
    CHECK(ia.hi == ib.hi);
    CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1.0}, 10, 0.95, rng), std::invalid_argument);
}

TEST_CASE("log histogram") {
    const std::vector<double> x{1e-3, 1e-2, 1e-2, 1.0, 0.0};
    const Histogram h = log_histogram(x, 10);
    REQUIRE(h.edges.size() == 11);
    REQUIRE(h.counts.size() == 10);
    CHECK(h.edges.front() == doctest::Approx(1e-4));
    CHECK(h.edges.back() == doctest::Approx(10.0));
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == x.size());
    for (std::size_t b = 1; b < h.edges.size(); ++b) CHECK(h.edges[b] > h.edges[b - 1]);
    CHECK(h.counts.front() >= 1);
}

TEST_CASE("config parsing") {
    const ExperimentConfig d = parse_config("");
    CHECK(d.n_qubits == 4);
    CHECK(d.model == ModelKind::TFIM);
    CHECK(d.optimizers.size() == 5);
    CHECK(d.n_test_problems == 300);
    CHECK(d.T == 100);

    const ExperimentConfig c = parse_config(R"(
seed = 3
[model]
kind = "xy"
n_qubits = 5
[[bench.optimizers]]
kind = "sgd"
learning_rate = 0.02
[[bench.optimizers]]
kind = "lstm"
)");
    CHECK(c.seed == 3);
    CHECK(c.model == ModelKind::XY);
    CHECK(c.n_qubits == 5);
    REQUIRE(c.optimizers.size() == 2);
    CHECK(c.optimizers[0].baseline.learning_rate == 0.02);
    CHECK(c.optimizers[1].is_lstm);

    CHECK_THROWS_WITH_AS(parse_config("[model]\nqubits = 4\n"), doctest::Contains("qubits"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("[bogus]\n"), doctest::Contains("bogus"), std::invalid_argument);
    CHECK_THROWS(parse_config("[model\n"));
    CHECK_THROWS(parse_config("[model]\nn_qubits = 1\n"));
}

TEST_CASE("gen writes reproducible datasets") {
    ExperimentConfig c = tiny_config();
    c.gen_problems = 3;
    const fs::path a = scratch("gen_a"), b = scratch("gen_b");
    const GenResult r = cmd_gen(c, a);
    cmd_gen(c, b);
    REQUIRE(r.files.size() == 3);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    for (const auto& f : r.files) CHECK(slurp(a / f) == slurp(b / f));

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest.at("n_problems") == 3);
    const auto problems = test_problems(c, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& entry = manifest.at("instances").at(i);
        CHECK(entry.at("hash") == instance_hash(problems[i]));
        const ProblemInstance p = problem_from_json(nlohmann::json::parse(slurp(a / entry.at("file").get<std::string>())));
        CHECK(p.theta_true == problems[i].theta_true);
        CHECK(p.theta_true.minCoeff() >= 1.0);
        CHECK(p.theta_true.maxCoeff() <= 2.0);
    }
}

TEST_CASE("bench with a frozen optimizer reports the initial loss") {
    ExperimentConfig c = tiny_config();
    c.optimizers = {parse_optimizer("sgd")};
    c.optimizers[0].baseline.learning_rate = 0.0;
    c.optimizers[0].label = "frozen";
    const fs::path out = scratch("frozen");
    const BenchResult r = cmd_bench(c, out);
    REQUIRE(r.optimizers.size() == 1);
    const auto problems = test_problems(c, c.n_test_problems);
    double mean_initial = 0.0;
    for (const auto& p : problems) mean_initial += loss_value(p.spec, p.theta_init, p.dataset, p.loss_kind);
    mean_initial /= static_cast<double>(problems.size());
    const OptimizerResult& o = r.optimizers[0];
    REQUIRE(o.mean_curve.size() == c.T + 1);
    for (double m : o.mean_curve) CHECK(m == doctest::Approx(mean_initial).epsilon(1e-14));
    REQUIRE(o.mean_delta_theta2.size() == 6);
    for (std::size_t a = 0; a < 6; ++a) {
        double expected = 0.0;
        for (const auto& p : problems) {
            const double d = p.theta_init[static_cast<Eigen::Index>(a)] - p.theta_true[static_cast<Eigen::Index>(a)];
            expected += d * d / static_cast<double>(problems.size());
        }
        CHECK(o.mean_delta_theta2[a] == doctest::Approx(expected).epsilon(1e-14));
    }
    CHECK(o.n_diverged == 0);
}

TEST_CASE("bench outputs are paired and consistent") {
    const ExperimentConfig c = tiny_config();
    const fs::path out = scratch("paired");
    const BenchResult r = cmd_bench(c, out);
    REQUIRE(r.optimizers.size() == 4);
    CHECK(r.seeds.size() == c.n_test_problems);
    for (const auto& o : r.optimizers) {
        CHECK(o.instances_hash == r.optimizers[0].instances_hash);
        CHECK(o.losses.size() == c.n_test_problems);
        for (double d : o.mean_delta_theta2) CHECK(d >= 0.0);
        for (std::size_t k = 0; k <= c.T; ++k) {
            CHECK(o.ci[k].lo <= o.mean_curve[k] + 1e-15);
            CHECK(o.mean_curve[k] <= o.ci[k].hi + 1e-15);
        }
    }
    // Every optimizer starts from the same instances, hence the same initial loss.
    for (const auto& o : r.optimizers)
        for (std::size_t i = 0; i < c.n_test_problems; ++i) CHECK(o.losses[i][0] == r.optimizers[0].losses[i][0]);

    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    const auto finals = read_csv(out / "final_losses.csv");
    REQUIRE(finals.size() == 1 + 4 * c.n_test_problems);
    CHECK(finals[0] == std::vector<std::string>{"optimizer", "instance", "problem_seed", "final_loss", "diverged"});
    for (const auto& entry : summary.at("optimizers")) {
        std::vector<double> values;
        for (std::size_t row = 1; row < finals.size(); ++row)
            if (finals[row][0] == entry.at("label")) values.push_back(std::stod(finals[row][3]));
        REQUIRE(values.size() == c.n_test_problems);
        const Summary s = summarize(values);
        CHECK(entry.at("final_loss").at("mean").get<double>() == s.mean);
        CHECK(entry.at("final_loss").at("std").get<double>() == s.std);
        CHECK(entry.at("final_loss").at("median").get<double>() == s.median);
        CHECK(entry.at("final_loss").at("max").get<double>() == s.max);
    }
    const auto curves = read_csv(out / "curves.csv");
    CHECK(curves.size() == 1 + 4 * (c.T + 1));
    CHECK(fs::exists(out / "delta_theta.csv"));
    CHECK(fs::exists(out / "config_echo.json"));

    const fs::path again = scratch("paired_again");
    cmd_bench(c, again);
    for (const char* f : {"summary.json", "curves.csv", "final_losses.csv", "delta_theta.csv"})
        CHECK(slurp(out / f) == slurp(again / f));
}

TEST_CASE("sweep output and best learning rate") {
    ExperimentConfig c = tiny_config();
    c.sweep_kind = BaselineKind::Adam;
    c.sweep_etas = {0.01, 0.1};
    c.sweep_problems = 3;
    const fs::path out = scratch("sweep");
    const SweepTable t = cmd_sweep(c, out);
    const auto rows = read_csv(out / "sweep.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "kind");
    std::size_t best_rows = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) best_rows += rows[r][7] == "1" ? 1 : 0;
    CHECK(best_rows == 1);

    ExperimentConfig d = tiny_config();
    apply_best_eta(d, out / "sweep.csv");
    for (const auto& o : d.optimizers)
        if (!o.is_lstm && o.baseline.kind == BaselineKind::Adam)
            CHECK(o.baseline.learning_rate == t.rows[t.best].eta);
    CHECK_THROWS(apply_best_eta(d, out / "missing.csv"));
}

TEST_CASE("format of numbers") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("command line errors are structured") {
    const fs::path dir = scratch("cli_err");
    const fs::path err = dir / "stderr.txt";
    CHECK(run_cli("bogus", err) == 1);
    auto j = nlohmann::json::parse(slurp(err));
    CHECK(j.at("error") == "usage");

    std::ofstream(dir / "bad.toml") << "[model]\nn_qbits = 4\n";
    CHECK(run_cli("gen --config " + (dir / "bad.toml").string() + " --out " + dir.string(), err) == 1);
    j = nlohmann::json::parse(slurp(err));
    CHECK(j.at("error") == "invalid_argument");
    CHECK(j.at("message").get<std::string>().find("n_qbits") != std::string::npos);

    CHECK(run_cli("train --resume --out " + (dir / "nothing").string(), err) == 1);
    CHECK(nlohmann::json::parse(slurp(err)).contains("error"));
}

TEST_CASE("command line training resumes") {
    const fs::path dir = scratch("cli_train");
    std::ofstream(dir / "a.toml") << "seed = 4\n[model]\nn_qubits = 3\n[data]\nn_times = 12\nt_max = 3.0\n"
                                     "[train]\nepochs = 2\nT = 4\nvalidate_every = 1\nn_validation_problems = 2\n";
    std::ofstream(dir / "b.toml") << "seed = 4\n[model]\nn_qubits = 3\n[data]\nn_times = 12\nt_max = 3.0\n"
                                     "[train]\nepochs = 4\nT = 4\nvalidate_every = 1\nn_validation_problems = 2\n";
    const fs::path err = dir / "stderr.txt";
    REQUIRE(run_cli("train --config " + (dir / "a.toml").string() + " --out " + (dir / "run").string(), err) == 0);
    // epochs counts the epochs run by this invocation.
    REQUIRE(run_cli("train --resume --config " + (dir / "a.toml").string() + " --out " + (dir / "run").string(), err) ==
            0);
    REQUIRE(run_cli("train --config " + (dir / "b.toml").string() + " --out " + (dir / "full").string(), err) == 0);
    const auto resumed = read_csv(dir / "run" / "train_log.csv");
    const auto full = read_csv(dir / "full" / "train_log.csv");
    REQUIRE(resumed.size() == 5);
    CHECK(resumed == full);
    const auto a = nlohmann::json::parse(slurp(dir / "run" / "checkpoint.json"));
    const auto b = nlohmann::json::parse(slurp(dir / "full" / "checkpoint.json"));
    CHECK(a.at("weights") == b.at("weights"));
    CHECK(a.at("metadata").at("epochs") == 4);
    CHECK(a.at("metadata").at("best_validation") == b.at("metadata").at("best_validation"));
    CHECK_FALSE(fs::exists(dir / "run" / "train_timing.csv"));
}
