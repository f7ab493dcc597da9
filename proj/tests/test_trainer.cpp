#include "doctest.h"

#include "oracles.hpp"

#include "hamlearn/trainer.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

using namespace hamlearn;

namespace {

TrainConfig small_config(std::size_t epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.T = 5;
    c.n_qubits = 3;
    c.sampling = oracle::small_sampling();
    c.validate_every = 2;
    c.n_validation_problems = 3;
    c.seed = 99;
    return c;
}

}  // namespace

TEST_CASE("single epoch") {
    const TrainResult r = meta_train(small_config(1));
    REQUIRE(r.log.epochs.size() == 1);
    CHECK(r.log.epochs[0].epoch == 1);
    CHECK(r.log.epochs[0].val_mean_final.has_value());
    CHECK(r.log.best_epoch == 1);
    CHECK(r.best.weights.all_finite());
    CHECK(r.best.metadata.at("epochs") == 1);
    CHECK(r.best.metadata.at("rng") == kRngName);
    CHECK(r.best.metadata.at("train_config") == train_config_to_json(small_config(1)));
    CHECK(r.state.step == 1);
}

TEST_CASE("training is deterministic") {
    const TrainResult a = meta_train(small_config(4));
    const TrainResult b = meta_train(small_config(4));
    REQUIRE(a.log.epochs.size() == 4);
    for (std::size_t e = 0; e < 4; ++e) {
        CHECK(a.log.epochs[e].meta_loss == b.log.epochs[e].meta_loss);
        CHECK(a.log.epochs[e].grad_norm == b.log.epochs[e].grad_norm);
        CHECK(a.log.epochs[e].problem_seed == b.log.epochs[e].problem_seed);
    }
    CHECK(a.state.weights.flatten() == b.state.weights.flatten());
    CHECK(a.best.weights.flatten() == b.best.weights.flatten());
}

TEST_CASE("resume continues the same run") {
    const TrainResult full = meta_train(small_config(6));
    const TrainResult first = meta_train(small_config(3));
    const TrainState restored =
        train_state_from_json(nlohmann::json::parse(train_state_to_json(first.state, first.best.config).dump()),
                              first.best.config);
    const TrainResult second = meta_train(small_config(3), restored);
    REQUIRE(second.log.epochs.size() == 3);
    CHECK(second.log.epochs.front().epoch == 4);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(second.log.epochs[e].meta_loss == full.log.epochs[e + 3].meta_loss);
        CHECK(second.log.epochs[e].problem_seed == full.log.epochs[e + 3].problem_seed);
    }
    CHECK(second.state.weights.flatten() == full.state.weights.flatten());
    CHECK(second.state.adam_m == full.state.adam_m);
    CHECK(second.state.epochs_done == 6);
}

TEST_CASE("best checkpoint has the lowest validation score") {
    const TrainResult r = meta_train(small_config(6));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : r.log.epochs)
        if (e.val_mean_final) best = std::min(best, *e.val_mean_final);
    CHECK(r.log.best_validation == best);
    const ValidationSummary v = validate(r.best.weights, r.best.config, validation_problems(small_config(6)), 5);
    CHECK(v.mean_final == best);

    std::size_t clipped = 0;
    for (const auto& e : r.log.epochs) clipped += e.clipped ? 1 : 0;
    CHECK(clipped == r.log.clip_events);
}

TEST_CASE("validation seeds are disjoint from training seeds") {
    TrainConfig c = small_config(1);
    c.n_validation_problems = 64;
    std::set<std::uint64_t> val;
    for (const auto& p : validation_problems(c)) val.insert(p.rng_seed);
    CHECK(val.size() == 64);
    for (std::size_t e = 1; e <= 10000; ++e) CHECK(val.count(training_problem_seed(c.seed, e)) == 0);
    CHECK(training_problem_seed(c.seed, 1) != training_problem_seed(c.seed + 1, 1));
}

TEST_CASE("validation summary") {
    const MetaOptConfig cfg;
    const LstmWeights zero = LstmWeights::zeros(cfg);
    const std::vector<ProblemInstance> probs = validation_problems(small_config(1));
    const ValidationSummary z = validate(zero, cfg, probs, 4);
    double mean_initial = 0.0;
    for (const auto& p : probs) mean_initial += loss_value(p.spec, p.theta_init, p.dataset, p.loss_kind);
    mean_initial /= static_cast<double>(probs.size());
    CHECK(z.mean_final == doctest::Approx(mean_initial).epsilon(1e-14));

    Rng rng(3);
    const LstmWeights w = init_weights(cfg, rng);
    const ValidationSummary one = validate(w, cfg, {probs[0]}, 4);
    Objective obj(probs[0]);
    const Unroll u = unroll_forward(w, cfg, probs[0].theta_init, obj, 4);
    CHECK(one.mean_final == u.trajectory.final_loss());
    CHECK(one.mean_trajectory == doctest::Approx(meta_loss(u.trajectory) / 4).epsilon(1e-15));
    const ValidationSummary twice = validate(w, cfg, {probs[0], probs[0]}, 4);
    CHECK(twice.mean_final == one.mean_final);
    CHECK(twice.mean_trajectory == one.mean_trajectory);
    CHECK_THROWS_AS(validate(w, cfg, {}, 4), std::invalid_argument);
}

TEST_CASE("train state serialization") {
    TrainConfig c = small_config(1);
    TrainState s = meta_train(c).state;
    s.best_validation = std::numeric_limits<double>::infinity();
    const MetaOptConfig cfg;
    const TrainState back = train_state_from_json(train_state_to_json(s, cfg), cfg);
    CHECK(std::isinf(back.best_validation));
    CHECK(back.adam_v == s.adam_v);
    nlohmann::json bad = train_state_to_json(s, cfg);
    bad["adam_m"] = std::vector<double>{1.0};
    CHECK_THROWS_AS(train_state_from_json(bad, cfg), SchemaError);
}

TEST_CASE("runaway training aborts") {
    TrainConfig c = small_config(20);
    c.meta.output_scale = 1e308;
    CHECK_THROWS_WITH_AS(meta_train(c), doctest::Contains("10%"), std::runtime_error);
}

TEST_CASE("config validation") {
    TrainConfig c = small_config(1);
    c.epochs = 0;
    CHECK_THROWS_AS(meta_train(c), std::invalid_argument);
    c = small_config(1);
    c.sampling.sigma = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config(1);
    c.meta_lr = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
