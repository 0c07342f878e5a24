#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "homog/dataio.hpp"
#include "homog/errors.hpp"
#include "homog/experiment.hpp"
#include "support.hpp"

using namespace homog;

TEST_SUITE_BEGIN("experiment");

TEST_CASE("fixed sampling replicates one draw") {
    const auto sets = sample_fixed(20, 20, 3, 5);
    REQUIRE(sets.size() == 3);
    std::set<std::size_t> unique(sets[0].begin(), sets[0].end());
    CHECK(unique.size() == 20);  // n = pool means every index
    CHECK(sets[0] == sets[1]);
    CHECK(sets[1] == sets[2]);
    CHECK(sample_fixed(20, 20, 3, 5) == sets);
    CHECK_THROWS_AS(sample_fixed(10, 11, 1, 0), InvalidArgument);
}

TEST_CASE("disjoint sampling partitions without overlap") {
    const auto sets = sample_disjoint(30, 10, 3, 9);
    REQUIRE(sets.size() == 3);
    std::set<std::size_t> all;
    for (const auto& s : sets) {
        CHECK(s.size() == 10);
        all.insert(s.begin(), s.end());
    }
    CHECK(all.size() == 30);  // pairwise disjoint and exhaustive here
    CHECK_THROWS_AS(sample_disjoint(29, 10, 3, 9), InvalidArgument);
}

TEST_CASE("with one task and the full pool the protocols coincide") {
    CHECK(sample_fixed(25, 25, 1, 3) == sample_disjoint(25, 25, 1, 3));
    // Any k >= 2 cannot draw the full pool disjointly.
    CHECK_THROWS_AS(sample_disjoint(25, 25, 2, 3), InvalidArgument);
}

TEST_CASE("mlp trials run end to end and stay deterministic") {
    const TabularDataset d = synthesize_dataset(300, 4, 2, 0.7, 0.15, 0, 53);
    const TrialSeeds seeds = trial_seeds(11, 60, 0, 0);
    const TrialResult a = run_trial(d, Protocol::Fixed, 60, ModelFamily::Mlp, seeds);
    const TrialResult b = run_trial(d, Protocol::Fixed, 60, ModelFamily::Mlp, seeds);
    CHECK(a.error_rates == b.error_rates);
    CHECK(support::same_matrix(a.outcomes, b.outcomes));
    // Learns something: better than chance on both tasks.
    for (double rate : a.error_rates) CHECK(rate < 0.5);
}

TEST_CASE("disjoint blocks never intersect on random shapes") {
    rng::Engine engine(40);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + engine.below(3);
        const std::size_t n = 1 + engine.below(8);
        const std::size_t pool = k * n + engine.below(20);
        const auto sets = sample_disjoint(pool, n, k, engine.next());
        std::set<std::size_t> all;
        std::size_t total = 0;
        for (const auto& s : sets) {
            all.insert(s.begin(), s.end());
            total += s.size();
        }
        CHECK(all.size() == total);
        CHECK(total == k * n);
        for (std::size_t idx : all) CHECK(idx < pool);
    }
}

TEST_CASE("synthetic dataset construction") {
    const TabularDataset a = synthesize_dataset(500, 6, 2, 0.7, 0.15, 5, 11);
    const TabularDataset b = synthesize_dataset(500, 6, 2, 0.7, 0.15, 5, 11);
    CHECK(a.features.data == b.features.data);
    CHECK(a.task_labels == b.task_labels);
    CHECK(a.train_indices == b.train_indices);
    CHECK(a.train_indices.size() == 400);
    CHECK(a.test_indices.size() == 100);

    // Split is disjoint and covering.
    std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
    all.insert(a.test_indices.begin(), a.test_indices.end());
    CHECK(all.size() == 500);

    // Five quantile groups of 100 rows each.
    std::map<std::string, int> counts;
    for (const auto& g : a.groups) counts[g] += 1;
    CHECK(counts.size() == 5);
    for (const auto& [label, count] : counts) CHECK(count == 100);
}

TEST_CASE("full sharing with no noise makes task labels identical") {
    const TabularDataset d = synthesize_dataset(300, 5, 3, 1.0, 0.0, 0, 13);
    CHECK(d.task_labels[0] == d.task_labels[1]);
    CHECK(d.task_labels[1] == d.task_labels[2]);
}

TEST_CASE("pure label noise pins test error near one half") {
    const TabularDataset d = synthesize_dataset(3000, 8, 2, 0.7, 0.5, 0, 17);
    const TrialResult trial =
        run_trial(d, Protocol::Fixed, 800, ModelFamily::Logreg, trial_seeds(1, 800, 0, 0));
    for (double rate : trial.error_rates) {
        CHECK(rate > 0.45);
        CHECK(rate < 0.55);
    }
}

TEST_CASE("trial on german credit has the documented shape") {
    std::istringstream raw(support::german_credit_fixture());
    const TabularDataset gc = load_german_credit(raw);
    REQUIRE(gc.n_tasks() == 2);
    REQUIRE(gc.test_indices.size() == 200);

    const TrialSeeds seeds = trial_seeds(7, 200, 0, 0);
    const TrialResult trial = run_trial(gc, Protocol::Fixed, 200, ModelFamily::Logreg, seeds);
    CHECK(trial.outcomes.n_individuals() == 200);
    CHECK(trial.outcomes.n_deployments() == 2);
    CHECK(trial.error_rates.size() == 2);

    const TrialResult again = run_trial(gc, Protocol::Fixed, 200, ModelFamily::Logreg, seeds);
    CHECK(support::same_matrix(trial.outcomes, again.outcomes));
    CHECK(trial.error_rates == again.error_rates);

    // Saving a trial matrix and reloading reorders columns canonically
    // (task order vs. lexicographic); metrics are unaffected and the
    // canonical form round-trips exactly.
    std::istringstream csv(write_outcome_csv(trial.outcomes));
    const OutcomeMatrix reloaded = load_outcome_csv(csv);
    CHECK(homogenization_individual(reloaded).value ==
          homogenization_individual(trial.outcomes).value);
    CHECK(systemic_failure_rate(reloaded) == systemic_failure_rate(trial.outcomes));
    std::istringstream canon_csv(write_outcome_csv(reloaded));
    CHECK(support::same_matrix(reloaded, load_outcome_csv(canon_csv)));
}

TEST_CASE("study runs 25 trials per size and is reproducible") {
    const TabularDataset d = synthesize_dataset(600, 6, 2, 0.7, 0.15, 5, 23);
    StudyConfig config;
    config.protocol = Protocol::Fixed;
    config.train_sizes = {40, 80};
    config.base_seed = 99;
    const StudyResult result = run_study(d, config);
    CHECK(result.trials.size() == 50);

    const StudyResult rerun = run_study(d, config);
    REQUIRE(rerun.trials.size() == result.trials.size());
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        CHECK(result.trials[t].error_rates == rerun.trials[t].error_rates);
        CHECK(result.trials[t].observed_systemic == rerun.trials[t].observed_systemic);
    }

    // The expected systemic rate is exactly the product of error rates.
    for (const auto& trial : result.trials) {
        double product = 1.0;
        for (double rate : trial.error_rates) product *= rate;
        CHECK(trial.expected_systemic == product);
    }

    // Aggregates exist per size with the group metrics attached.
    REQUIRE(result.aggregates.size() == 2);
    for (const auto& [n, metrics] : result.aggregates) {
        CHECK(metrics.count("oh_individual") == 1);
        CHECK(metrics.count("h_uniform") == 1);
        CHECK(metrics.count("observed_systemic") == 1);
        CHECK(metrics.at("observed_systemic").n_trials == 25);
    }
}

TEST_CASE("a single trial rerun in isolation matches its in-study record") {
    const TabularDataset d = synthesize_dataset(600, 6, 2, 0.7, 0.15, 0, 29);
    StudyConfig config;
    config.protocol = Protocol::Disjoint;
    config.train_sizes = {30};
    config.n_data_samples = 2;
    config.n_seeds_per_sample = 2;
    config.base_seed = 314;
    const StudyResult result = run_study(d, config);
    const TrialRecord& record = result.trials[3];  // sample 1, seed 1
    CHECK(record.seeds.data_seed ==
          trial_seeds(314, 30, record.sample_index, record.seed_index).data_seed);
    const TrialResult lone =
        run_trial(d, Protocol::Disjoint, 30, ModelFamily::Logreg, record.seeds);
    CHECK(support::same_matrix(lone.outcomes, record.outcomes));
    CHECK(lone.error_rates == record.error_rates);
}

TEST_CASE("paired protocols share trial seeds") {
    const TrialSeeds fixed_seeds = trial_seeds(5, 100, 2, 3);
    const TrialSeeds disjoint_seeds = trial_seeds(5, 100, 2, 3);
    CHECK(fixed_seeds.data_seed == disjoint_seeds.data_seed);
    CHECK(fixed_seeds.train_seed == disjoint_seeds.train_seed);
    // ...but distinct trials get distinct seeds.
    CHECK(trial_seeds(5, 100, 2, 4).train_seed != fixed_seeds.train_seed);
    CHECK(trial_seeds(5, 200, 2, 3).data_seed != fixed_seeds.data_seed);
}

TEST_CASE("study results do not depend on the thread count") {
    const TabularDataset d = synthesize_dataset(400, 5, 2, 0.7, 0.15, 5, 43);
    StudyConfig config;
    config.protocol = Protocol::Disjoint;
    config.train_sizes = {20, 40};
    config.n_data_samples = 2;
    config.n_seeds_per_sample = 2;
    config.base_seed = 7;
    config.n_threads = 1;
    const StudyResult serial = run_study(d, config);
    config.n_threads = 4;
    const StudyResult parallel = run_study(d, config);
    REQUIRE(serial.trials.size() == parallel.trials.size());
    for (std::size_t t = 0; t < serial.trials.size(); ++t) {
        CHECK(serial.trials[t].error_rates == parallel.trials[t].error_rates);
        CHECK(serial.trials[t].observed_systemic == parallel.trials[t].observed_systemic);
        CHECK(support::same_matrix(serial.trials[t].outcomes, parallel.trials[t].outcomes));
    }
}

TEST_CASE("single-class tasks fall back to the constant classifier") {
    TabularDataset d = synthesize_dataset(200, 4, 2, 0.7, 0.15, 0, 41);
    d.task_labels[0].assign(d.n_rows(), 1);  // degenerate everywhere
    const TrialResult trial =
        run_trial(d, Protocol::Fixed, 20, ModelFamily::Logreg, trial_seeds(1, 20, 0, 0));
    REQUIRE(trial.fallback_tasks == std::vector<std::string>{"task0"});
    // The constant classifier predicts the majority class, so task0 has no
    // errors on the (all-ones) test labels.
    CHECK(trial.error_rates[0] == 0.0);
}

TEST_CASE("disjoint study rejects oversized draws") {
    const TabularDataset d = synthesize_dataset(100, 4, 2, 0.7, 0.15, 0, 31);
    StudyConfig config;
    config.protocol = Protocol::Disjoint;
    config.train_sizes = {50};  // 2 * 50 > 80-row training pool
    CHECK_THROWS_AS(run_study(d, config), InvalidArgument);
}

TEST_SUITE_END();
