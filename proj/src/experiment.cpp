#include "homog/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

constexpr std::uint64_t kDataStream = 0xDA7A5EEDULL;
constexpr std::uint64_t kTrainStream = 0x7EA15EEDULL;

std::string padded_row_id(std::size_t row) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "i%06zu", row);
    return buf;
}

void validate_dataset(const TabularDataset& dataset) {
    if (dataset.n_tasks() == 0 || dataset.task_labels.size() != dataset.n_tasks()) {
        throw InvalidArgument("dataset needs at least one task with labels");
    }
    for (const auto& labels : dataset.task_labels) {
        if (labels.size() != dataset.n_rows()) {
            throw InvalidArgument("task label count does not match rows");
        }
    }
    if (dataset.train_indices.empty() || dataset.test_indices.empty()) {
        throw InvalidArgument("dataset needs non-empty train and test splits");
    }
}

}  // namespace

TrialSeeds trial_seeds(std::uint64_t base_seed, std::size_t train_size, std::size_t sample_index,
                       std::size_t seed_index) {
    TrialSeeds seeds;
    seeds.data_seed = rng::mix({base_seed, kDataStream, train_size, sample_index});
    seeds.train_seed = rng::mix({base_seed, kTrainStream, train_size, sample_index, seed_index});
    return seeds;
}

std::vector<std::vector<std::size_t>> sample_fixed(std::size_t pool_size, std::size_t n,
                                                   std::size_t k, std::uint64_t seed) {
    if (n > pool_size) {
        throw InvalidArgument("sample size " + std::to_string(n) + " exceeds pool " +
                              std::to_string(pool_size));
    }
    rng::Engine engine(seed);
    std::vector<std::size_t> sample = engine.sample_without_replacement(pool_size, n);
    return std::vector<std::vector<std::size_t>>(k, sample);
}

std::vector<std::vector<std::size_t>> sample_disjoint(std::size_t pool_size, std::size_t n,
                                                      std::size_t k, std::uint64_t seed) {
    if (k * n > pool_size) {
        throw InvalidArgument("disjoint protocol needs k*n = " + std::to_string(k * n) +
                              " <= pool size " + std::to_string(pool_size));
    }
    rng::Engine engine(seed);
    std::vector<std::size_t> drawn = engine.sample_without_replacement(pool_size, k * n);
    std::vector<std::vector<std::size_t>> sets(k);
    for (std::size_t t = 0; t < k; ++t) {
        sets[t].assign(drawn.begin() + static_cast<std::ptrdiff_t>(t * n),
                       drawn.begin() + static_cast<std::ptrdiff_t>((t + 1) * n));
    }
    return sets;
}

TrialResult run_trial(const TabularDataset& dataset, Protocol protocol, std::size_t n,
                      ModelFamily family, const TrialSeeds& seeds) {
    validate_dataset(dataset);
    const std::size_t k = dataset.n_tasks();
    const std::size_t pool = dataset.train_indices.size();
    const auto index_sets = protocol == Protocol::Fixed
                                ? sample_fixed(pool, n, k, seeds.data_seed)
                                : sample_disjoint(pool, n, k, seeds.data_seed);

    const std::size_t d = dataset.features.cols;
    const std::size_t n_test = dataset.test_indices.size();

    // Test rows in ascending original-row order so the matrix ids come out
    // in canonical (lexicographic) order.
    std::vector<std::size_t> test_rows = dataset.test_indices;
    std::sort(test_rows.begin(), test_rows.end());

    FeatureMatrix test_features;
    test_features.rows = n_test;
    test_features.cols = d;
    test_features.data.resize(n_test * d);
    for (std::size_t r = 0; r < n_test; ++r) {
        const std::size_t row = test_rows[r];
        for (std::size_t c = 0; c < d; ++c) test_features.at(r, c) = dataset.features.at(row, c);
    }

    TrialResult result;
    result.outcomes.deployment_ids = dataset.task_names;
    for (std::size_t r = 0; r < n_test; ++r) {
        result.outcomes.individual_ids.push_back(padded_row_id(test_rows[r]));
    }
    result.outcomes.failures.assign(n_test * k, 0);
    if (dataset.has_groups()) {
        result.outcomes.groups.resize(n_test * k);
        for (std::size_t r = 0; r < n_test; ++r) {
            for (std::size_t t = 0; t < k; ++t) {
                result.outcomes.groups[r * k + t] = dataset.groups[test_rows[r]];
            }
        }
    }

    for (std::size_t t = 0; t < k; ++t) {
        const auto& pool_rows = index_sets[t];
        FeatureMatrix train_features;
        train_features.rows = pool_rows.size();
        train_features.cols = d;
        train_features.data.resize(pool_rows.size() * d);
        std::vector<int> train_labels(pool_rows.size());
        for (std::size_t r = 0; r < pool_rows.size(); ++r) {
            const std::size_t row = dataset.train_indices[pool_rows[r]];
            for (std::size_t c = 0; c < d; ++c) train_features.at(r, c) = dataset.features.at(row, c);
            train_labels[r] = dataset.task_labels[t][row];
        }

        TrainConfig config = family == ModelFamily::Logreg ? TrainConfig::logreg_defaults()
                                                           : TrainConfig::mlp_defaults();
        config.seed = rng::mix({seeds.train_seed, t});

        AnyModel model;
        try {
            if (family == ModelFamily::Logreg) {
                model = train_logreg(train_features, train_labels, config);
            } else {
                model = train_mlp(train_features, train_labels, config);
            }
        } catch (const DegenerateTrainingSet&) {
            model = constant_model(train_labels, d);
            result.fallback_tasks.push_back(dataset.task_names[t]);
        }

        const std::vector<int> predictions = predict(model, test_features);
        std::size_t errors = 0;
        for (std::size_t r = 0; r < n_test; ++r) {
            const int truth = dataset.task_labels[t][test_rows[r]];
            const int failed = predictions[r] != truth ? 1 : 0;
            result.outcomes.failures[r * k + t] = static_cast<std::uint8_t>(failed);
            errors += static_cast<std::size_t>(failed);
        }
        result.error_rates.push_back(static_cast<double>(errors) / static_cast<double>(n_test));
    }

    return result;
}

StudyResult run_study(const TabularDataset& dataset, const StudyConfig& config) {
    validate_dataset(dataset);
    if (config.train_sizes.empty() || config.n_data_samples == 0 || config.n_seeds_per_sample == 0) {
        throw InvalidArgument("study needs train sizes and positive trial counts");
    }
    const std::size_t k = dataset.n_tasks();
    const std::size_t pool = dataset.train_indices.size();
    for (std::size_t n : config.train_sizes) {
        if (config.protocol == Protocol::Disjoint && k * n > pool) {
            throw InvalidArgument("disjoint protocol needs k*n = " + std::to_string(k * n) +
                                  " <= training pool " + std::to_string(pool) + " (n = " +
                                  std::to_string(n) + ")");
        }
        if (n > pool) {
            throw InvalidArgument("train size " + std::to_string(n) + " exceeds training pool " +
                                  std::to_string(pool));
        }
    }

    StudyResult study;
    study.config = config;
    study.task_names = dataset.task_names;

    const std::size_t trials_per_size = config.n_data_samples * config.n_seeds_per_sample;
    const std::size_t total = config.train_sizes.size() * trials_per_size;
    study.trials.resize(total);

    parallel_for(total, config.n_threads, [&](std::size_t index) {
        const std::size_t size_index = index / trials_per_size;
        const std::size_t within = index % trials_per_size;
        const std::size_t sample_index = within / config.n_seeds_per_sample;
        const std::size_t seed_index = within % config.n_seeds_per_sample;
        const std::size_t n = config.train_sizes[size_index];

        TrialRecord record;
        record.train_size = n;
        record.sample_index = sample_index;
        record.seed_index = seed_index;
        record.seeds = trial_seeds(config.base_seed, n, sample_index, seed_index);

        TrialResult trial =
            run_trial(dataset, config.protocol, n, config.model_family, record.seeds);
        record.error_rates = trial.error_rates;
        record.fallback_tasks = trial.fallback_tasks;

        record.expected_systemic = 1.0;
        for (double rate : trial.error_rates) record.expected_systemic *= rate;
        record.observed_systemic = systemic_failure_rate(trial.outcomes);
        record.oh_individual = homogenization_individual(trial.outcomes);

        if (trial.outcomes.has_groups()) {
            try {
                record.h_average = homogenization_group(trial.outcomes, GroupWeighting::Average);
                record.h_uniform = homogenization_group(trial.outcomes, GroupWeighting::Uniform);
                record.h_worst = homogenization_group(trial.outcomes, GroupWeighting::Worst);
                record.unfairness_value = unfairness(trial.outcomes);
            } catch (const UndefinedMetric&) {
                // left unset; flagged once during aggregation
            }
        }

        record.outcomes = std::move(trial.outcomes);
        study.trials[index] = std::move(record);
    });

    // Aggregation in (size, sample, seed) order, independent of scheduling.
    std::size_t fallback_count = 0;
    std::size_t group_metric_gaps = 0;
    for (std::size_t size_index = 0; size_index < config.train_sizes.size(); ++size_index) {
        const std::size_t n = config.train_sizes[size_index];
        std::vector<MetricValue> oh;
        std::vector<double> observed, expected, mean_error;
        std::vector<std::vector<double>> per_task_error(k);
        std::vector<MetricValue> h_avg, h_unif, h_worst;
        std::vector<double> unfairness_values;

        for (std::size_t within = 0; within < trials_per_size; ++within) {
            const TrialRecord& record = study.trials[size_index * trials_per_size + within];
            oh.push_back(record.oh_individual);
            observed.push_back(record.observed_systemic);
            expected.push_back(record.expected_systemic);
            double mean_rate = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                per_task_error[t].push_back(record.error_rates[t]);
                mean_rate += record.error_rates[t];
            }
            mean_error.push_back(mean_rate / static_cast<double>(k));
            fallback_count += record.fallback_tasks.size();
            if (dataset.has_groups()) {
                if (record.h_average) {
                    h_avg.push_back(record.h_average->metric);
                    h_unif.push_back(record.h_uniform->metric);
                    h_worst.push_back(record.h_worst->metric);
                    unfairness_values.push_back(*record.unfairness_value);
                } else {
                    ++group_metric_gaps;
                }
            }
        }

        std::map<std::string, TrialAggregate> metrics;
        try {
            metrics["oh_individual"] = aggregate_trials(oh);
        } catch (const InvalidArgument&) {
            study.warnings.push_back("oh_individual degenerate in every trial at n = " +
                                     std::to_string(n));
        }
        metrics["observed_systemic"] = aggregate_trials(observed);
        metrics["expected_systemic"] = aggregate_trials(expected);
        metrics["mean_error_rate"] = aggregate_trials(mean_error);
        for (std::size_t t = 0; t < k; ++t) {
            metrics["error_rate:" + dataset.task_names[t]] = aggregate_trials(per_task_error[t]);
        }
        if (!h_avg.empty()) {
            metrics["h_average"] = aggregate_trials(h_avg);
            metrics["h_uniform"] = aggregate_trials(h_unif);
            metrics["h_worst"] = aggregate_trials(h_worst);
            metrics["unfairness"] = aggregate_trials(unfairness_values);
        }
        study.aggregates.emplace_back(n, std::move(metrics));
    }

    if (fallback_count > 0) {
        study.warnings.push_back(std::to_string(fallback_count) +
                                 " task trainings fell back to the constant classifier");
    }
    if (group_metric_gaps > 0) {
        study.warnings.push_back(std::to_string(group_metric_gaps) +
                                 " trials had undefined group metrics");
    }
    return study;
}

TabularDataset synthesize_dataset(std::size_t n_rows, std::size_t d, std::size_t k,
                                  double shared_signal, double label_noise,
                                  std::size_t group_count, std::uint64_t seed) {
    if (n_rows < 5 || d == 0 || k == 0) throw InvalidArgument("invalid synthetic dataset shape");
    if (shared_signal < 0.0 || shared_signal > 1.0 || label_noise < 0.0 || label_noise > 1.0) {
        throw InvalidArgument("shared_signal and label_noise must lie in [0,1]");
    }

    rng::Engine engine(seed);
    TabularDataset dataset;
    dataset.features.rows = n_rows;
    dataset.features.cols = d;
    dataset.features.data.resize(n_rows * d);
    for (double& v : dataset.features.data) v = engine.normal();
    for (std::size_t c = 0; c < d; ++c) dataset.feature_names.push_back("x" + std::to_string(c));

    std::vector<double> shared(d);
    for (double& v : shared) v = engine.normal();

    for (std::size_t t = 0; t < k; ++t) {
        std::vector<double> own(d);
        for (double& v : own) v = engine.normal();
        // Offsets shrink with the task-specific weight so full sharing means
        // fully identical decision boundaries.
        const double offset = 0.25 * (1.0 - shared_signal) * engine.normal();
        std::vector<int> labels(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            double score = offset;
            for (std::size_t c = 0; c < d; ++c) {
                score += (shared_signal * shared[c] + (1.0 - shared_signal) * own[c]) *
                         dataset.features.at(r, c);
            }
            int label = score > 0.0 ? 1 : 0;
            if (engine.bernoulli(label_noise)) label = 1 - label;
            labels[r] = label;
        }
        dataset.task_names.push_back("task" + std::to_string(t));
        dataset.task_labels.push_back(std::move(labels));
    }

    if (group_count > 0) {
        // Quantile bins of feature 0.
        std::vector<std::size_t> order(n_rows);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dataset.features.at(a, 0) < dataset.features.at(b, 0);
        });
        dataset.groups.resize(n_rows);
        for (std::size_t rank = 0; rank < n_rows; ++rank) {
            const std::size_t bin = rank * group_count / n_rows;
            dataset.groups[order[rank]] = "q" + std::to_string(bin);
        }
    }

    std::vector<std::size_t> rows(n_rows);
    std::iota(rows.begin(), rows.end(), 0);
    engine.shuffle(rows);
    const std::size_t n_train = (n_rows * 4 + 4) / 5;  // 80%, rounded up
    dataset.train_indices.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    dataset.test_indices.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    return dataset;
}

}  // namespace homog
