#pragma once
// Correlation statistics between metric series and trial aggregation.
// Significance comes from a seeded two-sided permutation test, not a
// parametric approximation.

#include <cstdint>
#include <string>
#include <vector>

#include "homog/outcomes.hpp"

namespace homog {

struct PearsonResult {
    double r = 0.0;
    double r2 = 0.0;
};

// Sample Pearson correlation. Throws UndefinedMetric when either series is
// constant, InvalidArgument on length mismatch or fewer than two points.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pearson correlation of average ranks (ties share the mean rank).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

enum class CorrelationStatistic { Pearson, Spearman };

// Two-sided permutation p-value with plus-one smoothing:
// (1 + #{|stat_perm| >= |stat_obs|}) / (1 + iterations). Each permutation's
// stream is derived from (seed, iteration index), so the result is
// reproducible and independent of thread scheduling.
double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          CorrelationStatistic statistic, std::size_t iterations,
                          std::uint64_t seed, unsigned n_threads = 1);

struct TrialAggregate {
    double mean = 0.0;
    double std_error = 0.0;  // of the mean; 0 by convention when n = 1
    std::size_t n_trials = 0;
    std::size_t n_excluded = 0;  // degenerate values dropped before averaging
    std::vector<double> values;  // the defined per-trial values
};

// Mean and standard error over the values. Throws InvalidArgument on an
// empty input.
TrialAggregate aggregate_trials(const std::vector<double>& values);

// Same, but degenerate metric values are excluded and counted. Throws when
// every value is degenerate.
TrialAggregate aggregate_trials(const std::vector<MetricValue>& values);

struct PairCorrelation {
    std::string first;
    std::string second;
    bool defined = false;
    std::string undefined_reason;
    double pearson_r = 0.0;
    double pearson_r2 = 0.0;
    double spearman_rho = 0.0;
    double p_pearson = 1.0;
    double p_spearman = 1.0;
    bool pearson_significant_05 = false;
    bool pearson_significant_001 = false;
    bool spearman_significant_05 = false;
    bool spearman_significant_001 = false;
};

struct CorrelationReport {
    std::size_t n_observations = 0;
    std::size_t permutations = 0;
    std::uint64_t seed = 0;
    std::vector<PairCorrelation> pairs;
};

// All-pairs correlation table over named series; pairs where a statistic
// is undefined are marked rather than dropped.
CorrelationReport correlate_all(const std::vector<std::string>& names,
                                const std::vector<std::vector<double>>& series,
                                std::size_t permutations, std::uint64_t seed,
                                unsigned n_threads = 1);

}  // namespace homog
