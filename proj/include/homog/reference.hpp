#pragma once
// Brute-force reference oracles. Each quantity is recomputed here with
// naive nested loops and no helpers shared with the metrics or stats
// modules; any disagreement beyond tolerance is a defect in the fast path.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homog/outcomes.hpp"
#include "homog/rng.hpp"

namespace homog::reference {

struct OracleReport {
    std::vector<double> failure_rates;
    std::optional<double> observed_systemic;  // all-ones mask only
    MetricValue oh_individual;
    std::optional<MetricValue> h_average;
    std::optional<MetricValue> h_uniform;
    std::optional<MetricValue> h_worst;
    std::optional<std::string> worst_group;
    std::vector<std::string> excluded_groups;
    std::optional<double> unfairness_value;
    std::optional<double> covariance;  // k = 2
    std::optional<double> pmi;         // k = 2, OH > 0
    std::optional<double> pearson;     // k = 2, non-constant columns
    std::optional<MetricValue> loss_oh;
    std::optional<MetricValue> minexp_value;
    std::optional<MetricValue> expexp_value;
};

// Every metric the matrix supports, straight from the defining formulas.
OracleReport oracle_metrics(const OutcomeMatrix& matrix);

// Naive O(n^2)-rank Pearson and Spearman.
std::pair<double, double> oracle_rank_stats(const std::vector<double>& x,
                                            const std::vector<double>& y);

// Runs the fast path and the oracle side by side; returns one line per
// disagreement beyond tol (empty means agreement).
std::vector<std::string> verify_against_oracle(const OutcomeMatrix& matrix, double tol = 1e-12);

struct FuzzOptions {
    std::size_t max_individuals = 50;
    std::size_t max_deployments = 4;
    bool allow_mask = true;
    bool allow_groups = true;
    bool allow_losses = true;
};

// Random well-formed matrix for fuzzing: random shape and failures, and
// (when allowed) a mask keeping at least one interaction per individual,
// group labels, and non-negative losses.
OutcomeMatrix random_outcome_matrix(rng::Engine& engine, const FuzzOptions& options);

}  // namespace homog::reference
