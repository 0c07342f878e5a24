#pragma once
// Outcome-homogenization metrics.
//
// The core quantity is the observed rate of systemic failure (the fraction
// of individuals failed by every deployment they interact with) normalized
// by the rate expected if deployments failed people independently. A value
// of 1 means failures look independent; above 1, deployments concentrate
// their failures on the same individuals; 0 means no systemic failures.
//
// Group-level variants replace the average over individuals with a weighted
// average over group systemic-failure rates, with average (frequency),
// uniform, and worst-group weightings. The k = 2 relatives (covariance,
// PMI, Pearson) and the loss-based relatives (loss ratio, MinExp, ExpExp)
// expose the same structure through more familiar statistics.

#include <optional>
#include <string>
#include <vector>

#include "homog/outcomes.hpp"

namespace homog {

enum class GroupWeighting { Average, Uniform, Worst };

// Group metric plus the bookkeeping its edge cases require: groups with no
// unmasked rows in some deployment are excluded from the computation and
// reported here; for Worst weighting, worst_group names the attaining group
// (lexicographically smallest label on ties).
struct GroupMetricResult {
    MetricValue metric;
    std::vector<std::string> excluded_groups;
    std::optional<std::string> worst_group;
};

// Mean failure indicator over the deployment's unmasked individuals.
// Throws InvalidArgument when the deployment index is out of range or no
// individual interacted with the deployment.
double failure_rate(const OutcomeMatrix& matrix, std::size_t deployment);

// Fraction of individuals failed by every deployment. Requires an all-ones
// mask; use homogenization_individual for masked matrices.
double systemic_failure_rate(const OutcomeMatrix& matrix);

// Individual-level homogenization: observed systemic-failure rate over the
// expected rate. With a mask, the expectation runs over each individual's
// own interaction set in both numerator and denominator; with an all-ones
// mask the denominator reduces exactly to the product of per-deployment
// failure rates. Degenerate (0/0) when the denominator is zero — the
// numerator is then provably zero as well.
MetricValue homogenization_individual(const OutcomeMatrix& matrix);

// Mean failure indicator over the deployment's unmasked rows carrying the
// given label. Throws UndefinedMetric when the group is empty there.
double group_failure_rate(const OutcomeMatrix& matrix, const std::string& group,
                          std::size_t deployment);

// Group-level homogenization under the chosen weighting. Requires group
// labels and an all-ones mask. Average weights groups by their joint
// frequency across deployments, uniform by 1/|G|, and worst concentrates
// all weight on the group with the highest systemic-failure product.
GroupMetricResult homogenization_group(const OutcomeMatrix& matrix, GroupWeighting weighting);

// Population variance, across groups, of the per-group systemic-failure
// product. Zero iff all group products are equal. Requires groups and an
// all-ones mask.
double unfairness(const OutcomeMatrix& matrix);

// k = 2 only: E[F1 F2] - E[F1] E[F2] over an all-ones mask.
double covariance_failures(const OutcomeMatrix& matrix);

// k = 2 only: natural log of the individual homogenization value.
// Throws UndefinedMetric when that value is zero or degenerate.
double pmi_failures(const OutcomeMatrix& matrix);

// k = 2 only: covariance normalized by the Bernoulli standard deviations.
// Throws UndefinedMetric when either failure column is constant.
double pearson_failures(const OutcomeMatrix& matrix);

// Loss-based homogenization E[prod_i loss] / prod_i E[loss]; degenerate
// when any deployment's mean loss is zero. Requires losses, all-ones mask.
MetricValue loss_homogenization(const OutcomeMatrix& matrix);

// E[min_i loss] over the best deployment's mean loss; degenerate when the
// best mean loss is zero.
MetricValue minexp(const OutcomeMatrix& matrix);

// E[min_i loss] over the mean across deployments of mean loss; degenerate
// when every deployment's mean loss is zero.
MetricValue expexp(const OutcomeMatrix& matrix);

// Everything the metrics CLI emits for one matrix, with absent pieces
// explained in warnings rather than silently dropped.
struct MetricsReport {
    std::vector<std::string> deployment_ids;
    std::vector<double> failure_rates;
    std::optional<double> observed_systemic;  // all-ones mask only
    std::optional<double> expected_systemic;  // product of failure rates
    MetricValue oh_individual;
    std::optional<GroupMetricResult> h_average;
    std::optional<GroupMetricResult> h_uniform;
    std::optional<GroupMetricResult> h_worst;
    std::optional<double> unfairness_value;
    std::optional<double> covariance;  // k = 2
    std::optional<double> pmi;         // k = 2, defined OH > 0
    std::optional<double> pearson;     // k = 2, non-constant columns
    std::optional<MetricValue> loss_oh;
    std::optional<MetricValue> minexp_value;
    std::optional<MetricValue> expexp_value;
    std::vector<std::string> warnings;
};

struct MetricsRequest {
    bool group_average = true;
    bool group_uniform = true;
    bool group_worst = true;
    bool loss_metrics = false;
};

// Computes every metric applicable to the matrix under the request,
// recording a warning for each requested metric the data cannot support.
MetricsReport compute_metrics_report(const OutcomeMatrix& matrix, const MetricsRequest& request);

}  // namespace homog
