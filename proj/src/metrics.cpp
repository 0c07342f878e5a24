#include "homog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "homog/errors.hpp"

namespace homog {

namespace {

void require_all_interactions(const OutcomeMatrix& m, const char* what) {
    if (!m.all_interactions()) {
        throw InvalidArgument(std::string(what) + " requires an all-ones interaction mask");
    }
}

void require_groups(const OutcomeMatrix& m, const char* what) {
    if (!m.has_groups()) {
        throw InvalidArgument(std::string(what) + " requires group labels");
    }
}

double product_of_failure_rates(const OutcomeMatrix& m) {
    double product = 1.0;
    for (std::size_t i = 0; i < m.n_deployments(); ++i) product *= failure_rate(m, i);
    return product;
}

// Per-group bookkeeping over an all-ones-mask matrix: counts and failure
// sums per deployment, from which frequencies and fail_g follow.
struct GroupTally {
    std::vector<std::size_t> count;     // per deployment
    std::vector<std::size_t> failures;  // per deployment
};

std::map<std::string, GroupTally> tally_groups(const OutcomeMatrix& m) {
    const std::size_t k = m.n_deployments();
    std::map<std::string, GroupTally> tallies;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t c = m.cell(j, i);
            const std::string& g = m.groups[c];
            if (g.empty()) continue;
            auto& tally = tallies[g];
            if (tally.count.empty()) {
                tally.count.assign(k, 0);
                tally.failures.assign(k, 0);
            }
            tally.count[i] += 1;
            tally.failures[i] += m.failures[c];
        }
    }
    return tallies;
}

struct GroupSummary {
    // Groups present in every deployment, in lexicographic label order.
    std::vector<std::string> included;
    std::vector<double> fail_product;  // prod_i fail_g(h^i), aligned with included
    std::vector<double> joint_freq;    // p(g) = prod_i p^i(g), aligned with included
    std::vector<std::string> excluded;
};

GroupSummary summarize_groups(const OutcomeMatrix& m) {
    const std::size_t n = m.n_individuals();
    const std::size_t k = m.n_deployments();
    GroupSummary summary;
    for (const auto& [label, tally] : tally_groups(m)) {
        const bool everywhere =
            std::all_of(tally.count.begin(), tally.count.end(), [](std::size_t c) { return c > 0; });
        if (!everywhere) {
            summary.excluded.push_back(label);
            continue;
        }
        double fail_product = 1.0;
        double joint_freq = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            fail_product *= static_cast<double>(tally.failures[i]) / static_cast<double>(tally.count[i]);
            joint_freq *= static_cast<double>(tally.count[i]) / static_cast<double>(n);
        }
        summary.included.push_back(label);
        summary.fail_product.push_back(fail_product);
        summary.joint_freq.push_back(joint_freq);
    }
    return summary;
}

void require_two_deployments(const OutcomeMatrix& m, const char* what) {
    if (m.n_deployments() != 2) {
        throw InvalidArgument(std::string(what) + " is defined for k = 2 only");
    }
}

std::vector<double> mean_losses(const OutcomeMatrix& m, const char* what) {
    if (!m.has_losses()) {
        throw InvalidArgument(std::string(what) + " requires losses");
    }
    require_all_interactions(m, what);
    const std::size_t n = m.n_individuals();
    const std::size_t k = m.n_deployments();
    std::vector<double> means(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) means[i] += m.losses[m.cell(j, i)];
    }
    for (double& v : means) v /= static_cast<double>(n);
    return means;
}

double mean_min_loss(const OutcomeMatrix& m) {
    const std::size_t n = m.n_individuals();
    const std::size_t k = m.n_deployments();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double best = m.losses[m.cell(j, 0)];
        for (std::size_t i = 1; i < k; ++i) best = std::min(best, m.losses[m.cell(j, i)]);
        sum += best;
    }
    return sum / static_cast<double>(n);
}

}  // namespace

double failure_rate(const OutcomeMatrix& matrix, std::size_t deployment) {
    if (deployment >= matrix.n_deployments()) {
        throw InvalidArgument("deployment index " + std::to_string(deployment) +
                              " out of range (k = " + std::to_string(matrix.n_deployments()) + ")");
    }
    std::size_t interactions = 0;
    std::size_t failures = 0;
    for (std::size_t j = 0; j < matrix.n_individuals(); ++j) {
        if (!matrix.interacted(j, deployment)) continue;
        ++interactions;
        failures += matrix.failures[matrix.cell(j, deployment)];
    }
    if (interactions == 0) {
        throw InvalidArgument("no unmasked individuals for deployment " +
                              matrix.deployment_ids[deployment]);
    }
    return static_cast<double>(failures) / static_cast<double>(interactions);
}

double systemic_failure_rate(const OutcomeMatrix& matrix) {
    require_all_interactions(matrix, "systemic_failure_rate");
    const std::size_t n = matrix.n_individuals();
    const std::size_t k = matrix.n_deployments();
    if (n == 0) throw InvalidArgument("empty matrix");
    std::size_t systemic = 0;
    for (std::size_t j = 0; j < n; ++j) {
        bool all_failed = true;
        for (std::size_t i = 0; i < k; ++i) all_failed = all_failed && matrix.failures[matrix.cell(j, i)];
        systemic += all_failed ? 1 : 0;
    }
    return static_cast<double>(systemic) / static_cast<double>(n);
}

MetricValue homogenization_individual(const OutcomeMatrix& matrix) {
    const std::size_t n = matrix.n_individuals();
    const std::size_t k = matrix.n_deployments();
    if (n == 0) throw InvalidArgument("empty matrix");

    if (matrix.all_interactions()) {
        // Unmasked case: the masked denominator reduces exactly to the
        // product of per-deployment failure rates, so compute it that way.
        const double denominator = product_of_failure_rates(matrix);
        if (denominator == 0.0) return MetricValue::degenerate();
        return MetricValue::defined(systemic_failure_rate(matrix) / denominator);
    }

    // Per-deployment rates over unmasked rows. A deployment nobody
    // interacted with never enters any individual's product, so its
    // (undefined) rate is never read.
    std::vector<double> rates(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t interactions = 0;
        std::size_t failed = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!matrix.interacted(j, i)) continue;
            ++interactions;
            failed += matrix.failures[matrix.cell(j, i)];
        }
        if (interactions > 0) rates[i] = static_cast<double>(failed) / static_cast<double>(interactions);
    }

    double numerator = 0.0;    // E_j[ prod_{i in c_j} F^i ]
    double denominator = 0.0;  // E_j[ prod_{i in c_j} fail(h^i) ]
    for (std::size_t j = 0; j < n; ++j) {
        double observed = 1.0;
        double expected = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (!matrix.interacted(j, i)) continue;
            observed *= matrix.failures[matrix.cell(j, i)];
            expected *= rates[i];
        }
        numerator += observed;
        denominator += expected;
    }
    numerator /= static_cast<double>(n);
    denominator /= static_cast<double>(n);
    if (denominator == 0.0) return MetricValue::degenerate();
    return MetricValue::defined(numerator / denominator);
}

double group_failure_rate(const OutcomeMatrix& matrix, const std::string& group,
                          std::size_t deployment) {
    if (deployment >= matrix.n_deployments()) {
        throw InvalidArgument("deployment index out of range");
    }
    require_groups(matrix, "group_failure_rate");
    std::size_t members = 0;
    std::size_t failures = 0;
    for (std::size_t j = 0; j < matrix.n_individuals(); ++j) {
        if (!matrix.interacted(j, deployment)) continue;
        const std::size_t c = matrix.cell(j, deployment);
        if (matrix.groups[c] != group) continue;
        ++members;
        failures += matrix.failures[c];
    }
    if (members == 0) {
        throw UndefinedMetric("empty group in deployment: group '" + group +
                              "' has no unmasked rows in deployment " +
                              matrix.deployment_ids[deployment]);
    }
    return static_cast<double>(failures) / static_cast<double>(members);
}

GroupMetricResult homogenization_group(const OutcomeMatrix& matrix, GroupWeighting weighting) {
    require_groups(matrix, "homogenization_group");
    require_all_interactions(matrix, "homogenization_group");

    const GroupSummary summary = summarize_groups(matrix);
    GroupMetricResult result;
    result.excluded_groups = summary.excluded;
    if (summary.included.empty()) {
        throw UndefinedMetric("no group is present in every deployment");
    }

    double numerator = 0.0;
    switch (weighting) {
        case GroupWeighting::Average: {
            double total_freq = 0.0;
            for (double f : summary.joint_freq) total_freq += f;
            if (total_freq == 0.0) {
                throw UndefinedMetric("all joint group frequencies are zero");
            }
            for (std::size_t g = 0; g < summary.included.size(); ++g) {
                numerator += summary.joint_freq[g] / total_freq * summary.fail_product[g];
            }
            break;
        }
        case GroupWeighting::Uniform: {
            for (double p : summary.fail_product) numerator += p;
            numerator /= static_cast<double>(summary.included.size());
            break;
        }
        case GroupWeighting::Worst: {
            // included is label-sorted, so strict improvement keeps the
            // lexicographically smallest label on ties.
            std::size_t best = 0;
            for (std::size_t g = 1; g < summary.included.size(); ++g) {
                if (summary.fail_product[g] > summary.fail_product[best]) best = g;
            }
            numerator = summary.fail_product[best];
            result.worst_group = summary.included[best];
            break;
        }
    }

    const double denominator = product_of_failure_rates(matrix);
    if (denominator == 0.0) {
        result.metric = MetricValue::degenerate();
    } else {
        result.metric = MetricValue::defined(numerator / denominator);
    }
    return result;
}

double unfairness(const OutcomeMatrix& matrix) {
    require_groups(matrix, "unfairness");
    require_all_interactions(matrix, "unfairness");
    const GroupSummary summary = summarize_groups(matrix);
    if (summary.included.empty()) {
        throw UndefinedMetric("no group is present in every deployment");
    }
    const double count = static_cast<double>(summary.fail_product.size());
    double mean = 0.0;
    for (double p : summary.fail_product) mean += p;
    mean /= count;
    double variance = 0.0;
    for (double p : summary.fail_product) variance += (p - mean) * (p - mean);
    return variance / count;
}

double covariance_failures(const OutcomeMatrix& matrix) {
    require_two_deployments(matrix, "covariance_failures");
    require_all_interactions(matrix, "covariance_failures");
    return systemic_failure_rate(matrix) - failure_rate(matrix, 0) * failure_rate(matrix, 1);
}

double pmi_failures(const OutcomeMatrix& matrix) {
    require_two_deployments(matrix, "pmi_failures");
    require_all_interactions(matrix, "pmi_failures");
    const MetricValue oh = homogenization_individual(matrix);
    if (!oh.is_defined() || oh.value <= 0.0) {
        throw UndefinedMetric("PMI undefined: homogenization is zero or degenerate");
    }
    return std::log(oh.value);
}

double pearson_failures(const OutcomeMatrix& matrix) {
    require_two_deployments(matrix, "pearson_failures");
    require_all_interactions(matrix, "pearson_failures");
    const double f1 = failure_rate(matrix, 0);
    const double f2 = failure_rate(matrix, 1);
    const double var1 = f1 * (1.0 - f1);
    const double var2 = f2 * (1.0 - f2);
    if (var1 == 0.0 || var2 == 0.0) {
        throw UndefinedMetric("correlation undefined: constant failure column");
    }
    return covariance_failures(matrix) / std::sqrt(var1 * var2);
}

MetricValue loss_homogenization(const OutcomeMatrix& matrix) {
    const std::vector<double> means = mean_losses(matrix, "loss_homogenization");
    double denominator = 1.0;
    for (double v : means) denominator *= v;
    if (denominator == 0.0) return MetricValue::degenerate();

    const std::size_t n = matrix.n_individuals();
    const std::size_t k = matrix.n_deployments();
    double numerator = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double product = 1.0;
        for (std::size_t i = 0; i < k; ++i) product *= matrix.losses[matrix.cell(j, i)];
        numerator += product;
    }
    numerator /= static_cast<double>(n);
    return MetricValue::defined(numerator / denominator);
}

MetricValue minexp(const OutcomeMatrix& matrix) {
    const std::vector<double> means = mean_losses(matrix, "minexp");
    const double best = *std::min_element(means.begin(), means.end());
    if (best == 0.0) return MetricValue::degenerate();
    return MetricValue::defined(mean_min_loss(matrix) / best);
}

MetricValue expexp(const OutcomeMatrix& matrix) {
    const std::vector<double> means = mean_losses(matrix, "expexp");
    double mean_of_means = 0.0;
    for (double v : means) mean_of_means += v;
    mean_of_means /= static_cast<double>(means.size());
    if (mean_of_means == 0.0) return MetricValue::degenerate();
    return MetricValue::defined(mean_min_loss(matrix) / mean_of_means);
}

MetricsReport compute_metrics_report(const OutcomeMatrix& matrix, const MetricsRequest& request) {
    MetricsReport report;
    report.deployment_ids = matrix.deployment_ids;
    const std::size_t k = matrix.n_deployments();
    for (std::size_t i = 0; i < k; ++i) report.failure_rates.push_back(failure_rate(matrix, i));

    const bool unmasked = matrix.all_interactions();
    if (unmasked) {
        report.observed_systemic = systemic_failure_rate(matrix);
        double product = 1.0;
        for (double r : report.failure_rates) product *= r;
        report.expected_systemic = product;
    } else {
        report.warnings.push_back("matrix has masked interactions; systemic rates and group/loss metrics are omitted");
    }

    report.oh_individual = homogenization_individual(matrix);

    const bool want_groups = request.group_average || request.group_uniform || request.group_worst;
    if (want_groups) {
        if (!matrix.has_groups()) {
            report.warnings.push_back("group metrics requested but matrix has no group labels");
        } else if (unmasked) {
            try {
                if (request.group_average)
                    report.h_average = homogenization_group(matrix, GroupWeighting::Average);
                if (request.group_uniform)
                    report.h_uniform = homogenization_group(matrix, GroupWeighting::Uniform);
                if (request.group_worst)
                    report.h_worst = homogenization_group(matrix, GroupWeighting::Worst);
                report.unfairness_value = unfairness(matrix);
            } catch (const UndefinedMetric& e) {
                report.warnings.push_back(std::string("group metrics undefined: ") + e.what());
            }
        }
    }

    if (k == 2 && unmasked) {
        report.covariance = covariance_failures(matrix);
        try {
            report.pmi = pmi_failures(matrix);
        } catch (const UndefinedMetric& e) {
            report.warnings.push_back(e.what());
        }
        try {
            report.pearson = pearson_failures(matrix);
        } catch (const UndefinedMetric& e) {
            report.warnings.push_back(e.what());
        }
    }

    if (request.loss_metrics) {
        if (!matrix.has_losses()) {
            report.warnings.push_back("loss metrics requested but matrix has no losses");
        } else if (unmasked) {
            report.loss_oh = loss_homogenization(matrix);
            report.minexp_value = minexp(matrix);
            report.expexp_value = expexp(matrix);
        }
    }

    return report;
}

}  // namespace homog
