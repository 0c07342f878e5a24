#include "homog/reference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homog/errors.hpp"
#include "homog/metrics.hpp"

namespace homog::reference {

namespace {

bool cell_on(const OutcomeMatrix& m, std::size_t j, std::size_t i) {
    return m.mask.empty() || m.mask[j * m.n_deployments() + i] != 0;
}

bool mask_all_ones(const OutcomeMatrix& m) {
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        for (std::size_t i = 0; i < m.n_deployments(); ++i) {
            if (!cell_on(m, j, i)) return false;
        }
    }
    return true;
}

double naive_failure_rate(const OutcomeMatrix& m, std::size_t i) {
    double total = 0.0;
    double failed = 0.0;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        if (!cell_on(m, j, i)) continue;
        total += 1.0;
        failed += m.failures[j * m.n_deployments() + i];
    }
    return failed / total;
}

double naive_systemic(const OutcomeMatrix& m) {
    double count = 0.0;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        double product = 1.0;
        for (std::size_t i = 0; i < m.n_deployments(); ++i) {
            product *= m.failures[j * m.n_deployments() + i];
        }
        count += product;
    }
    return count / static_cast<double>(m.n_individuals());
}

// Labels present among unmasked cells of deployment i.
std::set<std::string> labels_in_deployment(const OutcomeMatrix& m, std::size_t i) {
    std::set<std::string> labels;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        if (!cell_on(m, j, i)) continue;
        const std::string& g = m.groups[j * m.n_deployments() + i];
        if (!g.empty()) labels.insert(g);
    }
    return labels;
}

double naive_group_failure_rate(const OutcomeMatrix& m, const std::string& g, std::size_t i) {
    double members = 0.0;
    double failed = 0.0;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        if (!cell_on(m, j, i)) continue;
        if (m.groups[j * m.n_deployments() + i] != g) continue;
        members += 1.0;
        failed += m.failures[j * m.n_deployments() + i];
    }
    return failed / members;
}

double naive_group_frequency(const OutcomeMatrix& m, const std::string& g, std::size_t i) {
    double members = 0.0;
    for (std::size_t j = 0; j < m.n_individuals(); ++j) {
        if (m.groups[j * m.n_deployments() + i] == g) members += 1.0;
    }
    return members / static_cast<double>(m.n_individuals());
}

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

OracleReport oracle_metrics(const OutcomeMatrix& matrix) {
    OracleReport report;
    const std::size_t n = matrix.n_individuals();
    const std::size_t k = matrix.n_deployments();
    const bool unmasked = mask_all_ones(matrix);

    for (std::size_t i = 0; i < k; ++i) report.failure_rates.push_back(naive_failure_rate(matrix, i));

    // Individual homogenization: plain observed/expected ratio when every
    // pair interacted, the ratio of per-individual expectations otherwise.
    if (unmasked) {
        report.observed_systemic = naive_systemic(matrix);
        double expected = 1.0;
        for (std::size_t i = 0; i < k; ++i) expected *= report.failure_rates[i];
        if (expected == 0.0) {
            report.oh_individual = MetricValue::degenerate();
        } else {
            report.oh_individual = MetricValue::defined(*report.observed_systemic / expected);
        }
    } else {
        double numerator = 0.0;
        double denominator = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double observed = 1.0;
            double expected = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
                if (!cell_on(matrix, j, i)) continue;
                observed *= matrix.failures[j * k + i];
                expected *= report.failure_rates[i];
            }
            numerator += observed;
            denominator += expected;
        }
        numerator /= static_cast<double>(n);
        denominator /= static_cast<double>(n);
        if (denominator == 0.0) {
            report.oh_individual = MetricValue::degenerate();
        } else {
            report.oh_individual = MetricValue::defined(numerator / denominator);
        }
    }

    if (matrix.has_groups() && unmasked) {
        // A group counts only if it appears in every deployment.
        std::set<std::string> all_labels;
        for (std::size_t i = 0; i < k; ++i) {
            for (const auto& g : labels_in_deployment(matrix, i)) all_labels.insert(g);
        }
        std::vector<std::string> included;
        for (const auto& g : all_labels) {
            bool everywhere = true;
            for (std::size_t i = 0; i < k; ++i) {
                everywhere = everywhere && labels_in_deployment(matrix, i).count(g) > 0;
            }
            if (everywhere) {
                included.push_back(g);
            } else {
                report.excluded_groups.push_back(g);
            }
        }

        if (!included.empty()) {
            double expected = 1.0;
            for (std::size_t i = 0; i < k; ++i) expected *= report.failure_rates[i];

            std::vector<double> products;
            std::vector<double> joint_freqs;
            for (const auto& g : included) {
                double product = 1.0;
                double freq = 1.0;
                for (std::size_t i = 0; i < k; ++i) {
                    product *= naive_group_failure_rate(matrix, g, i);
                    freq *= naive_group_frequency(matrix, g, i);
                }
                products.push_back(product);
                joint_freqs.push_back(freq);
            }

            double freq_total = 0.0;
            for (double f : joint_freqs) freq_total += f;
            double avg_numerator = 0.0;
            for (std::size_t g = 0; g < included.size(); ++g) {
                avg_numerator += joint_freqs[g] / freq_total * products[g];
            }
            double unif_numerator = 0.0;
            for (double p : products) unif_numerator += p;
            unif_numerator /= static_cast<double>(products.size());
            std::size_t worst = 0;
            for (std::size_t g = 1; g < products.size(); ++g) {
                if (products[g] > products[worst]) worst = g;
            }
            report.worst_group = included[worst];

            if (expected == 0.0) {
                report.h_average = MetricValue::degenerate();
                report.h_uniform = MetricValue::degenerate();
                report.h_worst = MetricValue::degenerate();
            } else {
                report.h_average = MetricValue::defined(avg_numerator / expected);
                report.h_uniform = MetricValue::defined(unif_numerator / expected);
                report.h_worst = MetricValue::defined(products[worst] / expected);
            }

            double mean = 0.0;
            for (double p : products) mean += p;
            mean /= static_cast<double>(products.size());
            double variance = 0.0;
            for (double p : products) variance += (p - mean) * (p - mean);
            report.unfairness_value = variance / static_cast<double>(products.size());
        }
    }

    if (k == 2 && unmasked) {
        const double f1 = report.failure_rates[0];
        const double f2 = report.failure_rates[1];
        report.covariance = naive_systemic(matrix) - f1 * f2;
        if (report.oh_individual.is_defined() && report.oh_individual.value > 0.0) {
            report.pmi = std::log(report.oh_individual.value);
        }
        if (f1 > 0.0 && f1 < 1.0 && f2 > 0.0 && f2 < 1.0) {
            report.pearson = *report.covariance / std::sqrt(f1 * (1.0 - f1) * f2 * (1.0 - f2));
        }
    }

    if (matrix.has_losses() && unmasked) {
        std::vector<double> means(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < n; ++j) means[i] += matrix.losses[j * k + i];
            means[i] /= static_cast<double>(n);
        }
        double product_of_means = 1.0;
        for (double v : means) product_of_means *= v;
        double numerator = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double product = 1.0;
            for (std::size_t i = 0; i < k; ++i) product *= matrix.losses[j * k + i];
            numerator += product;
        }
        numerator /= static_cast<double>(n);
        if (product_of_means == 0.0) {
            report.loss_oh = MetricValue::degenerate();
        } else {
            report.loss_oh = MetricValue::defined(numerator / product_of_means);
        }

        double min_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double best = matrix.losses[j * k];
            for (std::size_t i = 1; i < k; ++i) best = std::min(best, matrix.losses[j * k + i]);
            min_sum += best;
        }
        min_sum /= static_cast<double>(n);
        const double best_mean = *std::min_element(means.begin(), means.end());
        double mean_of_means = 0.0;
        for (double v : means) mean_of_means += v;
        mean_of_means /= static_cast<double>(k);
        report.minexp_value = best_mean == 0.0 ? MetricValue::degenerate()
                                               : MetricValue::defined(min_sum / best_mean);
        report.expexp_value = mean_of_means == 0.0 ? MetricValue::degenerate()
                                                   : MetricValue::defined(min_sum / mean_of_means);
    }

    return report;
}

std::pair<double, double> oracle_rank_stats(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    const std::size_t n = x.size();

    auto pearson_of = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double mean_a = 0.0, mean_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mean_a += a[i];
            mean_b += b[i];
        }
        mean_a /= static_cast<double>(n);
        mean_b /= static_cast<double>(n);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sab += (a[i] - mean_a) * (b[i] - mean_b);
            saa += (a[i] - mean_a) * (a[i] - mean_a);
            sbb += (b[i] - mean_b) * (b[i] - mean_b);
        }
        return sab / std::sqrt(saa * sbb);
    };

    // Average ranks by counting, O(n^2) on purpose.
    auto ranks_of = [n](const std::vector<double>& a) {
        std::vector<double> ranks(n);
        for (std::size_t i = 0; i < n; ++i) {
            double below = 0.0;
            double tied = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (a[j] < a[i]) below += 1.0;
                if (a[j] == a[i]) tied += 1.0;
            }
            ranks[i] = below + (tied + 1.0) / 2.0;
        }
        return ranks;
    };

    return {pearson_of(x, y), pearson_of(ranks_of(x), ranks_of(y))};
}

namespace {

void check(std::vector<std::string>& out, const std::string& name, double fast, double oracle,
           double tol) {
    if (!close(fast, oracle, tol)) {
        out.push_back(name + ": fast=" + std::to_string(fast) +
                      " oracle=" + std::to_string(oracle));
    }
}

void check_metric(std::vector<std::string>& out, const std::string& name, const MetricValue& fast,
                  const MetricValue& oracle, double tol) {
    if (fast.is_defined() != oracle.is_defined()) {
        out.push_back(name + ": definedness mismatch");
        return;
    }
    if (fast.is_defined()) check(out, name, fast.value, oracle.value, tol);
}

}  // namespace

std::vector<std::string> verify_against_oracle(const OutcomeMatrix& matrix, double tol) {
    std::vector<std::string> disagreements;
    const OracleReport oracle = oracle_metrics(matrix);

    for (std::size_t i = 0; i < matrix.n_deployments(); ++i) {
        check(disagreements, "failure_rate[" + std::to_string(i) + "]", failure_rate(matrix, i),
              oracle.failure_rates[i], tol);
    }
    if (oracle.observed_systemic) {
        check(disagreements, "systemic_failure_rate", systemic_failure_rate(matrix),
              *oracle.observed_systemic, tol);
    }
    check_metric(disagreements, "oh_individual", homogenization_individual(matrix),
                 oracle.oh_individual, tol);

    if (oracle.h_average) {
        const auto avg = homogenization_group(matrix, GroupWeighting::Average);
        const auto unif = homogenization_group(matrix, GroupWeighting::Uniform);
        const auto worst = homogenization_group(matrix, GroupWeighting::Worst);
        check_metric(disagreements, "h_average", avg.metric, *oracle.h_average, tol);
        check_metric(disagreements, "h_uniform", unif.metric, *oracle.h_uniform, tol);
        check_metric(disagreements, "h_worst", worst.metric, *oracle.h_worst, tol);
        if (worst.worst_group != oracle.worst_group) {
            disagreements.push_back("h_worst: attaining group mismatch");
        }
        if (avg.excluded_groups != oracle.excluded_groups) {
            disagreements.push_back("group exclusion mismatch");
        }
        check(disagreements, "unfairness", unfairness(matrix), *oracle.unfairness_value, tol);
    }

    if (oracle.covariance) {
        check(disagreements, "covariance", covariance_failures(matrix), *oracle.covariance, tol);
        bool fast_pmi_defined = true;
        double fast_pmi = 0.0;
        try {
            fast_pmi = pmi_failures(matrix);
        } catch (const UndefinedMetric&) {
            fast_pmi_defined = false;
        }
        if (fast_pmi_defined != oracle.pmi.has_value()) {
            disagreements.push_back("pmi: definedness mismatch");
        } else if (fast_pmi_defined) {
            check(disagreements, "pmi", fast_pmi, *oracle.pmi, tol);
        }
        bool fast_pearson_defined = true;
        double fast_pearson = 0.0;
        try {
            fast_pearson = pearson_failures(matrix);
        } catch (const UndefinedMetric&) {
            fast_pearson_defined = false;
        }
        if (fast_pearson_defined != oracle.pearson.has_value()) {
            disagreements.push_back("pearson: definedness mismatch");
        } else if (fast_pearson_defined) {
            check(disagreements, "pearson", fast_pearson, *oracle.pearson, tol);
        }
    }

    if (oracle.loss_oh) {
        check_metric(disagreements, "loss_homogenization", loss_homogenization(matrix),
                     *oracle.loss_oh, tol);
        check_metric(disagreements, "minexp", minexp(matrix), *oracle.minexp_value, tol);
        check_metric(disagreements, "expexp", expexp(matrix), *oracle.expexp_value, tol);
    }

    return disagreements;
}

OutcomeMatrix random_outcome_matrix(rng::Engine& engine, const FuzzOptions& options) {
    const std::size_t n = 1 + engine.below(options.max_individuals);
    const std::size_t k = 1 + engine.below(options.max_deployments);

    OutcomeMatrix m;
    for (std::size_t j = 0; j < n; ++j) {
        char id[32];
        std::snprintf(id, sizeof id, "ind%05zu", j);
        m.individual_ids.emplace_back(id);
    }
    for (std::size_t i = 0; i < k; ++i) {
        m.deployment_ids.push_back("dep" + std::to_string(i));
    }

    const bool with_mask = options.allow_mask && engine.bernoulli(0.4);
    const bool with_groups = options.allow_groups && engine.bernoulli(0.5);
    const bool with_losses = options.allow_losses && engine.bernoulli(0.5);

    m.mask.assign(n * k, 1);
    if (with_mask) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < k; ++i) m.mask[j * k + i] = engine.bernoulli(0.8) ? 1 : 0;
            bool any = false;
            for (std::size_t i = 0; i < k; ++i) any = any || m.mask[j * k + i];
            if (!any) m.mask[j * k + engine.below(k)] = 1;
        }
        // Keep every deployment reachable so failure_rate stays defined.
        for (std::size_t i = 0; i < k; ++i) {
            bool any = false;
            for (std::size_t j = 0; j < n; ++j) any = any || m.mask[j * k + i];
            if (!any) m.mask[engine.below(n) * k + i] = 1;
        }
    }

    std::vector<double> column_rate(k);
    for (std::size_t i = 0; i < k; ++i) column_rate[i] = engine.uniform(0.05, 0.95);
    m.failures.assign(n * k, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            if (m.mask[j * k + i]) {
                m.failures[j * k + i] = engine.bernoulli(column_rate[i]) ? 1 : 0;
            }
        }
    }

    if (with_groups) {
        const std::size_t n_labels = 1 + engine.below(std::min<std::size_t>(5, n));
        const bool per_deployment = engine.bernoulli(0.3);
        m.groups.assign(n * k, std::string{});
        for (std::size_t j = 0; j < n; ++j) {
            const std::string row_label = "g" + std::to_string(engine.below(n_labels));
            for (std::size_t i = 0; i < k; ++i) {
                m.groups[j * k + i] =
                    per_deployment ? "g" + std::to_string(engine.below(n_labels)) : row_label;
            }
        }
    }

    if (with_losses) {
        const bool zero_column = engine.bernoulli(0.1);
        const std::size_t dead = zero_column ? engine.below(k) : k;
        m.losses.assign(n * k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < k; ++i) {
                if (!m.mask[j * k + i] || i == dead) continue;
                m.losses[j * k + i] = engine.bernoulli(0.15) ? 0.0 : engine.uniform(0.0, 3.0);
            }
        }
    }

    bool all_ones = true;
    for (std::uint8_t v : m.mask) all_ones = all_ones && v != 0;
    if (all_ones) m.mask.clear();
    return m;
}

}  // namespace homog::reference
