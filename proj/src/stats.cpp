#include "homog/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

void require_paired(const std::vector<double>& x, const std::vector<double>& y,
                    std::size_t min_len) {
    if (x.size() != y.size()) {
        throw InvalidArgument("series lengths differ: " + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()));
    }
    if (x.size() < min_len) {
        throw InvalidArgument("series too short: need at least " + std::to_string(min_len) +
                              " points");
    }
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    require_paired(x, y, 2);
    const std::size_t n = x.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedMetric("undefined correlation: constant series");
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return {r, r * r};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    require_paired(x, y, 2);
    return pearson(average_ranks(x), average_ranks(y)).r;
}

double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                          CorrelationStatistic statistic, std::size_t iterations,
                          std::uint64_t seed, unsigned n_threads) {
    require_paired(x, y, 3);
    if (iterations == 0) throw InvalidArgument("permutation test needs at least one iteration");

    const auto stat_of = [&](const std::vector<double>& a,
                             const std::vector<double>& b) -> double {
        return statistic == CorrelationStatistic::Pearson ? pearson(a, b).r : spearman(a, b);
    };
    const double observed = std::abs(stat_of(x, y));  // throws if undefined on the data

    std::atomic<std::size_t> exceedances{0};
    parallel_for(iterations, n_threads, [&](std::size_t iteration) {
        rng::Engine engine(rng::mix({seed, iteration}));
        std::vector<double> permuted = y;
        engine.shuffle(permuted);
        double stat;
        try {
            stat = stat_of(x, permuted);
        } catch (const UndefinedMetric&) {
            return;  // a permuted arrangement with constant ranks cannot exceed
        }
        if (std::abs(stat) >= observed) exceedances.fetch_add(1, std::memory_order_relaxed);
    });

    return (1.0 + static_cast<double>(exceedances.load())) /
           (1.0 + static_cast<double>(iterations));
}

TrialAggregate aggregate_trials(const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgument("aggregate_trials needs at least one value");
    TrialAggregate aggregate;
    aggregate.values = values;
    aggregate.n_trials = values.size();
    const double n = static_cast<double>(values.size());
    for (double v : values) aggregate.mean += v;
    aggregate.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - aggregate.mean) * (v - aggregate.mean);
        const double sample_sd = std::sqrt(ss / (n - 1.0));
        aggregate.std_error = sample_sd / std::sqrt(n);
    }
    return aggregate;
}

TrialAggregate aggregate_trials(const std::vector<MetricValue>& values) {
    std::vector<double> defined;
    std::size_t excluded = 0;
    for (const auto& v : values) {
        if (v.is_defined()) {
            defined.push_back(v.value);
        } else {
            ++excluded;
        }
    }
    if (defined.empty()) {
        throw InvalidArgument("aggregate_trials: every value is degenerate");
    }
    TrialAggregate aggregate = aggregate_trials(defined);
    aggregate.n_excluded = excluded;
    return aggregate;
}

CorrelationReport correlate_all(const std::vector<std::string>& names,
                                const std::vector<std::vector<double>>& series,
                                std::size_t permutations, std::uint64_t seed,
                                unsigned n_threads) {
    if (names.size() != series.size()) {
        throw InvalidArgument("names and series counts differ");
    }
    CorrelationReport report;
    report.n_observations = series.empty() ? 0 : series.front().size();
    report.permutations = permutations;
    report.seed = seed;

    for (std::size_t a = 0; a < series.size(); ++a) {
        for (std::size_t b = a + 1; b < series.size(); ++b) {
            PairCorrelation pair;
            pair.first = names[a];
            pair.second = names[b];
            try {
                const PearsonResult pr = pearson(series[a], series[b]);
                pair.pearson_r = pr.r;
                pair.pearson_r2 = pr.r2;
                pair.spearman_rho = spearman(series[a], series[b]);
                const std::uint64_t pair_seed = rng::mix({seed, a, b});
                pair.p_pearson = permutation_pvalue(series[a], series[b],
                                                    CorrelationStatistic::Pearson, permutations,
                                                    pair_seed, n_threads);
                pair.p_spearman = permutation_pvalue(series[a], series[b],
                                                     CorrelationStatistic::Spearman, permutations,
                                                     pair_seed, n_threads);
                pair.pearson_significant_05 = pair.p_pearson <= 0.05;
                pair.pearson_significant_001 = pair.p_pearson <= 0.001;
                pair.spearman_significant_05 = pair.p_spearman <= 0.05;
                pair.spearman_significant_001 = pair.p_spearman <= 0.001;
                pair.defined = true;
            } catch (const UndefinedMetric& e) {
                pair.defined = false;
                pair.undefined_reason = e.what();
            }
            report.pairs.push_back(std::move(pair));
        }
    }
    return report;
}

}  // namespace homog
