#include <doctest.h>

#include <cmath>

#include "homog/errors.hpp"
#include "homog/rng.hpp"
#include "homog/stats.hpp"

using namespace homog;

TEST_SUITE_BEGIN("stats");

TEST_CASE("pearson on small series") {
    CHECK(pearson({1, 2, 3}, {1, 2, 3}).r == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {1, 2, 3}).r2 == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {3, 2, 1}).r == doctest::Approx(-1.0));
    CHECK(pearson({1, 2, 3, 4}, {1, 3, 2, 4}).r == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), UndefinedMetric);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), InvalidArgument);
}

TEST_CASE("spearman uses average ranks for ties") {
    CHECK(spearman({1, 2, 3}, {2, 8, 9}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3}, {9, 4, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 1, 2}, {1, 2, 3}) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    // Rank invariance under strictly monotone transforms.
    CHECK(spearman({0.1, 1.0, 5.0, 9.0}, {1.0, 2.7, 150.0, 8100.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(spearman({2, 2, 2}, {1, 2, 3}), UndefinedMetric);
}

TEST_CASE("pearson is symmetric and affine invariant") {
    rng::Engine engine(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(10), y(10);
        for (auto& v : x) v = engine.normal();
        for (auto& v : y) v = engine.normal();
        const double r = pearson(x, y).r;
        CHECK(pearson(y, x).r == doctest::Approx(r).epsilon(1e-12));
        std::vector<double> scaled = x;
        for (auto& v : scaled) v = 3.0 * v + 7.0;
        CHECK(pearson(scaled, y).r == doctest::Approx(r).epsilon(1e-9));
        CHECK(spearman(scaled, y) == doctest::Approx(spearman(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("permutation p-value for a perfect correlation") {
    std::vector<double> x(20);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const double p = permutation_pvalue(x, x, CorrelationStatistic::Pearson, 10000, 99);
    CHECK(p < 0.001);
    CHECK(p > 0.0);  // plus-one smoothing forbids exact zero
}

TEST_CASE("permutation p-value for independent noise is unremarkable") {
    rng::Engine engine(1234);
    std::vector<double> x(50), y(50);
    for (auto& v : x) v = engine.normal();
    for (auto& v : y) v = engine.normal();
    const double p = permutation_pvalue(x, y, CorrelationStatistic::Spearman, 2000, 7);
    CHECK(p > 0.001);
}

TEST_CASE("permutation p-value is seed-reproducible and thread-invariant") {
    rng::Engine engine(8);
    std::vector<double> x(25), y(25);
    for (auto& v : x) v = engine.normal();
    for (auto& v : y) v = 0.4 * engine.normal();
    const double p1 = permutation_pvalue(x, y, CorrelationStatistic::Pearson, 3000, 42);
    const double p2 = permutation_pvalue(x, y, CorrelationStatistic::Pearson, 3000, 42);
    const double p4 = permutation_pvalue(x, y, CorrelationStatistic::Pearson, 3000, 42, 4);
    CHECK(p1 == p2);
    CHECK(p1 == p4);
    const double other = permutation_pvalue(x, y, CorrelationStatistic::Pearson, 3000, 43);
    CHECK(p1 != other);  // different seed explores different permutations
}

TEST_CASE("permutation test rejects undefined observed statistics") {
    CHECK_THROWS_AS(
        permutation_pvalue({1, 1, 1, 1}, {1, 2, 3, 4}, CorrelationStatistic::Pearson, 100, 1),
        UndefinedMetric);
    CHECK_THROWS_AS(permutation_pvalue({1, 2}, {1, 2}, CorrelationStatistic::Pearson, 100, 1),
                    InvalidArgument);
}

TEST_CASE("trial aggregation") {
    const TrialAggregate constant = aggregate_trials(std::vector<double>{2, 2, 2});
    CHECK(constant.mean == 2.0);
    CHECK(constant.std_error == 0.0);
    CHECK(constant.n_trials == 3);

    const TrialAggregate pair = aggregate_trials(std::vector<double>{1, 3});
    CHECK(pair.mean == 2.0);
    CHECK(pair.std_error == doctest::Approx(1.0).epsilon(1e-12));

    const TrialAggregate lone = aggregate_trials(std::vector<double>{5});
    CHECK(lone.mean == 5.0);
    CHECK(lone.std_error == 0.0);
    CHECK(lone.n_trials == 1);

    CHECK_THROWS_AS(aggregate_trials(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("degenerate metric values are excluded and counted") {
    const std::vector<MetricValue> values = {
        MetricValue::defined(1.0),
        MetricValue::degenerate(),
        MetricValue::defined(3.0),
    };
    const TrialAggregate aggregate = aggregate_trials(values);
    CHECK(aggregate.mean == 2.0);
    CHECK(aggregate.n_trials == 2);
    CHECK(aggregate.n_excluded == 1);

    CHECK_THROWS_AS(aggregate_trials(std::vector<MetricValue>{MetricValue::degenerate()}),
                    InvalidArgument);
}

TEST_CASE("aggregation is order-invariant") {
    const TrialAggregate a = aggregate_trials(std::vector<double>{1, 5, 2, 4});
    const TrialAggregate b = aggregate_trials(std::vector<double>{4, 2, 5, 1});
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == doctest::Approx(b.std_error).epsilon(1e-15));
}

TEST_CASE("correlate_all marks undefined pairs and keeps going") {
    const std::vector<std::string> names = {"a", "b", "c"};
    std::vector<std::vector<double>> series(3);
    for (int i = 0; i < 12; ++i) {
        series[0].push_back(i);
        series[1].push_back(i);
        series[2].push_back(7.0);
    }
    const CorrelationReport report = correlate_all(names, series, 500, 3);
    REQUIRE(report.pairs.size() == 3);
    CHECK(report.pairs[0].defined);
    CHECK(report.pairs[0].pearson_r == doctest::Approx(1.0));
    CHECK(report.pairs[0].p_pearson < 0.05);
    CHECK_FALSE(report.pairs[1].defined);  // a vs constant c
    CHECK_FALSE(report.pairs[2].defined);
}

TEST_SUITE_END();
