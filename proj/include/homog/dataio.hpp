#pragma once
// File formats: long-form outcome CSV, generic tabular CSV with declared
// task/group columns, the German Credit .data layout, metric series for
// correlation, and JSON/CSV report emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "homog/experiment.hpp"
#include "homog/metrics.hpp"
#include "homog/outcomes.hpp"
#include "homog/stats.hpp"

namespace homog {

inline constexpr std::uint64_t kDefaultSplitSeed = 1729;

// Long-format outcome CSV with header
//   individual_id,deployment_id,failure[,group][,loss]
// one record per interaction; absent pairs mean non-interaction.
// Throws ParseError (with line numbers) on malformed rows, duplicate pairs,
// unknown columns, or an empty body.
OutcomeMatrix load_outcome_csv(std::istream& in);

// Canonical long-format emission; load(write(m)) == m.
std::string write_outcome_csv(const OutcomeMatrix& matrix);

// Generic tabular loader. Named task columns must be binary; the optional
// group column carries labels; every other column is a feature. A feature
// column whose first data value parses as a number is numeric throughout
// (anything else there is a ParseError); otherwise it is categorical and
// one-hot encoded with vocabulary in order of first appearance.
TabularDataset load_tabular_csv(std::istream& in, const std::vector<std::string>& task_columns,
                                const std::optional<std::string>& group_column,
                                std::uint64_t split_seed, double split_fraction = 0.8);

// German Credit .data layout: 1000 space-separated rows of 20 attributes
// plus an outcome code (1 = good, 2 = bad). Tasks: bad_loan (outcome code)
// and amount_gt_2000 (credit amount, attribute 5, which is excluded from
// the features). The 16 feature attributes are pinned in the README.
TabularDataset load_german_credit(std::istream& in,
                                  std::uint64_t split_seed = kDefaultSplitSeed);

// Numeric series file for `correlate`: header of series names, one column
// per series.
void load_series_csv(std::istream& in, std::vector<std::string>& names,
                     std::vector<std::vector<double>>& series);

enum class ReportFormat { Json, Csv };

// JSON carries the full nested report; CSV is the plot-ready flat series.
// Degenerate metric values serialize as null plus a status field, never 0.
std::string write_report(const StudyResult& result, ReportFormat format);
std::string write_report(const MetricsReport& report, ReportFormat format);
std::string write_report(const CorrelationReport& report, ReportFormat format);

}  // namespace homog
