#include "homog/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "homog/errors.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

using nlohmann::json;

// Plain comma split; the schemas here never quote or embed delimiters.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Locale-independent double parse of a whole field.
std::optional<double> parse_double(const std::string& field) {
    if (field.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

ParseError line_error(std::size_t line_number, const std::string& what) {
    return ParseError("line " + std::to_string(line_number) + ": " + what);
}

std::string format_double(double value) { return json(value).dump(); }

json metric_to_json(const MetricValue& value) {
    return value.is_defined() ? json(value.value) : json(nullptr);
}

const char* metric_status(const MetricValue& value) {
    return value.is_defined() ? "defined" : "degenerate-zero-over-zero";
}

json group_result_to_json(const GroupMetricResult& result) {
    json out;
    out["value"] = metric_to_json(result.metric);
    out["status"] = metric_status(result.metric);
    if (result.worst_group) out["worst_group"] = *result.worst_group;
    out["excluded_groups"] = result.excluded_groups;
    return out;
}

}  // namespace

OutcomeMatrix load_outcome_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: header missing");
    const std::vector<std::string> header = split_csv_line(strip_cr(line));
    if (header.size() < 3 || header[0] != "individual_id" || header[1] != "deployment_id" ||
        header[2] != "failure") {
        throw ParseError("header must start with individual_id,deployment_id,failure");
    }
    int group_col = -1;
    int loss_col = -1;
    for (std::size_t c = 3; c < header.size(); ++c) {
        if (header[c] == "group" && group_col < 0) {
            group_col = static_cast<int>(c);
        } else if (header[c] == "loss" && loss_col < 0) {
            loss_col = static_cast<int>(c);
        } else {
            throw ParseError("unknown column: " + header[c]);
        }
    }

    std::vector<LongRecord> records;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw line_error(line_number, "expected " + std::to_string(header.size()) +
                                              " fields, got " + std::to_string(fields.size()));
        }
        LongRecord record;
        record.individual_id = fields[0];
        record.deployment_id = fields[1];
        if (fields[2] == "0") {
            record.failure = 0;
        } else if (fields[2] == "1") {
            record.failure = 1;
        } else {
            throw line_error(line_number, "failure must be 0 or 1, got '" + fields[2] + "'");
        }
        if (group_col >= 0 && !fields[static_cast<std::size_t>(group_col)].empty()) {
            record.group = fields[static_cast<std::size_t>(group_col)];
        }
        if (loss_col >= 0 && !fields[static_cast<std::size_t>(loss_col)].empty()) {
            const auto loss = parse_double(fields[static_cast<std::size_t>(loss_col)]);
            if (!loss) throw line_error(line_number, "unparseable loss '" +
                                                         fields[static_cast<std::size_t>(loss_col)] + "'");
            if (*loss < 0.0) throw line_error(line_number, "negative loss");
            record.loss = *loss;
        }
        records.push_back(std::move(record));
    }
    if (records.empty()) throw ParseError("empty matrix: no records after header");

    try {
        return from_long_records(records);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

std::string write_outcome_csv(const OutcomeMatrix& matrix) {
    std::ostringstream out;
    out << "individual_id,deployment_id,failure";
    if (matrix.has_groups()) out << ",group";
    if (matrix.has_losses()) out << ",loss";
    out << "\n";
    for (const LongRecord& r : to_long_records(matrix)) {
        out << r.individual_id << "," << r.deployment_id << "," << r.failure;
        if (matrix.has_groups()) out << "," << (r.group ? *r.group : std::string{});
        if (matrix.has_losses()) out << "," << (r.loss ? format_double(*r.loss) : std::string{});
        out << "\n";
    }
    return out.str();
}

namespace {

// Shared by the tabular and German Credit loaders once raw string columns
// are in hand: one-hot encodes categorical columns, splits 80/20.
TabularDataset assemble_dataset(
    const std::vector<std::string>& column_names,
    const std::vector<std::vector<std::string>>& columns,  // [col][row]
    const std::vector<bool>& is_numeric, const std::vector<std::vector<std::string>>& vocabulary,
    const std::vector<std::pair<std::string, std::vector<int>>>& tasks,
    const std::vector<std::string>& groups, std::uint64_t split_seed, double split_fraction) {
    const std::size_t n_rows = columns.empty() ? 0 : columns.front().size();

    TabularDataset dataset;
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        if (is_numeric[c]) {
            dataset.feature_names.push_back(column_names[c]);
        } else {
            for (const auto& value : vocabulary[c]) {
                dataset.feature_names.push_back(column_names[c] + "=" + value);
            }
        }
    }

    dataset.features.rows = n_rows;
    dataset.features.cols = dataset.feature_names.size();
    dataset.features.data.assign(n_rows * dataset.features.cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < column_names.size(); ++c) {
            if (is_numeric[c]) {
                dataset.features.at(r, out_col++) = *parse_double(columns[c][r]);
            } else {
                for (const auto& value : vocabulary[c]) {
                    dataset.features.at(r, out_col++) = columns[c][r] == value ? 1.0 : 0.0;
                }
            }
        }
    }

    for (const auto& [name, labels] : tasks) {
        dataset.task_names.push_back(name);
        dataset.task_labels.push_back(labels);
    }
    dataset.groups = groups;

    std::vector<std::size_t> rows(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) rows[r] = r;
    rng::Engine engine(split_seed);
    engine.shuffle(rows);
    const auto n_train =
        static_cast<std::size_t>(std::lround(static_cast<double>(n_rows) * split_fraction));
    dataset.train_indices.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    dataset.test_indices.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    return dataset;
}

}  // namespace

TabularDataset load_tabular_csv(std::istream& in, const std::vector<std::string>& task_columns,
                                const std::optional<std::string>& group_column,
                                std::uint64_t split_seed, double split_fraction) {
    if (task_columns.empty()) throw InvalidArgument("at least one task column is required");
    if (split_fraction <= 0.0 || split_fraction >= 1.0) {
        throw InvalidArgument("split_fraction must lie in (0,1)");
    }

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: header missing");
    const std::vector<std::string> header = split_csv_line(strip_cr(line));

    std::map<std::string, std::size_t> col_of;
    for (std::size_t c = 0; c < header.size(); ++c) col_of[header[c]] = c;
    for (const auto& name : task_columns) {
        if (!col_of.count(name)) throw InvalidArgument("task column not found: " + name);
    }
    if (group_column && !col_of.count(*group_column)) {
        throw InvalidArgument("group column not found: " + *group_column);
    }

    std::vector<bool> is_feature(header.size(), true);
    for (const auto& name : task_columns) is_feature[col_of[name]] = false;
    if (group_column) is_feature[col_of[*group_column]] = false;

    std::vector<std::vector<std::string>> raw(header.size());
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw line_error(line_number, "expected " + std::to_string(header.size()) +
                                              " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < header.size(); ++c) raw[c].push_back(fields[c]);
    }
    const std::size_t n_rows = raw.empty() ? 0 : raw.front().size();
    if (n_rows == 0) throw ParseError("no data rows");

    // Feature typing from the first data row; vocabulary in first-appearance order.
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::string>> feature_columns;
    std::vector<bool> numeric;
    std::vector<std::vector<std::string>> vocabulary;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!is_feature[c]) continue;
        feature_names.push_back(header[c]);
        feature_columns.push_back(raw[c]);
        const bool is_num = parse_double(raw[c].front()).has_value();
        numeric.push_back(is_num);
        std::vector<std::string> vocab;
        if (is_num) {
            for (std::size_t r = 0; r < n_rows; ++r) {
                if (!parse_double(raw[c][r])) {
                    throw ParseError("line " + std::to_string(r + 2) + ": unparseable numeric '" +
                                     raw[c][r] + "' in column " + header[c]);
                }
            }
        } else {
            for (std::size_t r = 0; r < n_rows; ++r) {
                if (std::find(vocab.begin(), vocab.end(), raw[c][r]) == vocab.end()) {
                    vocab.push_back(raw[c][r]);
                }
            }
        }
        vocabulary.push_back(std::move(vocab));
    }

    std::vector<std::pair<std::string, std::vector<int>>> tasks;
    for (const auto& name : task_columns) {
        const auto& column = raw[col_of[name]];
        std::vector<int> labels(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (column[r] == "0") {
                labels[r] = 0;
            } else if (column[r] == "1") {
                labels[r] = 1;
            } else {
                throw ParseError("line " + std::to_string(r + 2) + ": non-binary task column " +
                                 name + " value '" + column[r] + "'");
            }
        }
        tasks.emplace_back(name, std::move(labels));
    }

    std::vector<std::string> groups;
    if (group_column) groups = raw[col_of[*group_column]];

    return assemble_dataset(feature_names, feature_columns, numeric, vocabulary, tasks, groups,
                            split_seed, split_fraction);
}

TabularDataset load_german_credit(std::istream& in, std::uint64_t split_seed) {
    constexpr std::size_t kFields = 21;
    constexpr std::size_t kRows = 1000;
    constexpr std::size_t kAmountField = 4;   // attribute 5, 0-based
    constexpr std::size_t kOutcomeField = 20;
    // Pinned 16-attribute feature set (1-based attribute numbers); credit
    // amount (5) determines the second task, 9/19/20 are excluded as
    // documented in the README.
    constexpr std::size_t kFeatureAttrs[] = {1, 2, 3, 4, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16, 17, 18};
    // Numeric attributes in the statlog layout.
    constexpr std::size_t kNumericAttrs[] = {2, 8, 11, 13, 16, 18};

    std::vector<std::array<std::string, kFields>> rows;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::array<std::string, kFields> row;
        std::size_t count = 0;
        std::string field;
        while (fields >> field) {
            if (count < kFields) row[count] = field;
            ++count;
        }
        if (count != kFields) {
            throw line_error(line_number, "expected " + std::to_string(kFields) +
                                              " fields, got " + std::to_string(count));
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != kRows) {
        throw ParseError("expected " + std::to_string(kRows) + " rows, got " +
                         std::to_string(rows.size()));
    }

    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> columns;
    std::vector<bool> numeric;
    std::vector<std::vector<std::string>> vocabulary;
    for (std::size_t attr : kFeatureAttrs) {
        column_names.push_back("attr" + std::to_string(attr));
        std::vector<std::string> column;
        for (const auto& row : rows) column.push_back(row[attr - 1]);
        const bool is_num = std::find(std::begin(kNumericAttrs), std::end(kNumericAttrs), attr) !=
                            std::end(kNumericAttrs);
        if (is_num) {
            for (std::size_t r = 0; r < column.size(); ++r) {
                if (!parse_double(column[r])) {
                    throw line_error(r + 1, "unparseable numeric attribute " +
                                                std::to_string(attr) + ": '" + column[r] + "'");
                }
            }
            vocabulary.emplace_back();
        } else {
            // Codes are a fixed finite alphabet; sorted order is canonical.
            std::vector<std::string> vocab = column;
            std::sort(vocab.begin(), vocab.end());
            vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
            vocabulary.push_back(std::move(vocab));
        }
        numeric.push_back(is_num);
        columns.push_back(std::move(column));
    }

    std::vector<int> bad_loan(kRows);
    std::vector<int> amount_gt_2000(kRows);
    for (std::size_t r = 0; r < kRows; ++r) {
        const std::string& outcome = rows[r][kOutcomeField];
        if (outcome == "1") {
            bad_loan[r] = 0;
        } else if (outcome == "2") {
            bad_loan[r] = 1;
        } else {
            throw line_error(r + 1, "outcome code must be 1 or 2, got '" + outcome + "'");
        }
        const auto amount = parse_double(rows[r][kAmountField]);
        if (!amount) {
            throw line_error(r + 1, "unparseable credit amount '" + rows[r][kAmountField] + "'");
        }
        amount_gt_2000[r] = *amount > 2000.0 ? 1 : 0;
    }

    return assemble_dataset(column_names, columns, numeric, vocabulary,
                            {{"bad_loan", bad_loan}, {"amount_gt_2000", amount_gt_2000}}, {},
                            split_seed, 0.8);
}

void load_series_csv(std::istream& in, std::vector<std::string>& names,
                     std::vector<std::vector<double>>& series) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: header missing");
    names = split_csv_line(strip_cr(line));
    series.assign(names.size(), {});
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != names.size()) {
            throw line_error(line_number, "expected " + std::to_string(names.size()) +
                                              " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto value = parse_double(fields[c]);
            if (!value) {
                throw line_error(line_number, "unparseable numeric '" + fields[c] + "'");
            }
            series[c].push_back(*value);
        }
    }
    if (series.empty() || series.front().empty()) throw ParseError("no data rows");
}

namespace {

const char* protocol_name(Protocol p) { return p == Protocol::Fixed ? "fixed" : "disjoint"; }
const char* family_name(ModelFamily f) { return f == ModelFamily::Logreg ? "logreg" : "mlp"; }

json aggregate_to_json(const TrialAggregate& aggregate) {
    json out;
    out["mean"] = aggregate.mean;
    out["stderr"] = aggregate.std_error;
    out["n_trials"] = aggregate.n_trials;
    out["n_excluded"] = aggregate.n_excluded;
    return out;
}

}  // namespace

std::string write_report(const StudyResult& result, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "protocol,n,metric,mean,stderr\n";
        for (const auto& [n, metrics] : result.aggregates) {
            for (const auto& [name, aggregate] : metrics) {
                out << protocol_name(result.config.protocol) << "," << n << "," << name << ","
                    << format_double(aggregate.mean) << "," << format_double(aggregate.std_error)
                    << "\n";
            }
        }
        return out.str();
    }

    json config;
    config["protocol"] = protocol_name(result.config.protocol);
    config["train_sizes"] = result.config.train_sizes;
    config["n_data_samples"] = result.config.n_data_samples;
    config["n_seeds_per_sample"] = result.config.n_seeds_per_sample;
    config["model_family"] = family_name(result.config.model_family);
    config["base_seed"] = result.config.base_seed;
    config["task_names"] = result.task_names;

    json per_trial = json::array();
    for (const auto& trial : result.trials) {
        json t;
        t["n"] = trial.train_size;
        t["sample_index"] = trial.sample_index;
        t["seed_index"] = trial.seed_index;
        t["data_seed"] = trial.seeds.data_seed;
        t["train_seed"] = trial.seeds.train_seed;
        t["error_rates"] = trial.error_rates;
        t["expected_systemic"] = trial.expected_systemic;
        t["observed_systemic"] = trial.observed_systemic;
        t["oh_individual"] = metric_to_json(trial.oh_individual);
        t["oh_individual_status"] = metric_status(trial.oh_individual);
        if (trial.h_average) t["h_average"] = group_result_to_json(*trial.h_average);
        if (trial.h_uniform) t["h_uniform"] = group_result_to_json(*trial.h_uniform);
        if (trial.h_worst) t["h_worst"] = group_result_to_json(*trial.h_worst);
        if (trial.unfairness_value) t["unfairness"] = *trial.unfairness_value;
        if (!trial.fallback_tasks.empty()) t["fallback_tasks"] = trial.fallback_tasks;
        per_trial.push_back(std::move(t));
    }

    json aggregates = json::array();
    for (const auto& [n, metrics] : result.aggregates) {
        json entry;
        entry["n"] = n;
        json table;
        for (const auto& [name, aggregate] : metrics) table[name] = aggregate_to_json(aggregate);
        entry["metrics"] = std::move(table);
        aggregates.push_back(std::move(entry));
    }

    json report;
    report["config"] = std::move(config);
    report["per_trial"] = std::move(per_trial);
    report["aggregates"] = std::move(aggregates);
    report["warnings"] = result.warnings;
    return report.dump(2) + "\n";
}

std::string write_report(const MetricsReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "metric,value,status\n";
        const auto row = [&out](const std::string& name, const MetricValue& value) {
            out << name << "," << (value.is_defined() ? format_double(value.value) : std::string{})
                << "," << metric_status(value) << "\n";
        };
        for (std::size_t i = 0; i < report.failure_rates.size(); ++i) {
            row("failure_rate:" + report.deployment_ids[i],
                MetricValue::defined(report.failure_rates[i]));
        }
        if (report.observed_systemic) {
            row("observed_systemic", MetricValue::defined(*report.observed_systemic));
        }
        if (report.expected_systemic) {
            row("expected_systemic", MetricValue::defined(*report.expected_systemic));
        }
        row("oh_individual", report.oh_individual);
        if (report.h_average) row("h_average", report.h_average->metric);
        if (report.h_uniform) row("h_uniform", report.h_uniform->metric);
        if (report.h_worst) row("h_worst", report.h_worst->metric);
        if (report.unfairness_value) row("unfairness", MetricValue::defined(*report.unfairness_value));
        if (report.covariance) row("covariance", MetricValue::defined(*report.covariance));
        if (report.pmi) row("pmi", MetricValue::defined(*report.pmi));
        if (report.pearson) row("pearson", MetricValue::defined(*report.pearson));
        if (report.loss_oh) row("loss_oh", *report.loss_oh);
        if (report.minexp_value) row("minexp", *report.minexp_value);
        if (report.expexp_value) row("expexp", *report.expexp_value);
        return out.str();
    }

    json out;
    json rates;
    for (std::size_t i = 0; i < report.failure_rates.size(); ++i) {
        rates[report.deployment_ids[i]] = report.failure_rates[i];
    }
    out["failure_rates"] = std::move(rates);
    out["observed_systemic"] =
        report.observed_systemic ? json(*report.observed_systemic) : json(nullptr);
    out["expected_systemic"] =
        report.expected_systemic ? json(*report.expected_systemic) : json(nullptr);
    out["oh_individual"] = metric_to_json(report.oh_individual);
    out["oh_individual_status"] = metric_status(report.oh_individual);
    out["h_average"] = report.h_average ? group_result_to_json(*report.h_average) : json(nullptr);
    out["h_uniform"] = report.h_uniform ? group_result_to_json(*report.h_uniform) : json(nullptr);
    out["h_worst"] = report.h_worst ? group_result_to_json(*report.h_worst) : json(nullptr);
    out["unfairness"] = report.unfairness_value ? json(*report.unfairness_value) : json(nullptr);
    out["covariance"] = report.covariance ? json(*report.covariance) : json(nullptr);
    out["pmi"] = report.pmi ? json(*report.pmi) : json(nullptr);
    out["pearson"] = report.pearson ? json(*report.pearson) : json(nullptr);
    out["loss_oh"] = report.loss_oh ? metric_to_json(*report.loss_oh) : json(nullptr);
    out["minexp"] = report.minexp_value ? metric_to_json(*report.minexp_value) : json(nullptr);
    out["expexp"] = report.expexp_value ? metric_to_json(*report.expexp_value) : json(nullptr);
    out["warnings"] = report.warnings;
    return out.dump(2) + "\n";
}

std::string write_report(const CorrelationReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "first,second,pearson_r,pearson_r2,spearman_rho,p_pearson,p_spearman,defined\n";
        for (const auto& pair : report.pairs) {
            out << pair.first << "," << pair.second << ",";
            if (pair.defined) {
                out << format_double(pair.pearson_r) << "," << format_double(pair.pearson_r2)
                    << "," << format_double(pair.spearman_rho) << ","
                    << format_double(pair.p_pearson) << "," << format_double(pair.p_spearman);
            } else {
                out << ",,,,";
            }
            out << "," << (pair.defined ? "true" : "false") << "\n";
        }
        return out.str();
    }

    json pairs = json::array();
    for (const auto& pair : report.pairs) {
        json p;
        p["first"] = pair.first;
        p["second"] = pair.second;
        p["defined"] = pair.defined;
        if (pair.defined) {
            p["pearson_r"] = pair.pearson_r;
            p["pearson_r2"] = pair.pearson_r2;
            p["spearman_rho"] = pair.spearman_rho;
            p["p_pearson"] = pair.p_pearson;
            p["p_spearman"] = pair.p_spearman;
            p["pearson_significant_05"] = pair.pearson_significant_05;
            p["pearson_significant_001"] = pair.pearson_significant_001;
            p["spearman_significant_05"] = pair.spearman_significant_05;
            p["spearman_significant_001"] = pair.spearman_significant_001;
        } else {
            p["undefined_reason"] = pair.undefined_reason;
        }
        pairs.push_back(std::move(p));
    }
    json out;
    out["n_observations"] = report.n_observations;
    out["permutations"] = report.permutations;
    out["seed"] = report.seed;
    out["pairs"] = std::move(pairs);
    return out.dump(2) + "\n";
}

}  // namespace homog
