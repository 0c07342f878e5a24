#pragma once
// Outcome-matrix data model: N individuals x k deployments of binary
// failure indicators, with an optional interaction mask, group labels,
// and per-interaction losses. Every metric in this library consumes
// these types.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace homog {

// One (individual, deployment) interaction in long form.
struct LongRecord {
    std::string individual_id;
    std::string deployment_id;
    int failure = 0;
    std::optional<std::string> group;
    std::optional<double> loss;
    // Absent means the pair interacted; an explicit false masks the pair.
    std::optional<bool> interacted;
};

enum class MetricStatus { Defined, DegenerateZeroOverZero };

// A computed ratio metric. A degenerate (0/0) result carries no number;
// consumers must branch on status before reading value.
struct MetricValue {
    double value = 0.0;
    MetricStatus status = MetricStatus::Defined;

    static MetricValue defined(double v) { return MetricValue{v, MetricStatus::Defined}; }
    static MetricValue degenerate() {
        return MetricValue{0.0, MetricStatus::DegenerateZeroOverZero};
    }
    bool is_defined() const { return status == MetricStatus::Defined; }
};

// Dense N x k outcome matrix in canonical (lexicographic-by-id) order.
// failures(j, i) = 1 iff individual j received a failure from deployment i.
// An empty mask means all pairs interacted; masked cells hold zeros and are
// ignored by every metric. groups, when present, hold one label per cell
// (a single per-individual label is broadcast at construction). losses,
// when present, hold one non-negative real per cell.
struct OutcomeMatrix {
    std::vector<std::string> individual_ids;
    std::vector<std::string> deployment_ids;
    std::vector<std::uint8_t> failures;  // N*k, row-major
    std::vector<std::uint8_t> mask;      // empty, or N*k
    std::vector<std::string> groups;     // empty, or N*k ("" = missing label)
    std::vector<double> losses;          // empty, or N*k

    std::size_t n_individuals() const { return individual_ids.size(); }
    std::size_t n_deployments() const { return deployment_ids.size(); }
    std::size_t cell(std::size_t j, std::size_t i) const { return j * n_deployments() + i; }

    bool has_mask() const { return !mask.empty(); }
    bool has_groups() const { return !groups.empty(); }
    bool has_losses() const { return !losses.empty(); }

    bool interacted(std::size_t j, std::size_t i) const {
        return mask.empty() || mask[cell(j, i)] != 0;
    }

    // True when the mask is absent or holds no zero entry.
    bool all_interactions() const;

    // Sorted unique non-empty group labels.
    std::vector<std::string> group_labels() const;
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Builds the canonical dense matrix from long records. Individuals and
// deployments are ordered lexicographically by id; (individual, deployment)
// pairs absent from the records become mask = 0.
//
// Throws InvalidArgument on a duplicate pair, a failure flag outside {0,1},
// or a negative loss.
OutcomeMatrix from_long_records(const std::vector<LongRecord>& records);

// Inverse of from_long_records: one record per unmasked cell, in canonical
// order. Masked cells are dropped (they carry no information).
std::vector<LongRecord> to_long_records(const OutcomeMatrix& matrix);

// Reports every violated invariant; an empty report means the matrix is
// well-formed. Never throws.
ValidationReport validate(const OutcomeMatrix& matrix);

}  // namespace homog
