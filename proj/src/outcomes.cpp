#include "homog/outcomes.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "homog/errors.hpp"

namespace homog {

bool OutcomeMatrix::all_interactions() const {
    if (mask.empty()) return true;
    return std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

std::vector<std::string> OutcomeMatrix::group_labels() const {
    std::set<std::string> labels;
    for (const auto& g : groups) {
        if (!g.empty()) labels.insert(g);
    }
    return {labels.begin(), labels.end()};
}

OutcomeMatrix from_long_records(const std::vector<LongRecord>& records) {
    std::set<std::string> individual_set;
    std::set<std::string> deployment_set;
    for (const auto& r : records) {
        if (r.failure != 0 && r.failure != 1) {
            throw InvalidArgument("failure flag must be 0 or 1 for (" + r.individual_id +
                                  ", " + r.deployment_id + "), got " +
                                  std::to_string(r.failure));
        }
        if (r.loss && *r.loss < 0.0) {
            throw InvalidArgument("negative loss for (" + r.individual_id + ", " +
                                  r.deployment_id + ")");
        }
        individual_set.insert(r.individual_id);
        deployment_set.insert(r.deployment_id);
    }

    OutcomeMatrix m;
    m.individual_ids.assign(individual_set.begin(), individual_set.end());
    m.deployment_ids.assign(deployment_set.begin(), deployment_set.end());
    const std::size_t n = m.n_individuals();
    const std::size_t k = m.n_deployments();

    std::map<std::string, std::size_t> row_of;
    std::map<std::string, std::size_t> col_of;
    for (std::size_t j = 0; j < n; ++j) row_of[m.individual_ids[j]] = j;
    for (std::size_t i = 0; i < k; ++i) col_of[m.deployment_ids[i]] = i;

    m.failures.assign(n * k, 0);
    m.mask.assign(n * k, 0);
    const bool any_group = std::any_of(records.begin(), records.end(),
                                       [](const LongRecord& r) { return r.group.has_value(); });
    const bool any_loss = std::any_of(records.begin(), records.end(),
                                      [](const LongRecord& r) { return r.loss.has_value(); });
    if (any_group) m.groups.assign(n * k, std::string{});
    if (any_loss) m.losses.assign(n * k, 0.0);

    std::vector<std::uint8_t> seen(n * k, 0);
    for (const auto& r : records) {
        const std::size_t c = m.cell(row_of[r.individual_id], col_of[r.deployment_id]);
        if (seen[c]) {
            throw InvalidArgument("duplicate record for (" + r.individual_id + ", " +
                                  r.deployment_id + ")");
        }
        seen[c] = 1;
        const bool interacted = !r.interacted || *r.interacted;
        if (interacted) {
            m.mask[c] = 1;
            m.failures[c] = static_cast<std::uint8_t>(r.failure);
            if (r.loss && any_loss) m.losses[c] = *r.loss;
        }
        // Masked cells stay zeroed: their failure/loss values carry no
        // information and normalizing them keeps round-trips exact.
        if (r.group && any_group && interacted) m.groups[c] = *r.group;
    }

    // Broadcast a single per-individual label across that individual's cells.
    if (any_group) {
        for (std::size_t j = 0; j < n; ++j) {
            std::set<std::string> seen_labels;
            for (std::size_t i = 0; i < k; ++i) {
                const auto& g = m.groups[m.cell(j, i)];
                if (!g.empty()) seen_labels.insert(g);
            }
            if (seen_labels.size() == 1) {
                for (std::size_t i = 0; i < k; ++i) m.groups[m.cell(j, i)] = *seen_labels.begin();
            }
        }
    }

    if (m.all_interactions()) m.mask.clear();
    return m;
}

std::vector<LongRecord> to_long_records(const OutcomeMatrix& matrix) {
    std::vector<LongRecord> records;
    for (std::size_t j = 0; j < matrix.n_individuals(); ++j) {
        for (std::size_t i = 0; i < matrix.n_deployments(); ++i) {
            if (!matrix.interacted(j, i)) continue;
            LongRecord r;
            r.individual_id = matrix.individual_ids[j];
            r.deployment_id = matrix.deployment_ids[i];
            const std::size_t c = matrix.cell(j, i);
            r.failure = matrix.failures[c];
            if (matrix.has_groups() && !matrix.groups[c].empty()) r.group = matrix.groups[c];
            if (matrix.has_losses()) r.loss = matrix.losses[c];
            records.push_back(std::move(r));
        }
    }
    return records;
}

namespace {

void add(ValidationReport& report, std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
}

}  // namespace

ValidationReport validate(const OutcomeMatrix& matrix) {
    ValidationReport report;
    const std::size_t n = matrix.n_individuals();
    const std::size_t k = matrix.n_deployments();
    const std::size_t cells = n * k;

    if (matrix.failures.size() != cells) {
        add(report, "shape", "failures table has " + std::to_string(matrix.failures.size()) +
                                 " cells, expected " + std::to_string(cells));
        return report;  // remaining checks assume a consistent shape
    }
    if (!matrix.mask.empty() && matrix.mask.size() != cells)
        add(report, "shape", "mask table does not match N*k");
    if (!matrix.groups.empty() && matrix.groups.size() != cells)
        add(report, "shape", "groups table does not match N*k");
    if (!matrix.losses.empty() && matrix.losses.size() != cells)
        add(report, "shape", "losses table does not match N*k");
    if (!report.ok()) return report;

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t c = matrix.cell(j, i);
            if (matrix.failures[c] > 1) {
                add(report, "nonbinary_failure",
                    "failure(" + matrix.individual_ids[j] + ", " + matrix.deployment_ids[i] +
                        ") is not in {0,1}");
            }
            if (!matrix.mask.empty() && matrix.mask[c] > 1) {
                add(report, "nonbinary_mask",
                    "mask(" + matrix.individual_ids[j] + ", " + matrix.deployment_ids[i] +
                        ") is not in {0,1}");
            }
            if (!matrix.losses.empty() && matrix.losses[c] < 0.0) {
                add(report, "negative_loss",
                    "negative loss at (" + matrix.individual_ids[j] + ", " +
                        matrix.deployment_ids[i] + ")");
            }
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < k; ++i) any = any || matrix.interacted(j, i);
        if (!any) {
            add(report, "no_interactions",
                "individual with no interactions: " + matrix.individual_ids[j]);
        }
    }

    // Group labels are either absent entirely or present on every unmasked
    // cell; partial labelling leaves group metrics ill-posed.
    if (matrix.has_groups()) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < k; ++i) {
                if (matrix.interacted(j, i) && matrix.groups[matrix.cell(j, i)].empty()) {
                    add(report, "missing_group",
                        "missing group label for (" + matrix.individual_ids[j] + ", " +
                            matrix.deployment_ids[i] + ")");
                }
            }
        }
    }

    return report;
}

}  // namespace homog
