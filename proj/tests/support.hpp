#pragma once
// Shared fixtures: the two toy scenarios, compact matrix builders, random
// matrix generators for property tests, and a synthetic German Credit file.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "homog/outcomes.hpp"
#include "homog/rng.hpp"

namespace support {

// Scenario 1: each person fails exactly one of the two models; groups pair
// one model-1 failure with one model-2 failure. OH = 0, group metrics = 1.
inline homog::OutcomeMatrix scenario1() {
    std::vector<homog::LongRecord> records;
    const auto add = [&records](const char* id, const char* group, int f1, int f2) {
        records.push_back({id, "model1", f1, std::string(group), {}, {}});
        records.push_back({id, "model2", f2, std::string(group), {}, {}});
    };
    add("alice", "group1", 1, 0);
    add("angelique", "group1", 0, 1);
    add("bob", "group2", 1, 0);
    add("bernardo", "group2", 0, 1);
    return homog::from_long_records(records);
}

// Scenario 2: alice and bob fail both models, the others fail none.
// OH = 2, all three group metrics = 1.
inline homog::OutcomeMatrix scenario2() {
    std::vector<homog::LongRecord> records;
    const auto add = [&records](const char* id, const char* group, int f1, int f2) {
        records.push_back({id, "model1", f1, std::string(group), {}, {}});
        records.push_back({id, "model2", f2, std::string(group), {}, {}});
    };
    add("alice", "group1", 1, 1);
    add("angelique", "group1", 0, 0);
    add("bob", "group2", 1, 1);
    add("bernardo", "group2", 0, 0);
    return homog::from_long_records(records);
}

inline std::string row_id(std::size_t j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "i%05zu", j);
    return buf;
}

// Dense builder with canonical ids; empty mask/groups/losses mean absent.
inline homog::OutcomeMatrix matrix_of(const std::vector<std::vector<int>>& failures,
                                      const std::vector<std::vector<int>>& mask = {},
                                      const std::vector<std::string>& row_groups = {},
                                      const std::vector<std::vector<double>>& losses = {}) {
    homog::OutcomeMatrix m;
    const std::size_t n = failures.size();
    const std::size_t k = failures.front().size();
    for (std::size_t j = 0; j < n; ++j) m.individual_ids.push_back(row_id(j));
    for (std::size_t i = 0; i < k; ++i) m.deployment_ids.push_back("d" + std::to_string(i));
    m.failures.resize(n * k);
    if (!mask.empty()) m.mask.resize(n * k);
    if (!row_groups.empty()) m.groups.resize(n * k);
    if (!losses.empty()) m.losses.resize(n * k);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            m.failures[j * k + i] = static_cast<std::uint8_t>(failures[j][i]);
            if (!mask.empty()) m.mask[j * k + i] = static_cast<std::uint8_t>(mask[j][i]);
            if (!row_groups.empty()) m.groups[j * k + i] = row_groups[j];
            if (!losses.empty()) m.losses[j * k + i] = losses[j][i];
        }
    }
    return m;
}

inline bool same_matrix(const homog::OutcomeMatrix& a, const homog::OutcomeMatrix& b) {
    return a.individual_ids == b.individual_ids && a.deployment_ids == b.deployment_ids &&
           a.failures == b.failures && a.mask == b.mask && a.groups == b.groups &&
           a.losses == b.losses;
}

// Random unmasked matrix; per-deployment failure probabilities in
// (0.1, 0.9). Optionally attaches 0-1 losses mirroring the failures and
// per-individual group labels.
inline homog::OutcomeMatrix random_unmasked_matrix(homog::rng::Engine& engine, std::size_t max_n,
                                                   std::size_t k, bool with_losses = false,
                                                   std::size_t group_count = 0) {
    const std::size_t n = 2 + engine.below(max_n - 1);
    homog::OutcomeMatrix m;
    for (std::size_t j = 0; j < n; ++j) m.individual_ids.push_back(row_id(j));
    for (std::size_t i = 0; i < k; ++i) m.deployment_ids.push_back("d" + std::to_string(i));
    std::vector<double> rates(k);
    for (double& r : rates) r = engine.uniform(0.1, 0.9);
    m.failures.resize(n * k);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            m.failures[j * k + i] = engine.bernoulli(rates[i]) ? 1 : 0;
        }
    }
    if (with_losses) {
        m.losses.resize(n * k);
        for (std::size_t c = 0; c < n * k; ++c) m.losses[c] = m.failures[c];
    }
    if (group_count > 0) {
        m.groups.resize(n * k);
        for (std::size_t j = 0; j < n; ++j) {
            const std::string label = "g" + std::to_string(engine.below(group_count));
            for (std::size_t i = 0; i < k; ++i) m.groups[j * k + i] = label;
        }
    }
    return m;
}

// Synthetic file in the German Credit .data layout: 1000 rows, 20
// attributes plus outcome code. The first row matches the canonical
// dataset's first record (credit amount 1169, outcome 1).
inline std::string german_credit_fixture() {
    const std::vector<std::vector<std::string>> codes = {
        {"A11", "A12", "A13", "A14"},                                  // 1 checking status
        {},                                                            // 2 duration (numeric)
        {"A30", "A31", "A32", "A33", "A34"},                           // 3 credit history
        {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"},  // 4 purpose
        {},                                                            // 5 amount (numeric)
        {"A61", "A62", "A63", "A64", "A65"},                           // 6 savings
        {"A71", "A72", "A73", "A74", "A75"},                           // 7 employment since
        {},                                                            // 8 installment rate
        {"A91", "A92", "A93", "A94"},                                  // 9 personal status
        {"A101", "A102", "A103"},                                      // 10 other debtors
        {},                                                            // 11 residence since
        {"A121", "A122", "A123", "A124"},                              // 12 property
        {},                                                            // 13 age
        {"A141", "A142", "A143"},                                      // 14 other plans
        {"A151", "A152", "A153"},                                      // 15 housing
        {},                                                            // 16 existing credits
        {"A171", "A172", "A173", "A174"},                              // 17 job
        {},                                                            // 18 people liable
        {"A191", "A192"},                                              // 19 telephone
        {"A201", "A202"},                                              // 20 foreign worker
    };

    std::ostringstream out;
    out << "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n";
    homog::rng::Engine engine(0xDEADBEEFu);
    for (std::size_t row = 1; row < 1000; ++row) {
        for (std::size_t attr = 0; attr < 20; ++attr) {
            if (attr > 0) out << ' ';
            if (codes[attr].empty()) {
                // Plausible numeric ranges per attribute.
                std::size_t value = 0;
                switch (attr + 1) {
                    case 2: value = 4 + engine.below(68); break;     // duration
                    case 5: value = 250 + engine.below(18000); break;  // amount
                    case 8: value = 1 + engine.below(4); break;
                    case 11: value = 1 + engine.below(4); break;
                    case 13: value = 19 + engine.below(57); break;   // age
                    case 16: value = 1 + engine.below(4); break;
                    case 18: value = 1 + engine.below(2); break;
                    default: value = 1; break;
                }
                out << value;
            } else {
                out << codes[attr][engine.below(codes[attr].size())];
            }
        }
        out << ' ' << (engine.bernoulli(0.3) ? 2 : 1) << "\n";
    }
    return out.str();
}

}  // namespace support
