#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace kdlab {

struct ArmResult {
    std::string arm;
    std::uint64_t seed = 0;
    double best_acc = 0.0;
    double final_acc = 0.0;
    int epochs = 0;
    bool skipped = false;
    std::string error;
};

struct PredicateResult {
    std::string name;
    std::uint64_t seed = 0;
    bool value = false;
};

struct ComparisonResult {
    std::string name;
    std::uint64_t seed = 0;
    double mean_kl = -1.0;    // -1 when not populated
    double mean_peaks = -1.0;
};

struct ExperimentReport {
    std::string run_id;
    std::vector<std::uint64_t> seeds;
    std::string dataset_desc;
    std::vector<ArmResult> arms;
    std::vector<PredicateResult> predicates;
    std::vector<ComparisonResult> comparisons;
    double wall_seconds = 0.0;
    nlohmann::ordered_json config_snapshot;

    const ArmResult* find_arm(const std::string& arm, std::uint64_t seed) const;
    const ComparisonResult* find_comparison(const std::string& name,
                                            std::uint64_t seed) const;
};

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

// One row per (seed, arm); header always present.
std::string report_to_csv(const ExperimentReport& report);

enum class ReportFormat { json, csv };

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::string& path);

}  // namespace kdlab
