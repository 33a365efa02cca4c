#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sade/experiment.hpp"
#include "sade/stats.hpp"
#include "sade/table.hpp"

namespace sade {

enum class ReportKind { ranking, stats, delta_e, confusion, zeta, heatmap };
std::string_view to_string(ReportKind k);
ReportKind parse_report_kind(std::string_view name);
inline constexpr ReportKind kAllReports[] = {ReportKind::ranking,   ReportKind::stats, ReportKind::delta_e,
                                             ReportKind::confusion, ReportKind::zeta,  ReportKind::heatmap};

struct ReportOptions {
    std::string baseline;  // delta_e reference; empty picks the first plain DE configuration
    int zeta_window = 40;
    double alpha = 0.05;
};

/// A result store with its manifest and configuration table loaded.
struct StoreView {
    ResultStore store;
    std::vector<ManifestRow> manifest;
    std::vector<ConfigRow> configs;
    std::vector<std::string> functions;  // manifest order

    static StoreView open(const std::filesystem::path& root);
    const ConfigRow& config(const std::string& label) const;
    /// Final best values of the completed runs of one cell, in run order.
    std::vector<double> finals(const std::string& function, const std::string& label) const;
    /// Completed run indices of one cell.
    std::vector<std::size_t> runs(const std::string& function, const std::string& label) const;
};

/// Median final fitness per (function, configuration); throws when a cell has no completed run.
ResultMatrix median_matrix(const StoreView& view, const std::vector<std::string>& labels);
std::vector<std::string> labels_of(const StoreView& view);

/// position, config, mean_rank; ascending.
Table ranking_table(const StoreView& view);
/// Friedman over all configurations, then Wilcoxon of the best-ranked configuration against each
/// other one with Holm-adjusted p-values and a significance mark.
Table stats_table(const StoreView& view, const ReportOptions& opts);
/// One row per (function, configuration, run) against the baseline run with the same index.
Table delta_e_table(const StoreView& view, const ReportOptions& opts);
/// Mean and median delta-e ratio per configuration.
Table delta_e_summary(const Table& per_run);
/// Shadow runs only: counts and rates per (configuration, generation), summed over functions and runs.
Table confusion_table(const StoreView& view);
Table zeta_table(const StoreView& view, const ReportOptions& opts);
/// Mean rank per (learner, strategy) cell.
Table heatmap_table(const StoreView& view);

/// Writes <store>/reports/<kind>.csv (delta_e adds delta_e_summary.csv); returns the written paths.
std::vector<std::filesystem::path> write_report(const StoreView& view, ReportKind kind, const ReportOptions& opts);

}  // namespace sade
