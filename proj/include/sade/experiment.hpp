#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sade/optimizer.hpp"

namespace sade {

inline constexpr int kConfigSchema = 1;

enum class Method { de, kriging_offline };
std::string_view to_string(Method m);

/// One column of the experiment matrix.
struct ConfigEntry {
    std::string label;
    Method method = Method::de;
    std::optional<SurrogateConfig> surrogate;
    StrategyFlags flags;
    bool shadow = false;
    std::optional<std::int64_t> budget_multiplier;  // overrides the experiment value
    std::optional<int> no_improvement_limit;
    std::int64_t kriging_allowance = 60000;  // surrogate evaluations for the offline inner search

    /// Filesystem-safe form of the label.
    std::string slug() const;
    /// Learner label for the heat-map rows ("DE" without a surrogate).
    std::string learner_label() const;
};

/// External program registered as an extra problem.
struct BlackBoxEntry {
    std::string id;
    BlackBoxSpec spec;
    Bounds bounds;
};

struct ExperimentConfig {
    std::size_t dimension = 50;
    std::uint64_t suite_seed = 2024;
    bool include_suite = true;
    std::vector<std::string> functions;  // suite ids; empty selects the whole suite
    std::vector<BlackBoxEntry> blackboxes;
    std::size_t repetitions = 15;
    std::uint64_t base_seed = 1;
    std::int64_t budget_multiplier = 15;
    int no_improvement_limit = 50;
    std::size_t pop_size = 15;
    double F = 0.5;
    double CR = 0.5;
    std::string output = "results";
    std::size_t workers = 1;
    std::vector<ConfigEntry> configs;

    void validate() const;
    DEConfig de_config(const ConfigEntry& entry) const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// INI text: an [experiment] section plus one [config <label>] section per column and optional
/// [blackbox <id>] sections. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct NamedProblem {
    std::string id;
    Problem problem;
};

/// Suite functions (in the configured order) followed by the black-box problems.
std::vector<NamedProblem> resolve_problems(const ExperimentConfig& cfg);

/// Offline Kriging baseline: budget - 1 Latin-hypercube evaluations, one GPR fit, plain DE on the
/// predictive mean with `allowance` model calls, and one true evaluation of the final solution.
RunRecord run_kriging_offline(const DEConfig& cfg, const Problem& problem, RngStreams& streams,
                              const LearnerSpec& learner, std::int64_t allowance);

// ---------------------------------------------------------------------------
// Result store

struct ManifestRow {
    std::string function;
    std::string config;
    std::size_t run = 0;
    bool ok = false;
    double best = 0.0;
    std::int64_t evaluations = 0;
    std::size_t generations = 0;
    std::string termination;
    std::string message;
};

struct ConfigRow {
    std::string label;
    std::string slug;
    std::string method;
    std::string learner;
    std::string strategy;
    bool shadow = false;
};

/// Directory of plain CSV files: runs/<function>/<slug>/run_<k>.{curve,gens,info}.csv,
/// manifest.csv, configs.csv and summary.csv.
class ResultStore {
public:
    explicit ResultStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    bool has_run(const std::string& function, const std::string& slug, std::size_t run) const;
    void save_run(const std::string& function, const std::string& slug, std::size_t run, const RunRecord& r) const;
    RunRecord load_run(const std::string& function, const std::string& slug, std::size_t run) const;

    void write_manifest(const std::vector<ManifestRow>& rows) const;
    std::vector<ManifestRow> read_manifest() const;
    void write_configs(const std::vector<ConfigRow>& rows) const;
    std::vector<ConfigRow> read_configs() const;
    void write_summary(const std::vector<ManifestRow>& rows, const std::vector<ConfigRow>& configs) const;

private:
    std::filesystem::path run_base(const std::string& function, const std::string& slug, std::size_t run) const;
    std::filesystem::path root_;
};

struct ExperimentOutcome {
    std::size_t computed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

struct RunOptions {
    bool skip_existing = false;
    bool force_shadow = false;
    std::ostream* progress = nullptr;
};

/// Runs the whole (function x config x repetition) matrix. Repetition k of every configuration
/// uses the streams of run index k, so initial populations are shared across configurations.
/// Failed runs are recorded in the manifest and the remaining runs proceed.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace sade
