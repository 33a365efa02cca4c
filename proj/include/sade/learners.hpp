#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sade/core.hpp"
#include "sade/rng.hpp"

namespace sade {

enum class LearnerKind { ridge, decision_tree, random_forest, gradient_boosting, mlp, gpr };
enum class LearnerMode { regressor, classifier };

LearnerKind parse_learner_kind(std::string_view name);
std::string_view to_string(LearnerKind kind);
std::string_view to_string(LearnerMode mode);

/// Learner kind, mode and hyperparameter overrides. Unset hyperparameters take the
/// documented defaults (see README).
struct LearnerSpec {
    LearnerKind kind = LearnerKind::ridge;
    LearnerMode mode = LearnerMode::regressor;
    std::map<std::string, double> hyper;

    static LearnerSpec make(LearnerKind kind, LearnerMode mode);

    double param(const std::string& name) const;
    void validate() const;
    /// True when refitting on identical data always yields the identical model.
    bool deterministic() const;
    /// Short label such as "DT/C" or "Ridge/R".
    std::string label() const;
};

/// Names of the hyperparameters accepted by a learner kind, with defaults.
const std::map<std::string, double>& default_hyperparameters(LearnerKind kind);

struct BinnedMatrix;

/// Append-only supervised dataset with row-major feature storage.
class Dataset {
public:
    explicit Dataset(std::size_t feature_count);
    Dataset(const Dataset& other);
    Dataset& operator=(const Dataset& other);
    Dataset(Dataset&&) noexcept;
    Dataset& operator=(Dataset&&) noexcept;
    ~Dataset();

    void add(std::span<const double> row, double target);
    void reserve(std::size_t rows);

    std::size_t rows() const { return targets_.size(); }
    std::size_t features() const { return features_; }
    bool empty() const { return targets_.empty(); }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * features_, features_}; }
    double target(std::size_t i) const { return targets_[i]; }
    std::span<const double> targets() const { return targets_; }
    std::span<const double> values() const { return values_; }

    /// Quantile-binned codes of the features, maintained incrementally across appends.
    /// Bin edges depend only on the dataset contents.
    const BinnedMatrix& binned(int max_bins) const;

private:
    std::size_t features_;
    std::vector<double> values_;
    std::vector<double> targets_;
    mutable std::unique_ptr<BinnedMatrix> bins_;
};

struct BinnedMatrix {
    int max_bins = 0;
    std::size_t edge_rows = 0;  // size of the prefix the edges were computed from
    std::size_t rows = 0;       // rows coded so far
    std::size_t features = 0;
    std::vector<std::vector<double>> edges;  // per feature, ascending; value <= edges[b] -> code <= b
    std::vector<std::uint8_t> codes;         // row-major rows x features
};

/// A fitted, immutable model.
class TrainedModel {
public:
    TrainedModel(LearnerMode mode, std::size_t feature_count, std::size_t training_rows)
        : mode_(mode), features_(feature_count), training_rows_(training_rows) {}
    virtual ~TrainedModel() = default;

    LearnerMode mode() const { return mode_; }
    std::size_t feature_count() const { return features_; }
    std::size_t training_row_count() const { return training_rows_; }

    /// Regression value, or the classifier's internal score (probability of class 1,
    /// decision value for ridge).
    double score(std::span<const double> x) const;
    double predict_value(std::span<const double> x) const;
    int predict_class(std::span<const double> x) const;
    /// Distance of the score from the class boundary.
    double margin(std::span<const double> x) const;

    /// Score at which predict_class switches from 0 to 1 (exclusive).
    virtual double decision_threshold() const { return 0.5; }
    /// Versioned, self-describing text dump for debugging.
    virtual std::string dump() const = 0;

protected:
    virtual double raw_score(std::span<const double> x) const = 0;
    void check_features(std::span<const double> x) const;

private:
    LearnerMode mode_;
    std::size_t features_;
    std::size_t training_rows_;
};

using ModelPtr = std::shared_ptr<const TrainedModel>;

/// Fits the learner. Stochastic learners draw only from `rng`.
ModelPtr fit(const LearnerSpec& spec, const Dataset& data, RandomStream& rng);

/// n points; in every dimension each of the n equal-width strata holds exactly one point.
std::vector<Vector> latin_hypercube_sample(std::size_t n, const Bounds& bounds, RandomStream& rng);

}  // namespace sade
