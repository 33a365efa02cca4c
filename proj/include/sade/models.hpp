#pragma once

// Concrete model types behind sade::fit. Most callers only need learners.hpp.

#include <Eigen/Dense>

#include "sade/learners.hpp"

namespace sade {

// ---------------------------------------------------------------------------
// CART trees

enum class SplitCriterion { gini, variance };

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::variance;
    int max_depth = 0;  // 0 = unlimited
    int min_samples_split = 2;
    std::size_t max_features = 0;  // 0 = all features at every split
    int max_bins = 32;
    // Nodes with at most this many samples search exact thresholds; larger nodes search
    // histogram bin boundaries first and fall back to exact thresholds when no bin boundary
    // separates their samples.
    int exact_below = 32;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // weighted mean target of the training samples in the node
};

class Tree {
public:
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    int leaf_index(std::span<const double> x) const;
    int depth() const;
    std::size_t leaf_count() const;
};

/// Grows one tree. `weights` holds a non-negative integer multiplicity per row (empty = all 1);
/// rows with zero weight are ignored. `rng` is only used when max_features subsamples.
Tree grow_tree(const Dataset& data, std::span<const double> targets, std::span<const double> weights,
               const TreeParams& params, RandomStream* rng);

class TreeModel final : public TrainedModel {
public:
    TreeModel(LearnerMode mode, std::size_t features, std::size_t rows, Tree tree)
        : TrainedModel(mode, features, rows), tree_(std::move(tree)) {}
    const Tree& tree() const { return tree_; }
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override { return tree_.predict(x); }

private:
    Tree tree_;
};

class ForestModel final : public TrainedModel {
public:
    ForestModel(LearnerMode mode, std::size_t features, std::size_t rows, std::vector<Tree> trees)
        : TrainedModel(mode, features, rows), trees_(std::move(trees)) {}
    const std::vector<Tree>& trees() const { return trees_; }
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override;

private:
    std::vector<Tree> trees_;
};

/// Squared-loss (regression) or logistic-loss (classification) boosting of shallow trees.
class BoostingModel final : public TrainedModel {
public:
    BoostingModel(LearnerMode mode, std::size_t features, std::size_t rows, double base, double learning_rate,
                  std::vector<Tree> trees)
        : TrainedModel(mode, features, rows), base_(base), rate_(learning_rate), trees_(std::move(trees)) {}
    /// Additive score before the logistic link.
    double raw_margin(std::span<const double> x) const;
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override;

private:
    double base_;
    double rate_;
    std::vector<Tree> trees_;
};

// ---------------------------------------------------------------------------
// Linear and kernel models

class RidgeModel final : public TrainedModel {
public:
    RidgeModel(LearnerMode mode, std::size_t features, std::size_t rows, Eigen::VectorXd weights, double intercept)
        : TrainedModel(mode, features, rows), w_(std::move(weights)), b_(intercept) {}
    const Eigen::VectorXd& weights() const { return w_; }
    double intercept() const { return b_; }
    double decision_threshold() const override { return mode() == LearnerMode::classifier ? 0.0 : 0.5; }
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override;

private:
    Eigen::VectorXd w_;
    double b_;
};

class MlpModel final : public TrainedModel {
public:
    MlpModel(LearnerMode mode, std::size_t features, std::size_t rows, Eigen::MatrixXd w1, Eigen::VectorXd b1,
             Eigen::VectorXd w2, double b2, std::vector<double> loss_curve)
        : TrainedModel(mode, features, rows),
          w1_(std::move(w1)),
          b1_(std::move(b1)),
          w2_(std::move(w2)),
          b2_(b2),
          loss_curve_(std::move(loss_curve)) {}
    /// Training loss before the first update followed by the loss after each epoch.
    const std::vector<double>& loss_curve() const { return loss_curve_; }
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override;

private:
    Eigen::MatrixXd w1_;  // hidden x features
    Eigen::VectorXd b1_;
    Eigen::VectorXd w2_;
    double b2_;
    std::vector<double> loss_curve_;
};

/// Gaussian-process regression with a squared-exponential kernel. Targets are standardised
/// internally, so far from the data the mean reverts to the training mean.
class GprModel final : public TrainedModel {
public:
    GprModel(std::size_t features, std::size_t rows, Eigen::MatrixXd inputs, Eigen::VectorXd alpha,
             double length_scale, double signal_variance, double y_mean, double y_scale, double jitter)
        : TrainedModel(LearnerMode::regressor, features, rows),
          x_(std::move(inputs)),
          alpha_(std::move(alpha)),
          length_scale_(length_scale),
          signal_variance_(signal_variance),
          y_mean_(y_mean),
          y_scale_(y_scale),
          jitter_(jitter) {}
    double length_scale() const { return length_scale_; }
    double jitter() const { return jitter_; }
    std::string dump() const override;

protected:
    double raw_score(std::span<const double> x) const override;

private:
    Eigen::MatrixXd x_;  // rows x features
    Eigen::VectorXd alpha_;
    double length_scale_;
    double signal_variance_;
    double y_mean_;
    double y_scale_;
    double jitter_;
};

class CholeskyFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ModelPtr fit_ridge(const LearnerSpec& spec, const Dataset& data);
ModelPtr fit_decision_tree(const LearnerSpec& spec, const Dataset& data);
ModelPtr fit_random_forest(const LearnerSpec& spec, const Dataset& data, RandomStream& rng);
ModelPtr fit_gradient_boosting(const LearnerSpec& spec, const Dataset& data);
ModelPtr fit_mlp(const LearnerSpec& spec, const Dataset& data, RandomStream& rng);
ModelPtr fit_gpr(const LearnerSpec& spec, const Dataset& data);

}  // namespace sade
