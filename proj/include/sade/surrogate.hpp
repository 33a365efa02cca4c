#pragma once

#include <deque>
#include <optional>

#include "sade/learners.hpp"

namespace sade {

enum class Approach { surface, pairwise };
enum class Mapping { plain, extended };

std::string_view to_string(Approach a);
std::string_view to_string(Mapping m);
Approach parse_approach(std::string_view name);
Mapping parse_mapping(std::string_view name);

/// Generations of unconditional evaluation before the filter is consulted, per learner and approach.
int default_warmup(LearnerKind kind, Approach approach);

struct SurrogateConfig {
    Approach approach = Approach::surface;
    LearnerSpec learner;
    int warmup_generations = 1;
    std::size_t trail_size = 45;
    Mapping mapping = Mapping::extended;

    /// Learner in the matching mode with its default warm-up.
    static SurrogateConfig make(Approach approach, LearnerKind kind);
    void validate() const;
    std::string label() const;
};

/// 1 iff q_y is strictly better than q_x.
int pairwise_label(double q_x, double q_y);

/// (x, y) for plain, (x, y, x - y) for extended.
Vector pairwise_map(std::span<const double> x, std::span<const double> y, Mapping mapping);

bool in_warmup(int generation, const SurrogateConfig& cfg);

class NotFitted : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Learner, training buffer and pairwise trail of one run.
class SurrogateModel {
public:
    SurrogateModel(SurrogateConfig cfg, std::size_t dim);

    /// Adds a truly evaluated point to the training buffer (and, for pairwise, to the trail).
    void ingest(const EvaluatedSolution& point);

    /// Refits on the whole buffer. Returns false and leaves the model in pass-through when the
    /// buffer is empty or a classifier buffer holds a single class.
    bool retrain(RandomStream& rng);

    /// True when a fitted model is available; otherwise callers accept every challenger.
    bool ready() const { return model_ != nullptr; }

    double surface_estimate(std::span<const double> x) const;
    /// Predicted "challenger improves current".
    bool pairwise_estimate(std::span<const double> current, std::span<const double> challenger) const;
    /// Classifier distance from the decision boundary for the pair.
    double pairwise_margin(std::span<const double> current, std::span<const double> challenger) const;

    const SurrogateConfig& config() const { return cfg_; }
    std::size_t dim() const { return dim_; }
    const Dataset& buffer() const { return buffer_; }
    std::size_t buffer_rows() const { return buffer_.rows(); }
    std::size_t trail_length() const { return trail_.size(); }
    std::size_t fit_count() const { return fits_; }
    const ModelPtr& model() const { return model_; }

private:
    const TrainedModel& fitted() const;

    SurrogateConfig cfg_;
    std::size_t dim_;
    Dataset buffer_;
    std::deque<EvaluatedSolution> trail_;
    ModelPtr model_;
    std::size_t fitted_rows_ = 0;
    std::size_t fits_ = 0;
    std::size_t positives_ = 0;
};

}  // namespace sade
