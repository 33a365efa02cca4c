#include "sade/surrogate.hpp"

namespace sade {

std::string_view to_string(Approach a) { return a == Approach::surface ? "surface" : "pairwise"; }
std::string_view to_string(Mapping m) { return m == Mapping::plain ? "plain" : "extended"; }

Approach parse_approach(std::string_view name) {
    if (name == "surface") return Approach::surface;
    if (name == "pairwise") return Approach::pairwise;
    throw std::invalid_argument("unknown approach '" + std::string(name) + "'");
}

Mapping parse_mapping(std::string_view name) {
    if (name == "plain") return Mapping::plain;
    if (name == "extended") return Mapping::extended;
    throw std::invalid_argument("unknown mapping '" + std::string(name) + "'");
}

int default_warmup(LearnerKind kind, Approach approach) {
    const bool r = approach == Approach::surface;
    switch (kind) {
        case LearnerKind::random_forest: return r ? 40 : 20;
        case LearnerKind::mlp: return r ? 30 : 2;
        case LearnerKind::ridge: return r ? 10 : 2;
        case LearnerKind::decision_tree: return r ? 30 : 4;
        case LearnerKind::gradient_boosting: return r ? 2 : 6;
        case LearnerKind::gpr: return 2;  // no tabulated value; GPR is surface-only
    }
    return 1;
}

SurrogateConfig SurrogateConfig::make(Approach approach, LearnerKind kind) {
    SurrogateConfig c;
    c.approach = approach;
    c.learner = LearnerSpec::make(kind, approach == Approach::surface ? LearnerMode::regressor : LearnerMode::classifier);
    c.warmup_generations = default_warmup(kind, approach);
    return c;
}

void SurrogateConfig::validate() const {
    learner.validate();
    if (approach == Approach::surface && learner.mode != LearnerMode::regressor)
        throw std::invalid_argument("surface surrogates need a regressor");
    if (approach == Approach::pairwise && learner.mode != LearnerMode::classifier)
        throw std::invalid_argument("pairwise surrogates need a classifier");
    if (warmup_generations < 1) throw std::invalid_argument("warm-up must be at least one generation");
    if (trail_size < 1) throw std::invalid_argument("trail size must be at least 1");
}

std::string SurrogateConfig::label() const { return learner.label(); }

int pairwise_label(double q_x, double q_y) { return q_y < q_x ? 1 : 0; }

Vector pairwise_map(std::span<const double> x, std::span<const double> y, Mapping mapping) {
    if (x.size() != y.size()) throw std::invalid_argument("pairwise_map: length mismatch");
    Vector out;
    out.reserve(x.size() * (mapping == Mapping::extended ? 3 : 2));
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    if (mapping == Mapping::extended)
        for (std::size_t i = 0; i < x.size(); ++i) out.push_back(x[i] - y[i]);
    return out;
}

bool in_warmup(int generation, const SurrogateConfig& cfg) {
    if (generation < 0) throw std::invalid_argument("in_warmup: negative generation");
    return generation < cfg.warmup_generations;
}

SurrogateModel::SurrogateModel(SurrogateConfig cfg, std::size_t dim)
    : cfg_(std::move(cfg)),
      dim_(dim),
      buffer_(cfg_.approach == Approach::surface ? dim : dim * (cfg_.mapping == Mapping::extended ? 3 : 2)) {
    cfg_.validate();
}

void SurrogateModel::ingest(const EvaluatedSolution& point) {
    if (point.x.size() != dim_) throw std::invalid_argument("surrogate: point has wrong dimension");
    if (cfg_.approach == Approach::surface) {
        buffer_.add(point.x, point.fitness);
        return;
    }
    for (const auto& p : trail_) {
        const int forward = pairwise_label(p.fitness, point.fitness);
        const int backward = pairwise_label(point.fitness, p.fitness);
        buffer_.add(pairwise_map(p.x, point.x, cfg_.mapping), forward);
        buffer_.add(pairwise_map(point.x, p.x, cfg_.mapping), backward);
        positives_ += static_cast<std::size_t>(forward + backward);
    }
    trail_.push_back(point);
    if (trail_.size() > cfg_.trail_size) trail_.pop_front();
}

bool SurrogateModel::retrain(RandomStream& rng) {
    const std::size_t n = buffer_.rows();
    if (n == 0) return false;
    if (cfg_.approach == Approach::pairwise && (positives_ == 0 || positives_ == n)) return false;
    // refitting a deterministic learner on an unchanged buffer reproduces the current model
    if (model_ && fitted_rows_ == n && cfg_.learner.deterministic()) return true;
    model_ = fit(cfg_.learner, buffer_, rng);
    fitted_rows_ = n;
    ++fits_;
    return true;
}

const TrainedModel& SurrogateModel::fitted() const {
    if (!model_) throw NotFitted("surrogate has no fitted model");
    return *model_;
}

double SurrogateModel::surface_estimate(std::span<const double> x) const {
    if (cfg_.approach != Approach::surface) throw std::logic_error("surface_estimate on a pairwise surrogate");
    return fitted().predict_value(x);
}

bool SurrogateModel::pairwise_estimate(std::span<const double> current, std::span<const double> challenger) const {
    if (cfg_.approach != Approach::pairwise) throw std::logic_error("pairwise_estimate on a surface surrogate");
    return fitted().predict_class(pairwise_map(current, challenger, cfg_.mapping)) == 1;
}

double SurrogateModel::pairwise_margin(std::span<const double> current, std::span<const double> challenger) const {
    if (cfg_.approach != Approach::pairwise) throw std::logic_error("pairwise_margin on a surface surrogate");
    return fitted().margin(pairwise_map(current, challenger, cfg_.mapping));
}

}  // namespace sade
