#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sade/models.hpp"

namespace sade {

namespace {

constexpr std::size_t kEdgeSample = 4096;

const std::map<LearnerKind, std::map<std::string, double>>& all_defaults() {
    static const std::map<LearnerKind, std::map<std::string, double>> table{
        {LearnerKind::ridge, {{"alpha", 1.0}, {"fit_intercept", 1.0}}},
        {LearnerKind::decision_tree,
         {{"max_depth", 0.0}, {"min_samples_split", 2.0}, {"max_bins", 32.0}, {"exact_below", 8.0}}},
        {LearnerKind::random_forest,
         {{"n_estimators", 40.0},
          {"bootstrap", 1.0},
          {"max_features", 0.0},  // 0 = sqrt(F) for classifiers, F/3 for regressors
          {"max_depth", 0.0},
          {"min_samples_split", 2.0},
          {"max_bins", 32.0},
          {"exact_below", 8.0}}},
        {LearnerKind::gradient_boosting,
         {{"n_rounds", 50.0},
          {"learning_rate", 0.3},
          {"max_depth", 3.0},
          {"min_samples_split", 2.0},
          {"max_bins", 32.0},
          {"exact_below", 8.0}}},
        {LearnerKind::mlp,
         {{"hidden", 100.0}, {"learning_rate", 0.01}, {"epochs", 20.0}, {"batch_size", 200.0}, {"alpha", 1e-4}}},
        {LearnerKind::gpr,
         {{"length_scale", 1.0}, {"signal_variance", 1.0}, {"jitter", 1e-10}, {"optimize_length_scale", 0.0}}},
    };
    return table;
}

// Smallest prefix length the bin edges are computed from. It only changes when the row
// count doubles, so large datasets reuse their edges and only code the appended rows.
std::size_t edge_prefix(std::size_t rows) {
    if (rows <= kEdgeSample) return rows;
    std::size_t p = kEdgeSample;
    while (p * 2 <= rows) p *= 2;
    return p;
}

std::vector<double> quantile_edges(std::vector<double> sample, int max_bins) {
    std::sort(sample.begin(), sample.end());
    std::vector<double> distinct;
    for (double v : sample)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    std::vector<double> edges;
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
        edges.assign(distinct.begin(), distinct.end());
        if (!edges.empty()) edges.pop_back();
        return edges;
    }
    const std::size_t m = sample.size();
    for (int b = 1; b < max_bins; ++b) {
        const double e = sample[(static_cast<std::size_t>(b) * m) / static_cast<std::size_t>(max_bins) - 1];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    if (!edges.empty() && edges.back() >= distinct.back()) edges.pop_back();
    return edges;
}

}  // namespace

LearnerKind parse_learner_kind(std::string_view name) {
    if (name == "ridge") return LearnerKind::ridge;
    if (name == "decision_tree" || name == "dt") return LearnerKind::decision_tree;
    if (name == "random_forest" || name == "rf") return LearnerKind::random_forest;
    if (name == "gradient_boosting" || name == "xgboost" || name == "gb") return LearnerKind::gradient_boosting;
    if (name == "mlp") return LearnerKind::mlp;
    if (name == "gpr" || name == "kriging") return LearnerKind::gpr;
    throw std::invalid_argument("unknown learner '" + std::string(name) + "'");
}

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::ridge: return "ridge";
        case LearnerKind::decision_tree: return "decision_tree";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::gradient_boosting: return "gradient_boosting";
        case LearnerKind::mlp: return "mlp";
        case LearnerKind::gpr: return "gpr";
    }
    return "unknown";
}

std::string_view to_string(LearnerMode mode) { return mode == LearnerMode::regressor ? "regressor" : "classifier"; }

const std::map<std::string, double>& default_hyperparameters(LearnerKind kind) { return all_defaults().at(kind); }

LearnerSpec LearnerSpec::make(LearnerKind kind, LearnerMode mode) {
    LearnerSpec s;
    s.kind = kind;
    s.mode = mode;
    return s;
}

double LearnerSpec::param(const std::string& name) const {
    if (auto it = hyper.find(name); it != hyper.end()) return it->second;
    const auto& d = default_hyperparameters(kind);
    if (auto it = d.find(name); it != d.end()) return it->second;
    throw std::invalid_argument(label() + ": unknown hyperparameter '" + name + "'");
}

void LearnerSpec::validate() const {
    if (kind == LearnerKind::gpr && mode != LearnerMode::regressor)
        throw std::invalid_argument("gpr supports regressor mode only");
    const auto& d = default_hyperparameters(kind);
    for (const auto& [k, v] : hyper) {
        if (!d.contains(k)) throw std::invalid_argument(label() + ": unknown hyperparameter '" + k + "'");
        if (!std::isfinite(v)) throw std::invalid_argument(label() + ": hyperparameter '" + k + "' is not finite");
    }
    auto positive = [&](const char* name) {
        if (!(param(name) > 0)) throw std::invalid_argument(label() + ": '" + name + "' must be positive");
    };
    auto non_negative = [&](const char* name) {
        if (param(name) < 0) throw std::invalid_argument(label() + ": '" + name + "' must be non-negative");
    };
    switch (kind) {
        case LearnerKind::ridge: non_negative("alpha"); break;
        case LearnerKind::random_forest: positive("n_estimators"); non_negative("max_features"); [[fallthrough]];
        case LearnerKind::decision_tree:
        case LearnerKind::gradient_boosting:
            non_negative("max_depth");
            if (param("min_samples_split") < 2) throw std::invalid_argument(label() + ": min_samples_split < 2");
            if (param("max_bins") < 2 || param("max_bins") > 256)
                throw std::invalid_argument(label() + ": max_bins must be in [2, 256]");
            non_negative("exact_below");
            if (kind == LearnerKind::gradient_boosting) {
                positive("n_rounds");
                positive("learning_rate");
            }
            break;
        case LearnerKind::mlp:
            positive("hidden");
            positive("learning_rate");
            positive("epochs");
            positive("batch_size");
            non_negative("alpha");
            break;
        case LearnerKind::gpr:
            positive("length_scale");
            positive("signal_variance");
            non_negative("jitter");
            break;
    }
}

bool LearnerSpec::deterministic() const {
    switch (kind) {
        case LearnerKind::ridge:
        case LearnerKind::decision_tree:
        case LearnerKind::gradient_boosting:
        case LearnerKind::gpr: return true;
        case LearnerKind::random_forest:
        case LearnerKind::mlp: return false;
    }
    return false;
}

std::string LearnerSpec::label() const {
    std::string name;
    switch (kind) {
        case LearnerKind::ridge: name = "Ridge"; break;
        case LearnerKind::decision_tree: name = "DT"; break;
        case LearnerKind::random_forest: name = "RF"; break;
        case LearnerKind::gradient_boosting: name = "GB"; break;
        case LearnerKind::mlp: name = "MLP"; break;
        case LearnerKind::gpr: name = "GPR"; break;
    }
    return name + (mode == LearnerMode::regressor ? "/R" : "/C");
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::size_t feature_count) : features_(feature_count) {
    if (feature_count == 0) throw std::invalid_argument("dataset needs at least one feature");
}
Dataset::Dataset(const Dataset& other) : features_(other.features_), values_(other.values_), targets_(other.targets_) {}
Dataset& Dataset::operator=(const Dataset& other) {
    if (this != &other) {
        features_ = other.features_;
        values_ = other.values_;
        targets_ = other.targets_;
        bins_.reset();
    }
    return *this;
}
Dataset::Dataset(Dataset&&) noexcept = default;
Dataset& Dataset::operator=(Dataset&&) noexcept = default;
Dataset::~Dataset() = default;

void Dataset::add(std::span<const double> row, double target) {
    if (row.size() != features_)
        throw std::invalid_argument("dataset row has " + std::to_string(row.size()) + " features, expected " +
                                    std::to_string(features_));
    values_.insert(values_.end(), row.begin(), row.end());
    targets_.push_back(target);
}

void Dataset::reserve(std::size_t rows) {
    values_.reserve(rows * features_);
    targets_.reserve(rows);
}

const BinnedMatrix& Dataset::binned(int max_bins) const {
    const std::size_t n = rows();
    const std::size_t prefix = edge_prefix(n);
    if (!bins_ || bins_->max_bins != max_bins || bins_->edge_rows != prefix || bins_->rows > n) {
        auto b = std::make_unique<BinnedMatrix>();
        b->max_bins = max_bins;
        b->edge_rows = prefix;
        b->features = features_;
        b->edges.resize(features_);
        const std::size_t stride = std::max<std::size_t>(1, prefix / kEdgeSample);
        std::vector<double> sample;
        for (std::size_t f = 0; f < features_; ++f) {
            sample.clear();
            for (std::size_t r = 0; r < prefix; r += stride) sample.push_back(values_[r * features_ + f]);
            b->edges[f] = quantile_edges(sample, max_bins);
        }
        bins_ = std::move(b);
    }
    auto& b = *bins_;
    b.codes.resize(n * features_);
    for (std::size_t r = b.rows; r < n; ++r) {
        const double* x = values_.data() + r * features_;
        std::uint8_t* c = b.codes.data() + r * features_;
        for (std::size_t f = 0; f < features_; ++f) {
            const auto& e = b.edges[f];
            c[f] = static_cast<std::uint8_t>(std::lower_bound(e.begin(), e.end(), x[f]) - e.begin());
        }
    }
    b.rows = n;
    return b;
}

// ---------------------------------------------------------------------------

void TrainedModel::check_features(std::span<const double> x) const {
    if (x.size() != features_)
        throw std::invalid_argument("model expects " + std::to_string(features_) + " features, got " +
                                    std::to_string(x.size()));
}

double TrainedModel::score(std::span<const double> x) const {
    check_features(x);
    return raw_score(x);
}

double TrainedModel::predict_value(std::span<const double> x) const {
    if (mode_ != LearnerMode::regressor) throw std::logic_error("predict_value called on a classifier");
    return score(x);
}

int TrainedModel::predict_class(std::span<const double> x) const {
    if (mode_ != LearnerMode::classifier) throw std::logic_error("predict_class called on a regressor");
    return score(x) > decision_threshold() ? 1 : 0;
}

double TrainedModel::margin(std::span<const double> x) const { return std::abs(score(x) - decision_threshold()); }

ModelPtr fit(const LearnerSpec& spec, const Dataset& data, RandomStream& rng) {
    spec.validate();
    if (data.empty()) throw std::invalid_argument(spec.label() + ": cannot fit an empty dataset");
    if (spec.mode == LearnerMode::classifier)
        for (double t : data.targets())
            if (t != 0.0 && t != 1.0) throw std::invalid_argument(spec.label() + ": classifier targets must be 0 or 1");
    switch (spec.kind) {
        case LearnerKind::ridge: return fit_ridge(spec, data);
        case LearnerKind::decision_tree: return fit_decision_tree(spec, data);
        case LearnerKind::random_forest: return fit_random_forest(spec, data, rng);
        case LearnerKind::gradient_boosting: return fit_gradient_boosting(spec, data);
        case LearnerKind::mlp: return fit_mlp(spec, data, rng);
        case LearnerKind::gpr: return fit_gpr(spec, data);
    }
    throw std::invalid_argument("unknown learner kind");
}

std::vector<Vector> latin_hypercube_sample(std::size_t n, const Bounds& bounds, RandomStream& rng) {
    if (n == 0) throw std::invalid_argument("latin_hypercube_sample: n must be positive");
    bounds.validate();
    const std::size_t d = bounds.dim();
    std::vector<Vector> points(n, Vector(d));
    std::vector<std::size_t> strata(n);
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) strata[i] = i;
        rng.shuffle(strata);
        const double lo = bounds.lower[j];
        const double w = bounds.width(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = static_cast<double>(strata[i]);
            const double cell_lo = lo + w * (s / dn);
            const double cell_hi = lo + w * ((s + 1.0) / dn);
            double v = cell_lo + (cell_hi - cell_lo) * rng.uniform();
            // keep rounding from pushing the point into the next stratum
            if (v >= cell_hi && cell_hi > cell_lo) v = std::nextafter(cell_hi, cell_lo);
            points[i][j] = v;
        }
    }
    return points;
}

}  // namespace sade
