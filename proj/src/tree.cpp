#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sade/models.hpp"

namespace sade {

namespace {

struct BinStat {
    double w = 0.0;
    double s = 0.0;
};

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    int bin = -1;  // >= 0 for histogram splits: rows with code <= bin go left
    double score = -std::numeric_limits<double>::infinity();
};

struct Pending {
    int node = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    int depth = 0;
    int hist = -1;  // histogram slot, -1 when not built
};

class Grower {
public:
    Grower(const Dataset& data, std::span<const double> targets, std::span<const double> weights,
           const TreeParams& params, RandomStream* rng)
        : data_(data), y_(targets), w_(weights), p_(params), rng_(rng), nf_(data.features()) {
        if (targets.size() != data.rows()) throw std::invalid_argument("grow_tree: target count mismatch");
        if (!weights.empty() && weights.size() != data.rows())
            throw std::invalid_argument("grow_tree: weight count mismatch");
        if (p_.max_bins < 2 || p_.max_bins > 256) throw std::invalid_argument("grow_tree: max_bins out of range");
        subset_ = p_.max_features > 0 && p_.max_features < nf_;
        if (subset_ && rng_ == nullptr) throw std::invalid_argument("grow_tree: feature subsampling needs a stream");
        bins_ = &data.binned(p_.max_bins);
        for (std::size_t r = 0; r < data.rows(); ++r)
            if (weight(r) > 0) idx_.push_back(r);
        if (idx_.empty()) throw std::invalid_argument("grow_tree: no rows with positive weight");
        order_.resize(nf_);
        std::iota(order_.begin(), order_.end(), 0);
    }

    Tree run() {
        Tree tree;
        tree.nodes.emplace_back();
        std::vector<Pending> stack;
        Pending root{0, 0, idx_.size(), 0, -1};
        if (wants_histogram(root)) {
            root.hist = acquire();
            build_histogram(root, hist(root.hist));
        }
        stack.push_back(root);
        while (!stack.empty()) {
            Pending n = stack.back();
            stack.pop_back();
            split_node(tree, n, stack);
        }
        return tree;
    }

private:
    double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }
    std::size_t bin_count(std::size_t f) const { return bins_->edges[f].size() + 1; }
    std::size_t stride() const { return static_cast<std::size_t>(p_.max_bins); }
    BinStat* hist(int slot) { return pool_[static_cast<std::size_t>(slot)].data(); }

    int acquire() {
        if (!free_.empty()) {
            const int s = free_.back();
            free_.pop_back();
            return s;
        }
        pool_.emplace_back(nf_ * stride());
        return static_cast<int>(pool_.size() - 1);
    }
    void release(int slot) {
        if (slot >= 0) free_.push_back(slot);
    }

    struct NodeStats {
        double w = 0.0;
        double s = 0.0;
        bool pure = true;
    };

    NodeStats stats(const Pending& n) const {
        NodeStats st;
        const double first = y_[idx_[n.begin]];
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const std::size_t r = idx_[i];
            const double w = weight(r);
            st.w += w;
            st.s += w * y_[r];
            if (y_[r] != first) st.pure = false;
        }
        return st;
    }

    bool splittable(const Pending& n, const NodeStats& st) const {
        if (st.pure) return false;
        if (p_.max_depth > 0 && n.depth >= p_.max_depth) return false;
        return n.end - n.begin >= static_cast<std::size_t>(std::max(2, p_.min_samples_split));
    }

    // Full-feature histograms are only kept (and subtracted) when every split considers
    // every feature; subset splits build the few histograms they need on the spot.
    bool wants_histogram(const Pending& n) const {
        if (subset_) return false;
        if (n.end - n.begin <= static_cast<std::size_t>(p_.exact_below)) return false;
        return splittable(n, stats(n));
    }

    void build_histogram(const Pending& n, BinStat* h) const {
        std::fill(h, h + nf_ * stride(), BinStat{});
        const std::uint8_t* codes = bins_->codes.data();
        const std::size_t b = stride();
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const std::size_t r = idx_[i];
            const double w = weight(r);
            const double ws = w * y_[r];
            const std::uint8_t* c = codes + r * nf_;
            for (std::size_t f = 0; f < nf_; ++f) {
                BinStat& cell = h[f * b + c[f]];
                cell.w += w;
                cell.s += ws;
            }
        }
    }

    void build_feature_histogram(const Pending& n, std::size_t f, BinStat* h) const {
        std::fill(h, h + stride(), BinStat{});
        const std::uint8_t* codes = bins_->codes.data();
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const std::size_t r = idx_[i];
            const double w = weight(r);
            BinStat& cell = h[codes[r * nf_ + f]];
            cell.w += w;
            cell.s += w * y_[r];
        }
    }

    double proxy(double wl, double sl, double wr, double sr) const {
        if (p_.criterion == SplitCriterion::variance) return sl * sl / wl + sr * sr / wr;
        const double nl = wl - sl;
        const double nr = wr - sr;
        return (sl * sl + nl * nl) / wl + (sr * sr + nr * nr) / wr;
    }

    void scan_histogram(std::size_t f, const BinStat* h, const NodeStats& st, Candidate& best) const {
        const std::size_t nb = bin_count(f);
        double wl = 0.0;
        double sl = 0.0;
        for (std::size_t b = 0; b + 1 < nb; ++b) {
            if (h[b].w == 0.0) continue;  // same partition as the previous boundary
            wl += h[b].w;
            sl += h[b].s;
            const double wr = st.w - wl;
            if (wl <= 0.0) continue;
            if (wr <= 0.0) break;
            const double sc = proxy(wl, sl, wr, st.s - sl);
            if (sc > best.score) {
                best.score = sc;
                best.feature = static_cast<int>(f);
                best.bin = static_cast<int>(b);
                best.threshold = bins_->edges[f][b];
            }
        }
    }

    void scan_exact(const Pending& n, std::size_t f, const NodeStats& st, Candidate& best) {
        scratch_.clear();
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const std::size_t r = idx_[i];
            scratch_.push_back({data_.row(r)[f], r});
        }
        std::sort(scratch_.begin(), scratch_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first || (a.first == b.first && a.second < b.second); });
        double wl = 0.0;
        double sl = 0.0;
        for (std::size_t k = 0; k + 1 < scratch_.size(); ++k) {
            const std::size_t r = scratch_[k].second;
            wl += weight(r);
            sl += weight(r) * y_[r];
            const double a = scratch_[k].first;
            const double b = scratch_[k + 1].first;
            if (!(a < b)) continue;
            const double sc = proxy(wl, sl, st.w - wl, st.s - sl);
            if (sc > best.score) {
                double t = a + (b - a) * 0.5;
                if (!(t < b)) t = a;
                best.score = sc;
                best.feature = static_cast<int>(f);
                best.bin = -1;
                best.threshold = t;
            }
        }
    }

    Candidate find_split(const Pending& n, const NodeStats& st) {
        Candidate best;
        const bool small = n.end - n.begin <= static_cast<std::size_t>(p_.exact_below);
        if (!subset_) {
            if (small) {
                for (std::size_t f = 0; f < nf_; ++f) scan_exact(n, f, st, best);
                return best;
            }
            const BinStat* h = hist(n.hist);
            for (std::size_t f = 0; f < nf_; ++f) scan_histogram(f, h + f * stride(), st, best);
            if (best.feature < 0)
                for (std::size_t f = 0; f < nf_; ++f) scan_exact(n, f, st, best);
            return best;
        }
        // Random feature order; keep looking past max_features until some valid split exists.
        for (std::size_t k = 0; k < nf_; ++k) std::swap(order_[k], order_[k + rng_->index(nf_ - k)]);
        if (feature_hist_.size() < stride()) feature_hist_.resize(stride());
        for (std::size_t k = 0; k < nf_; ++k) {
            if (k >= p_.max_features && best.feature >= 0) break;
            const std::size_t f = order_[k];
            if (small) {
                scan_exact(n, f, st, best);
            } else {
                build_feature_histogram(n, f, feature_hist_.data());
                Candidate c;
                scan_histogram(f, feature_hist_.data(), st, c);
                if (c.feature < 0) scan_exact(n, f, st, c);
                if (c.score > best.score) best = c;
            }
        }
        return best;
    }

    void split_node(Tree& tree, const Pending& n, std::vector<Pending>& stack) {
        const NodeStats st = stats(n);
        tree.nodes[static_cast<std::size_t>(n.node)].value = st.s / st.w;
        Candidate c;
        if (splittable(n, st)) c = find_split(n, st);
        if (c.feature < 0) {
            release(n.hist);
            return;
        }

        const auto f = static_cast<std::size_t>(c.feature);
        auto first = idx_.begin() + static_cast<std::ptrdiff_t>(n.begin);
        auto last = idx_.begin() + static_cast<std::ptrdiff_t>(n.end);
        std::vector<std::size_t>::iterator mid;
        if (c.bin >= 0) {
            const auto bin = static_cast<std::uint8_t>(c.bin);
            const std::uint8_t* codes = bins_->codes.data();
            mid = std::stable_partition(first, last, [&](std::size_t r) { return codes[r * nf_ + f] <= bin; });
        } else {
            mid = std::stable_partition(first, last, [&](std::size_t r) { return data_.row(r)[f] <= c.threshold; });
        }
        const std::size_t split = static_cast<std::size_t>(mid - idx_.begin());

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(n.node)];
        node.feature = c.feature;
        node.threshold = c.threshold;
        node.left = left_id;
        node.right = left_id + 1;

        Pending left{left_id, n.begin, split, n.depth + 1, -1};
        Pending right{left_id + 1, split, n.end, n.depth + 1, -1};
        const bool left_small = left.end - left.begin <= right.end - right.begin;
        Pending& smaller = left_small ? left : right;
        Pending& larger = left_small ? right : left;
        const bool need_small = wants_histogram(smaller);
        const bool need_large = wants_histogram(larger);

        if (need_large && n.hist >= 0) {
            smaller.hist = acquire();
            build_histogram(smaller, hist(smaller.hist));
            BinStat* hp = hist(n.hist);
            const BinStat* hs = hist(smaller.hist);
            for (std::size_t k = 0; k < nf_ * stride(); ++k) {
                hp[k].w -= hs[k].w;
                hp[k].s -= hs[k].s;
            }
            larger.hist = n.hist;
            if (!need_small) {
                release(smaller.hist);
                smaller.hist = -1;
            }
        } else {
            int spare = n.hist;
            if (need_large) {
                larger.hist = spare >= 0 ? spare : acquire();
                spare = -1;
                build_histogram(larger, hist(larger.hist));
            }
            if (need_small) {
                smaller.hist = spare >= 0 ? spare : acquire();
                spare = -1;
                build_histogram(smaller, hist(smaller.hist));
            }
            release(spare);
        }
        // right first so the left subtree is grown (and numbered) first
        stack.push_back(right);
        stack.push_back(left);
    }

    const Dataset& data_;
    std::span<const double> y_;
    std::span<const double> w_;
    TreeParams p_;
    RandomStream* rng_;
    std::size_t nf_;
    bool subset_ = false;
    const BinnedMatrix* bins_ = nullptr;
    std::vector<std::size_t> idx_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<BinStat>> pool_;
    std::vector<int> free_;
    std::vector<BinStat> feature_hist_;
    std::vector<std::pair<double, std::size_t>> scratch_;
};

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

TreeParams tree_params(const LearnerSpec& spec) {
    TreeParams p;
    p.criterion = spec.mode == LearnerMode::classifier ? SplitCriterion::gini : SplitCriterion::variance;
    p.max_depth = static_cast<int>(spec.param("max_depth"));
    p.min_samples_split = static_cast<int>(spec.param("min_samples_split"));
    p.max_bins = static_cast<int>(spec.param("max_bins"));
    p.exact_below = static_cast<int>(spec.param("exact_below"));
    return p;
}

void dump_tree(std::ostringstream& out, const Tree& t) {
    out << "tree " << t.nodes.size() << "\n";
    for (const auto& n : t.nodes) {
        if (n.feature < 0)
            out << "leaf " << n.value << "\n";
        else
            out << "split " << n.feature << " " << n.threshold << " " << n.left << " " << n.right << "\n";
    }
}

std::ostringstream dump_header(const TrainedModel& m, std::string_view kind) {
    std::ostringstream out;
    out.precision(17);
    out << "sade-model 1\nkind " << kind << "\nmode " << to_string(m.mode()) << "\nfeatures " << m.feature_count()
        << "\nrows " << m.training_row_count() << "\n";
    return out;
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
}

int Tree::leaf_index(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return i;
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

Tree grow_tree(const Dataset& data, std::span<const double> targets, std::span<const double> weights,
               const TreeParams& params, RandomStream* rng) {
    if (data.empty()) throw std::invalid_argument("grow_tree: empty dataset");
    return Grower(data, targets, weights, params, rng).run();
}

std::string TreeModel::dump() const {
    auto out = dump_header(*this, "decision_tree");
    dump_tree(out, tree_);
    return out.str();
}

double ForestModel::raw_score(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(x);
    return acc / static_cast<double>(trees_.size());
}

std::string ForestModel::dump() const {
    auto out = dump_header(*this, "random_forest");
    out << "trees " << trees_.size() << "\n";
    for (const auto& t : trees_) dump_tree(out, t);
    return out.str();
}

double BoostingModel::raw_margin(std::span<const double> x) const {
    check_features(x);
    double acc = base_;
    for (const auto& t : trees_) acc += rate_ * t.predict(x);
    return acc;
}

double BoostingModel::raw_score(std::span<const double> x) const {
    const double m = raw_margin(x);
    return mode() == LearnerMode::classifier ? sigmoid(m) : m;
}

std::string BoostingModel::dump() const {
    auto out = dump_header(*this, "gradient_boosting");
    out << "base " << base_ << "\nlearning_rate " << rate_ << "\ntrees " << trees_.size() << "\n";
    for (const auto& t : trees_) dump_tree(out, t);
    return out.str();
}

ModelPtr fit_decision_tree(const LearnerSpec& spec, const Dataset& data) {
    Tree t = grow_tree(data, data.targets(), {}, tree_params(spec), nullptr);
    return std::make_shared<TreeModel>(spec.mode, data.features(), data.rows(), std::move(t));
}

ModelPtr fit_random_forest(const LearnerSpec& spec, const Dataset& data, RandomStream& rng) {
    TreeParams p = tree_params(spec);
    const auto nf = data.features();
    const auto mf = static_cast<std::size_t>(spec.param("max_features"));
    if (mf > 0) {
        p.max_features = std::min(mf, nf);
    } else if (spec.mode == LearnerMode::classifier) {
        p.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(nf))));
    } else {
        p.max_features = std::max<std::size_t>(1, nf / 3);
    }
    const auto n_trees = static_cast<std::size_t>(spec.param("n_estimators"));
    const bool bootstrap = spec.param("bootstrap") != 0.0;
    const std::size_t n = data.rows();
    std::vector<Tree> trees;
    trees.reserve(n_trees);
    std::vector<double> weights;
    for (std::size_t k = 0; k < n_trees; ++k) {
        weights.clear();
        if (bootstrap) {
            weights.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) weights[rng.index(n)] += 1.0;
        }
        trees.push_back(grow_tree(data, data.targets(), weights, p, &rng));
    }
    return std::make_shared<ForestModel>(spec.mode, nf, n, std::move(trees));
}

ModelPtr fit_gradient_boosting(const LearnerSpec& spec, const Dataset& data) {
    TreeParams p = tree_params(spec);
    p.criterion = SplitCriterion::variance;
    const auto rounds = static_cast<std::size_t>(spec.param("n_rounds"));
    const double rate = spec.param("learning_rate");
    const std::size_t n = data.rows();
    const auto y = data.targets();
    const bool logistic = spec.mode == LearnerMode::classifier;

    double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    if (logistic) {
        const double pos = std::clamp(base, 1e-6, 1.0 - 1e-6);
        base = std::log(pos / (1.0 - pos));
    }
    std::vector<double> f(n, base);
    std::vector<double> residual(n);
    std::vector<Tree> trees;
    trees.reserve(rounds);
    for (std::size_t k = 0; k < rounds; ++k) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - (logistic ? sigmoid(f[i]) : f[i]);
        Tree t = grow_tree(data, residual, {}, p, nullptr);
        if (logistic) {
            // one Newton step per leaf for the log-loss
            std::vector<double> num(t.nodes.size(), 0.0);
            std::vector<double> den(t.nodes.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = static_cast<std::size_t>(t.leaf_index(data.row(i)));
                const double pr = sigmoid(f[i]);
                num[leaf] += residual[i];
                den[leaf] += pr * (1.0 - pr);
            }
            for (std::size_t j = 0; j < t.nodes.size(); ++j)
                if (t.nodes[j].feature < 0) t.nodes[j].value = num[j] / std::max(den[j], 1e-12);
        }
        for (std::size_t i = 0; i < n; ++i) f[i] += rate * t.predict(data.row(i));
        trees.push_back(std::move(t));
    }
    return std::make_shared<BoostingModel>(spec.mode, data.features(), n, base, rate, std::move(trees));
}

}  // namespace sade
