#include <cmath>
#include <numeric>
#include <sstream>

#include "sade/models.hpp"

namespace sade {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double stable_sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct Params {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
};

struct Adam {
    double rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    Params m;
    Params v;

    void update(Params& p, const Params& g) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        const double lr = rate * std::sqrt(c2) / c1;
        auto apply = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
            mom = beta1 * mom + (1.0 - beta1) * grad;
            vel = beta2 * vel.array() + (1.0 - beta2) * grad.array().square();
            param.array() -= lr * mom.array() / (vel.array().sqrt() + eps);
        };
        apply(p.w1, m.w1, v.w1, g.w1);
        apply(p.b1, m.b1, v.b1, g.b1);
        apply(p.w2, m.w2, v.w2, g.w2);
        m.b2 = beta1 * m.b2 + (1.0 - beta1) * g.b2;
        v.b2 = beta2 * v.b2 + (1.0 - beta2) * g.b2 * g.b2;
        p.b2 -= lr * m.b2 / (std::sqrt(v.b2) + eps);
    }
};

double output_loss(double out, double y, bool logistic) {
    if (!logistic) return 0.5 * (out - y) * (out - y);
    // log-loss on the logit, written to avoid overflow
    return std::max(out, 0.0) - out * y + std::log1p(std::exp(-std::abs(out)));
}

double total_loss(const Params& p, const RowMatrix& x, const Eigen::VectorXd& y, bool logistic, double alpha) {
    const Eigen::MatrixXd h = ((p.w1 * x.transpose()).colwise() + p.b1).cwiseMax(0.0);
    const Eigen::VectorXd out = (h.transpose() * p.w2).array() + p.b2;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) loss += output_loss(out[i], y[i], logistic);
    const double n = static_cast<double>(y.size());
    return loss / n + 0.5 * alpha * (p.w1.squaredNorm() + p.w2.squaredNorm()) / n;
}

}  // namespace

double MlpModel::raw_score(std::span<const double> x) const {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd h = (w1_ * v + b1_).cwiseMax(0.0);
    const double out = w2_.dot(h) + b2_;
    return mode() == LearnerMode::classifier ? stable_sigmoid(out) : out;
}

std::string MlpModel::dump() const {
    std::ostringstream out;
    out.precision(17);
    out << "sade-model 1\nkind mlp\nmode " << to_string(mode()) << "\nfeatures " << feature_count() << "\nrows "
        << training_row_count() << "\nhidden " << w1_.rows() << "\nb2 " << b2_ << "\nw2";
    for (Eigen::Index i = 0; i < w2_.size(); ++i) out << ' ' << w2_[i];
    out << "\nb1";
    for (Eigen::Index i = 0; i < b1_.size(); ++i) out << ' ' << b1_[i];
    out << "\nw1\n";
    for (Eigen::Index r = 0; r < w1_.rows(); ++r) {
        for (Eigen::Index c = 0; c < w1_.cols(); ++c) out << (c ? " " : "") << w1_(r, c);
        out << "\n";
    }
    return out.str();
}

ModelPtr fit_mlp(const LearnerSpec& spec, const Dataset& data, RandomStream& rng) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto f = static_cast<Eigen::Index>(data.features());
    const auto hidden = static_cast<Eigen::Index>(spec.param("hidden"));
    const auto epochs = static_cast<int>(spec.param("epochs"));
    const auto batch = std::min<Eigen::Index>(static_cast<Eigen::Index>(spec.param("batch_size")), n);
    const double alpha = spec.param("alpha");
    const bool logistic = spec.mode == LearnerMode::classifier;

    const RowMatrix x = Eigen::Map<const RowMatrix>(data.values().data(), n, f);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = data.target(static_cast<std::size_t>(i));

    // Glorot-uniform initialisation
    Params p;
    auto glorot = [&](Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Eigen::Index fan_out) {
        const double bound = std::sqrt((logistic ? 2.0 : 6.0) / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    p.w1 = glorot(hidden, f, f, hidden);
    p.b1 = glorot(hidden, 1, f, hidden).col(0);
    p.w2 = glorot(hidden, 1, hidden, 1).col(0);
    p.b2 = glorot(1, 1, hidden, 1)(0, 0);

    Adam adam;
    adam.rate = spec.param("learning_rate");
    adam.m = {Eigen::MatrixXd::Zero(hidden, f), Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden), 0.0};
    adam.v = adam.m;

    std::vector<double> curve{total_loss(p, x, y, logistic, alpha)};
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Params last_good = p;
    Params g = adam.m;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index b = std::min(batch, n - start);
            RowMatrix xb(b, f);
            Eigen::VectorXd yb(b);
            for (Eigen::Index k = 0; k < b; ++k) {
                const auto r = static_cast<Eigen::Index>(order[static_cast<std::size_t>(start + k)]);
                xb.row(k) = x.row(r);
                yb[k] = y[r];
            }
            const Eigen::MatrixXd pre = (p.w1 * xb.transpose()).colwise() + p.b1;  // hidden x b
            const Eigen::MatrixXd h = pre.cwiseMax(0.0);
            Eigen::VectorXd out = (h.transpose() * p.w2).array() + p.b2;
            // d loss / d out is (prediction - target) for both losses
            Eigen::VectorXd delta(b);
            for (Eigen::Index k = 0; k < b; ++k)
                delta[k] = ((logistic ? stable_sigmoid(out[k]) : out[k]) - yb[k]) / static_cast<double>(b);
            g.w2 = h * delta + (alpha / static_cast<double>(b)) * p.w2;
            g.b2 = delta.sum();
            Eigen::MatrixXd dh = p.w2 * delta.transpose();  // hidden x b
            dh = dh.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
            g.w1 = dh * xb + (alpha / static_cast<double>(b)) * p.w1;
            g.b1 = dh.rowwise().sum();
            adam.update(p, g);
        }
        const double loss = total_loss(p, x, y, logistic, alpha);
        if (!std::isfinite(loss)) {
            // diverged on unscaled data: keep the last finite parameters
            p = last_good;
            break;
        }
        last_good = p;
        curve.push_back(loss);
    }
    return std::make_shared<MlpModel>(spec.mode, data.features(), data.rows(), std::move(p.w1), std::move(p.b1),
                                      std::move(p.w2), p.b2, std::move(curve));
}

}  // namespace sade
