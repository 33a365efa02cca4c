#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sade/models.hpp"

namespace sade {

namespace {

constexpr double kMaxJitter = 1e-4;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd norms = x.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * x * x.transpose();
    d.colwise() += norms;
    d.rowwise() += norms.transpose();
    return d.cwiseMax(0.0);
}

struct Solved {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

// Cholesky of sf2*exp(-d2/(2 l^2)) + jitter*I, raising the jitter tenfold until it succeeds.
Solved factor(const Eigen::MatrixXd& d2, double ell, double sf2, double jitter) {
    Eigen::MatrixXd k = sf2 * (-d2.array() / (2.0 * ell * ell)).exp();
    double j = jitter;
    for (;;) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += j;
        Solved s{Eigen::LLT<Eigen::MatrixXd>(kj), j};
        if (s.llt.info() == Eigen::Success) return s;
        if (j >= kMaxJitter) break;
        j = j > 0 ? std::min(j * 10.0, kMaxJitter) : 1e-10;
    }
    throw CholeskyFailure("gpr: covariance matrix not positive definite even with jitter " + std::to_string(kMaxJitter));
}

double log_marginal_likelihood(const Solved& s, const Eigen::VectorXd& y) {
    const Eigen::VectorXd a = s.llt.solve(y);
    const Eigen::MatrixXd l = s.llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * y.dot(a) - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace

double GprModel::raw_score(std::span<const double> x) const {
    const Eigen::Map<const Eigen::RowVectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd d2 = (x_.rowwise() - v).rowwise().squaredNorm();
    const Eigen::VectorXd k = signal_variance_ * (-d2.array() / (2.0 * length_scale_ * length_scale_)).exp();
    return y_mean_ + y_scale_ * k.dot(alpha_);
}

std::string GprModel::dump() const {
    std::ostringstream out;
    out.precision(17);
    out << "sade-model 1\nkind gpr\nmode regressor\nfeatures " << feature_count() << "\nrows " << training_row_count()
        << "\nlength_scale " << length_scale_ << "\nsignal_variance " << signal_variance_ << "\njitter " << jitter_
        << "\ny_mean " << y_mean_ << "\ny_scale " << y_scale_ << "\nalpha";
    for (Eigen::Index i = 0; i < alpha_.size(); ++i) out << ' ' << alpha_[i];
    out << "\n";
    return out.str();
}

ModelPtr fit_gpr(const LearnerSpec& spec, const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto f = static_cast<Eigen::Index>(data.features());
    const double sf2 = spec.param("signal_variance");
    const double jitter = spec.param("jitter");
    double ell = spec.param("length_scale");

    const Eigen::MatrixXd x =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.values().data(),
                                                                                                 n, f);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = data.target(static_cast<std::size_t>(i));
    const double y_mean = y.mean();
    double y_scale = n > 1 ? std::sqrt((y.array() - y_mean).square().sum() / static_cast<double>(n)) : 0.0;
    if (!(y_scale > 0)) y_scale = 1.0;
    const Eigen::VectorXd ys = (y.array() - y_mean) / y_scale;

    const Eigen::MatrixXd d2 = squared_distances(x);

    if (spec.param("optimize_length_scale") != 0.0 && n > 1) {
        // Grid search on the log marginal likelihood around the median pairwise distance.
        std::vector<double> off;
        off.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off.push_back(d2(i, j));
        std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2), off.end());
        const double median = std::sqrt(off[off.size() / 2]);
        std::vector<double> grid{ell};
        if (median > 0)
            for (int k = -6; k <= 6; ++k) grid.push_back(median * std::pow(2.0, 0.5 * k));
        double best_ll = -std::numeric_limits<double>::infinity();
        double best_ell = ell;
        for (double cand : grid) {
            try {
                const double ll = log_marginal_likelihood(factor(d2, cand, sf2, jitter), ys);
                if (ll > best_ll) {
                    best_ll = ll;
                    best_ell = cand;
                }
            } catch (const CholeskyFailure&) {
            }
        }
        ell = best_ell;
    }

    Solved s = factor(d2, ell, sf2, jitter);
    Eigen::VectorXd alpha = s.llt.solve(ys);
    return std::make_shared<GprModel>(data.features(), data.rows(), x, std::move(alpha), ell, sf2, y_mean, y_scale,
                                      s.jitter);
}

}  // namespace sade
