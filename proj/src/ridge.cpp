#include <sstream>

#include "sade/models.hpp"

namespace sade {

double RidgeModel::raw_score(std::span<const double> x) const {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return w_.dot(v) + b_;
}

std::string RidgeModel::dump() const {
    std::ostringstream out;
    out.precision(17);
    out << "sade-model 1\nkind ridge\nmode " << to_string(mode()) << "\nfeatures " << feature_count() << "\nrows "
        << training_row_count() << "\nintercept " << b_ << "\nweights";
    for (Eigen::Index i = 0; i < w_.size(); ++i) out << ' ' << w_[i];
    out << "\n";
    return out.str();
}

ModelPtr fit_ridge(const LearnerSpec& spec, const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto f = static_cast<Eigen::Index>(data.features());
    const double alpha = spec.param("alpha");
    const bool intercept = spec.param("fit_intercept") != 0.0;
    const bool classifier = spec.mode == LearnerMode::classifier;

    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        data.values().data(), n, f);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = data.target(static_cast<std::size_t>(i));
        y[i] = classifier ? 2.0 * t - 1.0 : t;
    }

    Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(f);
    double y_mean = 0.0;
    if (intercept) {
        x_mean = x.colwise().mean();
        y_mean = y.mean();
    }
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(f, f);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += alpha;
    const Eigen::VectorXd rhs = xc.transpose() * yc;

    Eigen::VectorXd w;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && alpha > 0) {
        w = ldlt.solve(rhs);
    } else {
        // alpha = 0 with collinear features: minimum-norm least squares
        w = gram.completeOrthogonalDecomposition().solve(rhs);
    }
    const double b = intercept ? y_mean - x_mean.dot(w) : 0.0;
    return std::make_shared<RidgeModel>(spec.mode, data.features(), data.rows(), std::move(w), b);
}

}  // namespace sade
