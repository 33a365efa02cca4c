#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "sade/models.hpp"

using namespace sade;

namespace {

Dataset make_data(const std::vector<Vector>& rows, const std::vector<double>& y) {
    Dataset d(rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) d.add(rows[i], y[i]);
    return d;
}

LearnerSpec spec_of(LearnerKind k, LearnerMode m, std::map<std::string, double> hyper = {}) {
    auto s = LearnerSpec::make(k, m);
    s.hyper = std::move(hyper);
    return s;
}

Dataset random_regression(RandomStream& rng, std::size_t n, std::size_t f) {
    Dataset d(f);
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(f);
        for (auto& v : x) v = rng.uniform(-3, 3);
        double y = 0.5;
        for (std::size_t j = 0; j < f; ++j) y += (static_cast<double>(j) - 1.0) * x[j];
        d.add(x, y + rng.uniform(-0.1, 0.1));
    }
    return d;
}

// Unique x rows with labels from a noisy rule; consistent by construction.
Dataset random_consistent(RandomStream& rng, std::size_t n, std::size_t f, bool classes) {
    Dataset d(f);
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(f);
        for (auto& v : x) v = std::round(rng.uniform(-50, 50)) / 10.0;  // coarse grid creates ties
        x[0] = static_cast<double>(i);                                  // keeps rows distinct
        const double r = rng.uniform();
        d.add(x, classes ? (r < 0.5 ? 0.0 : 1.0) : r * 100.0);
    }
    return d;
}

}  // namespace

TEST_CASE("learner spec parsing, labels and validation") {
    CHECK(parse_learner_kind("dt") == LearnerKind::decision_tree);
    CHECK(parse_learner_kind("xgboost") == LearnerKind::gradient_boosting);
    CHECK(parse_learner_kind("kriging") == LearnerKind::gpr);
    CHECK_THROWS(parse_learner_kind("svm"));
    CHECK(spec_of(LearnerKind::decision_tree, LearnerMode::classifier).label() == "DT/C");
    CHECK(spec_of(LearnerKind::ridge, LearnerMode::regressor).label() == "Ridge/R");
    CHECK_THROWS(spec_of(LearnerKind::gpr, LearnerMode::classifier).validate());
    CHECK_THROWS(spec_of(LearnerKind::ridge, LearnerMode::regressor, {{"depth", 3}}).validate());
    CHECK_THROWS(spec_of(LearnerKind::ridge, LearnerMode::regressor, {{"alpha", -1}}).validate());
    CHECK(spec_of(LearnerKind::random_forest, LearnerMode::classifier).param("n_estimators") == 40);
    CHECK(spec_of(LearnerKind::mlp, LearnerMode::classifier).param("epochs") == 20);
    CHECK(spec_of(LearnerKind::mlp, LearnerMode::classifier).param("learning_rate") == 0.01);
    CHECK(spec_of(LearnerKind::decision_tree, LearnerMode::classifier).deterministic());
    CHECK_FALSE(spec_of(LearnerKind::random_forest, LearnerMode::classifier).deterministic());
}

TEST_CASE("dataset rejects bad rows and fit rejects bad data") {
    Dataset d(2);
    CHECK_THROWS(d.add(Vector{1.0}, 0.0));
    RandomStream rng(1);
    CHECK_THROWS(fit(spec_of(LearnerKind::ridge, LearnerMode::regressor), d, rng));
    d.add(Vector{1, 2}, 0.5);
    CHECK_THROWS(fit(spec_of(LearnerKind::decision_tree, LearnerMode::classifier), d, rng));
}

TEST_CASE("ridge without intercept matches the scalar normal equation") {
    auto d = make_data({{1}, {2}, {3}}, {1, 2, 3});
    RandomStream rng(1);
    auto m = fit(spec_of(LearnerKind::ridge, LearnerMode::regressor, {{"fit_intercept", 0}, {"alpha", 1}}), d, rng);
    const double sxy = 1 + 4 + 9;
    const double sxx = 1 + 4 + 9;
    const double w = sxy / (sxx + 1.0);
    CHECK(w == doctest::Approx(14.0 / 15.0));
    CHECK(m->predict_value(Vector{1}) == doctest::Approx(w).epsilon(1e-12));
    CHECK(m->predict_value(Vector{2}) == doctest::Approx(28.0 / 15.0).epsilon(1e-12));
    CHECK_THROWS(m->predict_value(Vector{1, 2}));
    CHECK_THROWS(m->predict_class(Vector{1}));
}

TEST_CASE("ridge matches a gradient-descent oracle") {
    RandomStream rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        auto d = random_regression(rng, 30, 3);
        auto m = fit(spec_of(LearnerKind::ridge, LearnerMode::regressor, {{"alpha", 0.7}}), d, rng);
        // minimise 0.5*|y - Xw - b|^2 + 0.5*alpha*|w|^2 by plain gradient descent
        Eigen::Vector3d w = Eigen::Vector3d::Zero();
        double b = 0.0;
        for (int it = 0; it < 200000; ++it) {
            Eigen::Vector3d gw = 0.7 * w;
            double gb = 0.0;
            for (std::size_t i = 0; i < d.rows(); ++i) {
                const auto x = d.row(i);
                const double r = w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + b - d.target(i);
                gw += r * Eigen::Vector3d(x[0], x[1], x[2]);
                gb += r;
            }
            w -= 0.003 * gw;
            b -= 0.003 * gb;
            if (gw.norm() + std::abs(gb) < 1e-12) break;
        }
        const auto& rm = dynamic_cast<const RidgeModel&>(*m);
        for (int j = 0; j < 3; ++j) CHECK(rm.weights()[j] == doctest::Approx(w[j]).epsilon(1e-6));
        CHECK(rm.intercept() == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("ridge classifier regresses on signed targets") {
    auto d = make_data({{-2}, {-1}, {1}, {2}}, {0, 0, 1, 1});
    RandomStream rng(1);
    auto m = fit(spec_of(LearnerKind::ridge, LearnerMode::classifier), d, rng);
    CHECK(m->decision_threshold() == 0.0);
    CHECK(m->predict_class(Vector{-1.5}) == 0);
    CHECK(m->predict_class(Vector{1.5}) == 1);
    CHECK(m->score(Vector{0.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("decision tree on the separable pair") {
    auto d = make_data({{0}, {1}}, {0, 1});
    RandomStream rng(1);
    auto m = fit(spec_of(LearnerKind::decision_tree, LearnerMode::classifier), d, rng);
    CHECK(m->predict_class(Vector{0}) == 0);
    CHECK(m->predict_class(Vector{1}) == 1);
    CHECK_THROWS(m->predict_class(Vector{0, 0}));
}

TEST_CASE("constant targets give constant trees and single-class classifiers") {
    auto d = make_data({{0, 1}, {1, 5}, {2, -3}}, {4.5, 4.5, 4.5});
    RandomStream rng(1);
    auto r = fit(spec_of(LearnerKind::decision_tree, LearnerMode::regressor), d, rng);
    CHECK(r->predict_value(Vector{100, -100}) == 4.5);
    auto ones = make_data({{0}, {1}, {2}}, {1, 1, 1});
    for (auto k : {LearnerKind::decision_tree, LearnerKind::random_forest, LearnerKind::gradient_boosting}) {
        auto c = fit(spec_of(k, LearnerMode::classifier), ones, rng);
        CHECK(c->predict_class(Vector{7}) == 1);
    }
}

TEST_CASE("unrestricted trees have zero training error on consistent data") {
    RandomStream rng(17);
    for (std::size_t n : {5u, 40u, 300u, 3000u}) {
        for (bool classes : {true, false}) {
            CAPTURE(n);
            CAPTURE(classes);
            auto d = random_consistent(rng, n, 6, classes);
            // scramble the index feature so the tree has to use all features
            auto mode = classes ? LearnerMode::classifier : LearnerMode::regressor;
            auto m = fit(spec_of(LearnerKind::decision_tree, mode), d, rng);
            std::size_t errors = 0;
            for (std::size_t i = 0; i < d.rows(); ++i) {
                const double pred = classes ? m->predict_class(d.row(i)) : m->predict_value(d.row(i));
                errors += pred == d.target(i) ? 0 : 1;
            }
            CHECK(errors == 0);
        }
    }
}

TEST_CASE("zero training error without an identifying feature") {
    // distinct rows on a coarse grid, many per histogram bin
    RandomStream rng(23);
    Dataset d(4);
    std::set<Vector> seen;
    while (d.rows() < 5000) {
        Vector x(4);
        for (auto& v : x) v = std::round(rng.uniform(-20, 20));
        if (!seen.insert(x).second) continue;
        d.add(x, rng.bernoulli(0.5) ? 1.0 : 0.0);
    }
    auto m = fit(spec_of(LearnerKind::decision_tree, LearnerMode::classifier), d, rng);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) errors += m->predict_class(d.row(i)) == d.target(i) ? 0 : 1;
    CHECK(errors == 0);
}

TEST_CASE("histogram and exact search agree on training predictions") {
    RandomStream rng(29);
    auto d = random_consistent(rng, 800, 5, false);
    auto hist = fit(spec_of(LearnerKind::decision_tree, LearnerMode::regressor), d, rng);
    auto exact = fit(spec_of(LearnerKind::decision_tree, LearnerMode::regressor, {{"exact_below", 1e9}}), d, rng);
    for (std::size_t i = 0; i < d.rows(); ++i)
        CHECK(hist->predict_value(d.row(i)) == exact->predict_value(d.row(i)));
}

TEST_CASE("depth limit is respected") {
    RandomStream rng(31);
    auto d = random_consistent(rng, 500, 3, false);
    auto m = fit(spec_of(LearnerKind::decision_tree, LearnerMode::regressor, {{"max_depth", 3}}), d, rng);
    CHECK(dynamic_cast<const TreeModel&>(*m).tree().depth() <= 3);
    CHECK(dynamic_cast<const TreeModel&>(*m).tree().leaf_count() <= 8);
}

TEST_CASE("a forest of one unbagged tree with all features equals the tree") {
    RandomStream rng(37);
    for (bool classes : {true, false}) {
        auto d = random_consistent(rng, 400, 4, classes);
        auto mode = classes ? LearnerMode::classifier : LearnerMode::regressor;
        auto tree = fit(spec_of(LearnerKind::decision_tree, mode), d, rng);
        auto forest = fit(
            spec_of(LearnerKind::random_forest, mode, {{"n_estimators", 1}, {"bootstrap", 0}, {"max_features", 4}}),
            d, rng);
        for (int t = 0; t < 200; ++t) {
            Vector x(4);
            x[0] = rng.uniform(-10, 410);
            for (int j = 1; j < 4; ++j) x[static_cast<std::size_t>(j)] = rng.uniform(-6, 6);
            CHECK(forest->score(x) == tree->score(x));
        }
    }
}

TEST_CASE("forest is deterministic given the stream and averages its trees") {
    RandomStream data_rng(41);
    auto d = random_consistent(data_rng, 300, 6, true);
    auto spec = spec_of(LearnerKind::random_forest, LearnerMode::classifier, {{"n_estimators", 7}});
    RandomStream a(5);
    RandomStream b(5);
    auto fa = fit(spec, d, a);
    auto fb = fit(spec, d, b);
    CHECK(fa->dump() == fb->dump());
    const auto& forest = dynamic_cast<const ForestModel&>(*fa);
    CHECK(forest.trees().size() == 7);
    const auto x = d.row(3);
    double mean = 0.0;
    for (const auto& t : forest.trees()) mean += t.predict(x);
    CHECK(fa->score(x) == doctest::Approx(mean / 7.0));
}

TEST_CASE("one boosting round at rate one equals its base tree") {
    RandomStream rng(43);
    auto d = random_consistent(rng, 400, 4, false);
    auto gb = fit(spec_of(LearnerKind::gradient_boosting, LearnerMode::regressor,
                          {{"n_rounds", 1}, {"learning_rate", 1.0}, {"max_depth", 3}}),
                  d, rng);
    auto tree = fit(spec_of(LearnerKind::decision_tree, LearnerMode::regressor, {{"max_depth", 3}}), d, rng);
    for (std::size_t i = 0; i < d.rows(); ++i)
        CHECK(gb->predict_value(d.row(i)) == doctest::Approx(tree->predict_value(d.row(i))).epsilon(1e-9));
}

TEST_CASE("boosting reduces training error over rounds") {
    RandomStream rng(47);
    auto d = random_regression(rng, 200, 3);
    auto sse = [&](const ModelPtr& m) {
        double s = 0.0;
        for (std::size_t i = 0; i < d.rows(); ++i) s += std::pow(m->predict_value(d.row(i)) - d.target(i), 2);
        return s;
    };
    auto few = fit(spec_of(LearnerKind::gradient_boosting, LearnerMode::regressor, {{"n_rounds", 2}}), d, rng);
    auto many = fit(spec_of(LearnerKind::gradient_boosting, LearnerMode::regressor), d, rng);
    CHECK(sse(many) < sse(few));

    Dataset c(2);
    for (int i = 0; i < 200; ++i) {
        Vector x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        c.add(x, x[0] + x[1] > 0 ? 1.0 : 0.0);
    }
    auto clf = fit(spec_of(LearnerKind::gradient_boosting, LearnerMode::classifier), c, rng);
    int correct = 0;
    for (std::size_t i = 0; i < c.rows(); ++i) correct += clf->predict_class(c.row(i)) == c.target(i);
    CHECK(correct >= 190);
    CHECK(clf->score(c.row(0)) > 0.0);
    CHECK(clf->score(c.row(0)) < 1.0);
}

TEST_CASE("mlp loss does not increase over the first epoch on separable data") {
    int failures = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        RandomStream rng(static_cast<std::uint64_t>(1000 + seed));
        Dataset d(2);
        for (int i = 0; i < 100; ++i) {
            Vector x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            d.add(x, x[0] - 0.5 * x[1] > 0 ? 1.0 : 0.0);
        }
        auto m = fit(spec_of(LearnerKind::mlp, LearnerMode::classifier), d, rng);
        const auto& curve = dynamic_cast<const MlpModel&>(*m).loss_curve();
        REQUIRE(curve.size() == 21);
        if (curve[1] > curve[0]) ++failures;
    }
    CHECK(failures <= seeds / 10);
}

TEST_CASE("mlp regressor fits a linear function and is stream-deterministic") {
    RandomStream data_rng(53);
    auto d = random_regression(data_rng, 300, 2);
    auto spec = spec_of(LearnerKind::mlp, LearnerMode::regressor, {{"epochs", 200}});
    RandomStream a(9);
    RandomStream b(9);
    auto ma = fit(spec, d, a);
    auto mb = fit(spec, d, b);
    CHECK(ma->dump() == mb->dump());
    double sse = 0.0;
    double sst = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) mean += d.target(i) / static_cast<double>(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        sse += std::pow(ma->predict_value(d.row(i)) - d.target(i), 2);
        sst += std::pow(d.target(i) - mean, 2);
    }
    CHECK(sse < 0.05 * sst);
}

TEST_CASE("mlp keeps finite predictions on badly scaled targets") {
    RandomStream rng(59);
    Dataset d(3);
    for (int i = 0; i < 100; ++i) {
        Vector x{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
        d.add(x, 1e12 * x[0] * x[0]);
    }
    auto m = fit(spec_of(LearnerKind::mlp, LearnerMode::regressor), d, rng);
    CHECK(std::isfinite(m->predict_value(d.row(0))));
}

TEST_CASE("gpr interpolates its training targets") {
    RandomStream rng(1);
    auto two = make_data({{0}, {1}}, {0, 1});
    auto m = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor), two, rng);
    CHECK(std::abs(m->predict_value(Vector{0}) - 0.0) < 1e-6);
    CHECK(std::abs(m->predict_value(Vector{1}) - 1.0) < 1e-6);

    for (int trial = 0; trial < 5; ++trial) {
        Dataset d(3);
        for (int i = 0; i < 25; ++i) {
            Vector x{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
            d.add(x, x[0] * x[0] - 3 * x[1] + std::sin(x[2]));
        }
        auto g = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor), d, rng);
        for (std::size_t i = 0; i < d.rows(); ++i) CHECK(std::abs(g->predict_value(d.row(i)) - d.target(i)) < 1e-6);
    }
}

TEST_CASE("gpr reverts to the mean far away and survives duplicates") {
    RandomStream rng(1);
    auto d = make_data({{0}, {1}, {2}}, {1, 2, 6});
    auto m = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor), d, rng);
    CHECK(m->predict_value(Vector{1e6}) == doctest::Approx(3.0));

    auto dup = make_data({{0}, {0}, {1}}, {1, 1, 2});
    auto g = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor), dup, rng);
    CHECK(std::isfinite(g->predict_value(Vector{0.5})));
    CHECK(dynamic_cast<const GprModel&>(*g).jitter() <= 1e-4);
}

TEST_CASE("gpr length-scale search improves over a poor starting scale") {
    RandomStream rng(61);
    Dataset d(2);
    for (int i = 0; i < 60; ++i) {
        Vector x{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        d.add(x, x[0] * x[0] + x[1] * x[1]);
    }
    auto fixed = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor), d, rng);
    auto tuned = fit(spec_of(LearnerKind::gpr, LearnerMode::regressor, {{"optimize_length_scale", 1}}), d, rng);
    CHECK(dynamic_cast<const GprModel&>(*tuned).length_scale() > 1.0);
    double err_fixed = 0.0;
    double err_tuned = 0.0;
    for (int t = 0; t < 50; ++t) {
        Vector x{rng.uniform(-40, 40), rng.uniform(-40, 40)};
        const double y = x[0] * x[0] + x[1] * x[1];
        err_fixed += std::abs(fixed->predict_value(x) - y);
        err_tuned += std::abs(tuned->predict_value(x) - y);
    }
    CHECK(err_tuned < err_fixed);
}

TEST_CASE("latin hypercube stratification") {
    RandomStream rng(3);
    auto pts = latin_hypercube_sample(4, Bounds::uniform(1, 0, 1), rng);
    std::vector<int> cells;
    for (const auto& p : pts) cells.push_back(static_cast<int>(std::floor(p[0] * 4)));
    std::sort(cells.begin(), cells.end());
    CHECK(cells == std::vector<int>{0, 1, 2, 3});

    Bounds b = Bounds::uniform(29, -5, 10);
    RandomStream a1(77);
    RandomStream a2(77);
    auto big = latin_hypercube_sample(749, b, a1);
    CHECK(big == latin_hypercube_sample(749, b, a2));
    REQUIRE(big.size() == 749);
    for (std::size_t j = 0; j < 29; ++j) {
        std::set<long> strata;
        for (const auto& p : big) {
            CHECK(b.contains(p));
            strata.insert(static_cast<long>(std::floor((p[j] + 5.0) / 15.0 * 749.0)));
        }
        CHECK(strata.size() == 749);
    }
    CHECK_THROWS(latin_hypercube_sample(0, b, rng));
}

TEST_CASE("binned codes respect the edges after incremental appends") {
    RandomStream rng(67);
    Dataset d(3);
    for (int round = 0; round < 4; ++round) {
        for (int i = 0; i < 3000; ++i) d.add(Vector{rng.uniform(), std::round(rng.uniform(0, 5)), 1.0}, 0.0);
        const auto& b = d.binned(32);
        REQUIRE(b.rows == d.rows());
        for (std::size_t f = 0; f < 3; ++f) {
            CHECK(b.edges[f].size() + 1 <= 32);
            CHECK(std::is_sorted(b.edges[f].begin(), b.edges[f].end()));
        }
        CHECK(b.edges[2].empty());
        for (std::size_t r = 0; r < d.rows(); r += 97)
            for (std::size_t f = 0; f < 3; ++f) {
                const auto code = b.codes[r * 3 + f];
                const double v = d.row(r)[f];
                if (code < b.edges[f].size()) CHECK(v <= b.edges[f][code]);
                if (code > 0) CHECK(v > b.edges[f][code - 1u]);
            }
        // a copy codes from scratch and must agree
        Dataset copy = d;
        CHECK(copy.binned(32).codes == b.codes);
    }
}

TEST_CASE("models dump a versioned header") {
    auto d = make_data({{0}, {1}}, {0, 1});
    RandomStream rng(1);
    for (auto k : {LearnerKind::ridge, LearnerKind::decision_tree, LearnerKind::random_forest,
                   LearnerKind::gradient_boosting, LearnerKind::mlp}) {
        auto m = fit(spec_of(k, LearnerMode::classifier), d, rng);
        CHECK(m->dump().rfind("sade-model 1\n", 0) == 0);
        CHECK(m->training_row_count() == 2);
        CHECK(m->feature_count() == 1);
    }
}
