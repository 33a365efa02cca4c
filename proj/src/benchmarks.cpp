#include "sade/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "sade/rng.hpp"

namespace sade {

namespace {

constexpr std::array<std::pair<std::string_view, BaseKind>, 11> kKindNames{{
    {"sphere", BaseKind::sphere},
    {"schwefel_2_21", BaseKind::schwefel_2_21},
    {"rosenbrock", BaseKind::rosenbrock},
    {"rastrigin", BaseKind::rastrigin},
    {"griewank", BaseKind::griewank},
    {"ackley", BaseKind::ackley},
    {"schwefel_2_22", BaseKind::schwefel_2_22},
    {"schwefel_1_2", BaseKind::schwefel_1_2},
    {"extended_f10", BaseKind::extended_f10},
    {"bohachevsky", BaseKind::bohachevsky},
    {"schaffer", BaseKind::schaffer},
}};

double f10(double x, double y) {
    const double r = x * x + y * y;
    const double s = std::sin(50.0 * std::pow(r, 0.1));
    return std::pow(r, 0.25) * (s * s + 1.0);
}

}  // namespace

BaseKind parse_base_kind(std::string_view name) {
    for (const auto& [n, k] : kKindNames)
        if (n == name) return k;
    throw std::invalid_argument("unknown base function kind '" + std::string(name) + "'");
}

std::string_view to_string(BaseKind kind) {
    for (const auto& [n, k] : kKindNames)
        if (k == kind) return n;
    return "unknown";
}

Domain classical_domain(BaseKind kind) {
    switch (kind) {
        case BaseKind::rastrigin: return {-5.0, 5.0};
        case BaseKind::griewank: return {-600.0, 600.0};
        case BaseKind::ackley: return {-32.0, 32.0};
        case BaseKind::schwefel_2_22: return {-10.0, 10.0};
        case BaseKind::schwefel_1_2: return {-65.536, 65.536};
        case BaseKind::bohachevsky: return {-15.0, 15.0};
        default: return {-100.0, 100.0};
    }
}

double evaluate_base(BaseKind kind, std::span<const double> z) {
    if (z.empty()) throw std::invalid_argument("evaluate_base: empty vector");
    for (double v : z)
        if (std::isnan(v)) throw std::invalid_argument("evaluate_base: NaN component");
    const std::size_t n = z.size();
    double acc = 0.0;
    switch (kind) {
        case BaseKind::sphere:
            for (double v : z) acc += v * v;
            return acc;
        case BaseKind::schwefel_2_21:
            for (double v : z) acc = std::max(acc, std::abs(v));
            return acc;
        case BaseKind::rosenbrock:
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double a = z[i] + 1.0;
                const double b = z[i + 1] + 1.0;
                acc += 100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0);
            }
            return acc;
        case BaseKind::rastrigin:
            for (double v : z) acc += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
            return 10.0 * static_cast<double>(n) + acc;
        case BaseKind::griewank: {
            double prod = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += z[i] * z[i] / 4000.0;
                prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
            }
            return acc - prod + 1.0;
        }
        case BaseKind::ackley: {
            double cs = 0.0;
            for (double v : z) {
                acc += v * v;
                cs += std::cos(2.0 * std::numbers::pi * v);
            }
            const double dn = static_cast<double>(n);
            return -20.0 * std::exp(-0.2 * std::sqrt(acc / dn)) - std::exp(cs / dn) + 20.0 + std::numbers::e;
        }
        case BaseKind::schwefel_2_22: {
            double prod = 1.0;
            for (double v : z) {
                acc += std::abs(v);
                prod *= std::abs(v);
            }
            return acc + prod;
        }
        case BaseKind::schwefel_1_2: {
            double partial = 0.0;
            for (double v : z) {
                partial += v;
                acc += partial * partial;
            }
            return acc;
        }
        case BaseKind::extended_f10:
            for (std::size_t i = 0; i + 1 < n; ++i) acc += f10(z[i], z[i + 1]);
            return acc + f10(z[n - 1], z[0]);
        case BaseKind::bohachevsky:
            for (std::size_t i = 0; i + 1 < n; ++i)
                acc += z[i] * z[i] + 2.0 * z[i + 1] * z[i + 1] - 0.3 * std::cos(3.0 * std::numbers::pi * z[i]) -
                       0.4 * std::cos(4.0 * std::numbers::pi * z[i + 1]) + 0.7;
            return acc;
        case BaseKind::schaffer:
            for (std::size_t i = 0; i + 1 < n; ++i) acc += f10(z[i], z[i + 1]);
            return acc;
    }
    throw std::invalid_argument("evaluate_base: unknown kind");
}

std::size_t BenchmarkSpec::split_index() const {
    if (!is_hybrid()) return dim;
    return static_cast<std::size_t>(std::lround(split * static_cast<double>(dim)));
}

void BenchmarkSpec::validate() const {
    if (dim == 0) throw std::invalid_argument(id + ": zero dimension");
    if (bounds.dim() != dim || shift.size() != dim) throw std::invalid_argument(id + ": dimension mismatch");
    bounds.validate();
    if (!bounds.contains(shift)) throw std::invalid_argument(id + ": shift outside bounds");
    if (is_hybrid()) {
        const auto k = split_index();
        if (k == 0 || k >= dim) throw std::invalid_argument(id + ": hybrid split leaves an empty block");
    }
}

BenchmarkSpec make_simple(std::string id, BaseKind kind, Vector shift) {
    BenchmarkSpec s;
    s.id = std::move(id);
    s.dim = shift.size();
    const auto d = classical_domain(kind);
    s.bounds = Bounds::uniform(s.dim, d.lo, d.hi);
    s.shift = std::move(shift);
    s.first = kind;
    s.validate();
    return s;
}

BenchmarkSpec make_hybrid(std::string id, BaseKind first, BaseKind second, double split, Vector shift) {
    BenchmarkSpec s;
    s.id = std::move(id);
    s.dim = shift.size();
    s.first = first;
    s.second = second;
    s.split = split;
    s.shift = std::move(shift);
    const auto k = s.split_index();
    const auto da = classical_domain(first);
    const auto db = classical_domain(second);
    for (std::size_t i = 0; i < s.dim; ++i) {
        const auto& d = i < k ? da : db;
        s.bounds.lower.push_back(d.lo);
        s.bounds.upper.push_back(d.hi);
    }
    s.validate();
    return s;
}

double evaluate(const BenchmarkSpec& spec, std::span<const double> x) {
    if (x.size() != spec.dim)
        throw std::invalid_argument(spec.id + ": expected " + std::to_string(spec.dim) + " components, got " +
                                    std::to_string(x.size()));
    Vector z(x.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - spec.shift[i];
    if (!spec.is_hybrid()) return evaluate_base(spec.first, z);
    const auto k = spec.split_index();
    return evaluate_base(spec.first, std::span<const double>(z).first(k)) +
           evaluate_base(*spec.second, std::span<const double>(z).subspan(k));
}

std::vector<BenchmarkSpec> make_suite(std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw std::invalid_argument("make_suite: dimension must be at least 2");
    auto rng = make_stream(seed, 0, "shift_generation");

    // Shifts are uniform within the central 80% of each dimension's interval.
    auto draw_shift = [&](const Bounds& b) {
        Vector s(b.dim());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double margin = 0.1 * b.width(i);
            s[i] = rng.uniform(b.lower[i] + margin, b.upper[i] - margin);
        }
        return s;
    };

    constexpr std::array<BaseKind, 11> simple{
        BaseKind::sphere,       BaseKind::schwefel_2_21, BaseKind::rosenbrock,    BaseKind::rastrigin,
        BaseKind::griewank,     BaseKind::ackley,        BaseKind::schwefel_2_22, BaseKind::schwefel_1_2,
        BaseKind::extended_f10, BaseKind::bohachevsky,   BaseKind::schaffer,
    };
    // Stand-ins for the hybrid compositions: eight distinct base pairs.
    constexpr std::array<std::pair<BaseKind, BaseKind>, 8> hybrids{{
        {BaseKind::extended_f10, BaseKind::sphere},
        {BaseKind::extended_f10, BaseKind::rosenbrock},
        {BaseKind::extended_f10, BaseKind::rastrigin},
        {BaseKind::bohachevsky, BaseKind::schwefel_2_22},
        {BaseKind::schaffer, BaseKind::sphere},
        {BaseKind::bohachevsky, BaseKind::rosenbrock},
        {BaseKind::schaffer, BaseKind::rastrigin},
        {BaseKind::griewank, BaseKind::schwefel_2_22},
    }};

    std::vector<BenchmarkSpec> suite;
    suite.reserve(simple.size() + hybrids.size());
    int number = 1;
    for (auto kind : simple) {
        const auto d = classical_domain(kind);
        const auto b = Bounds::uniform(dim, d.lo, d.hi);
        suite.push_back(make_simple("F" + std::to_string(number++), kind, draw_shift(b)));
    }
    for (auto [a, b] : hybrids) {
        // bounds depend only on the pair and split, so build once with a zero shift placeholder
        auto proto = make_hybrid("", a, b, 0.5, Vector(dim, 0.0));
        suite.push_back(make_hybrid("F" + std::to_string(number++), a, b, 0.5, draw_shift(proto.bounds)));
    }
    return suite;
}

const BenchmarkSpec& find_function(const std::vector<BenchmarkSpec>& suite, std::string_view id) {
    for (const auto& s : suite)
        if (s.id == id) return s;
    throw std::invalid_argument("unknown benchmark function '" + std::string(id) + "'");
}

}  // namespace sade
