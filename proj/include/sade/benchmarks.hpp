#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sade/core.hpp"

namespace sade {

enum class BaseKind {
    sphere,
    schwefel_2_21,
    rosenbrock,
    rastrigin,
    griewank,
    ackley,
    schwefel_2_22,
    schwefel_1_2,
    extended_f10,
    bohachevsky,
    schaffer,
};

BaseKind parse_base_kind(std::string_view name);
std::string_view to_string(BaseKind kind);

/// Classical search interval of a base function, shared by all dimensions.
struct Domain {
    double lo;
    double hi;
};
Domain classical_domain(BaseKind kind);

/// Base function at an already shifted point z. Every kind has f(0) = 0.
/// Rosenbrock is evaluated at z + 1 so that its optimum also sits at z = 0.
double evaluate_base(BaseKind kind, std::span<const double> z);

struct BenchmarkSpec {
    std::string id;
    std::size_t dim = 0;
    Bounds bounds;
    Vector shift;
    BaseKind first = BaseKind::sphere;
    std::optional<BaseKind> second;  // set for hybrid compositions
    double split = 0.5;

    bool is_hybrid() const { return second.has_value(); }
    /// Number of leading dimensions handled by `first`.
    std::size_t split_index() const;
    void validate() const;
};

/// Simple spec: bounds from the classical domain, shift drawn by the caller.
BenchmarkSpec make_simple(std::string id, BaseKind kind, Vector shift);
BenchmarkSpec make_hybrid(std::string id, BaseKind first, BaseKind second, double split, Vector shift);

double evaluate(const BenchmarkSpec& spec, std::span<const double> x);

/// F1..F19: eleven shifted base functions followed by eight hybrid pairs.
std::vector<BenchmarkSpec> make_suite(std::size_t dim, std::uint64_t seed);
const BenchmarkSpec& find_function(const std::vector<BenchmarkSpec>& suite, std::string_view id);

// ---------------------------------------------------------------------------
// External black-box problems

struct BlackBoxSpec {
    std::vector<std::string> command;  // program followed by its arguments
    std::size_t dim = 0;
    std::chrono::milliseconds timeout{60000};
    std::size_t parallel_workers = 1;

    void validate() const;
};

class BlackBoxError : public std::runtime_error {
public:
    enum class Kind { timeout, protocol, spawn };
    BlackBoxError(Kind kind, std::size_t index, const std::string& what);
    Kind kind() const { return kind_; }
    std::size_t index() const { return index_; }

private:
    Kind kind_;
    std::size_t index_;
};

/// One request line: components with 17 significant digits joined by single spaces, then '\n'.
std::string format_request(std::span<const double> x);
/// Parses one response line. Throws std::invalid_argument when it is not a single finite decimal.
double parse_response(std::string_view line);

/// Evaluates the batch with one process per evaluation, at most `parallel_workers` alive at a time.
/// Results are returned in batch order.
std::vector<double> blackbox_evaluate(const BlackBoxSpec& spec, std::span<const Vector> batch);

}  // namespace sade
