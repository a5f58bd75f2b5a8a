#include "stablecorr/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stablecorr {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double abs_pow(double x, double r)
{
    x = std::abs(x);
    if (r == 1.0)
        return x;
    if (r == 2.0)
        return x * x;
    return std::pow(x, r);
}

double root(double s, double r)
{
    if (r == 1.0)
        return s;
    if (r == 2.0)
        return std::sqrt(s);
    return std::pow(s, 1.0 / r);
}

Vector random_unit(Engine& engine, std::size_t n)
{
    std::normal_distribution<double> normal;
    Vector x(n);
    double norm = 0.0;
    while (norm == 0.0) {
        norm = 0.0;
        for (double& v : x) {
            v = normal(engine);
            norm += v * v;
        }
    }
    norm = std::sqrt(norm);
    for (double& v : x)
        v /= norm;
    return x;
}

// Projective equality: a == b or a == -b, entrywise within tol.
bool same_line(std::span<const double> a, std::span<const double> b, double tol)
{
    bool plus = true;
    bool minus = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        plus = plus && std::abs(a[i] - b[i]) <= tol;
        minus = minus && std::abs(a[i] + b[i]) <= tol;
    }
    return plus || minus;
}

}  // namespace

LevyMeasure::LevyMeasure(double exponent, std::vector<LevyEntry> entries)
    : p_(exponent), entries_(std::move(entries))
{
    if (!(p_ > 0.0) || !std::isfinite(p_))
        throw InvalidArgument("Levy measure exponent must be positive");
    if (entries_.empty())
        throw InvalidArgument("Levy measure needs at least one entry");
    const std::size_t n = entries_.front().direction.size();
    if (n == 0)
        throw InvalidArgument("Levy measure directions must be nonempty");
    for (const auto& e : entries_) {
        if (e.direction.size() != n)
            throw DimensionMismatch("Levy measure directions have inconsistent dimensions");
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw InvalidArgument("Levy measure weights must be positive and finite");
        const double norm = std::sqrt(dot(e.direction, e.direction));
        if (std::abs(norm - 1.0) > 1e-12)
            throw InvalidArgument("Levy measure directions must be unit vectors (|xi| = " +
                                  std::to_string(norm) + ")");
    }
}

double LevyMeasure::power_sum(std::span<const double> x) const
{
    if (x.size() != dim())
        throw DimensionMismatch("vector dimension does not match Levy measure");
    double s = 0.0;
    for (const auto& e : entries_)
        s += e.weight * abs_pow(dot(e.direction, x), p_);
    return s;
}

bool LevyMeasure::spans() const
{
    std::vector<Vector> rows;
    for (const auto& e : entries_)
        rows.push_back(e.direction);
    return matrix_rank(rows, dim()) == dim();
}

bool LevyMeasure::is_block_symmetric(std::size_t k) const
{
    constexpr double tol = 1e-12;
    const std::size_t n = dim();
    if (k < 1 || k >= n)
        throw InvalidArgument("invalid block split for Levy measure");
    double total = 0.0;
    for (const auto& e : entries_)
        total += e.weight;
    // Total weight on each line must equal the weight on its reflection.
    for (const auto& e : entries_) {
        Vector flipped(e.direction);
        for (std::size_t i = k; i < n; ++i)
            flipped[i] = -flipped[i];
        double on_line = 0.0;
        double on_reflection = 0.0;
        for (const auto& other : entries_) {
            if (same_line(other.direction, e.direction, tol))
                on_line += other.weight;
            if (same_line(other.direction, flipped, tol))
                on_reflection += other.weight;
        }
        if (std::abs(on_line - on_reflection) > tol * total)
            return false;
    }
    return true;
}

std::size_t norm_dim(const NormDescriptor& base)
{
    return std::visit(overloaded{
                          [](const DiscreteLrNorm& b) { return b.rows.front().size(); },
                          [](const MaxAbsNorm& b) { return b.n; },
                          [](const EuclideanNorm& b) { return b.weights.size(); },
                          [](const LevyNorm& b) { return b.measure.dim(); },
                      },
                      base);
}

std::string norm_kind(const NormDescriptor& base)
{
    return std::visit(overloaded{
                          [](const DiscreteLrNorm&) { return std::string("lr"); },
                          [](const MaxAbsNorm&) { return std::string("max_abs"); },
                          [](const EuclideanNorm&) { return std::string("euclidean"); },
                          [](const LevyNorm&) { return std::string("levy"); },
                      },
                      base);
}

double evaluate_norm(const NormDescriptor& base, std::span<const double> x)
{
    if (x.size() != norm_dim(base))
        throw DimensionMismatch("vector of dimension " + std::to_string(x.size()) +
                                " does not match function dimension " +
                                std::to_string(norm_dim(base)));
    return std::visit(overloaded{
                          [&](const DiscreteLrNorm& b) {
                              double s = 0.0;
                              for (const auto& row : b.rows)
                                  s += abs_pow(dot(row, x), b.r);
                              return root(s, b.r);
                          },
                          [&](const MaxAbsNorm&) {
                              double m = 0.0;
                              for (double v : x)
                                  m = std::max(m, std::abs(v));
                              return m;
                          },
                          [&](const EuclideanNorm& b) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < x.size(); ++i)
                                  s += b.weights[i] * x[i] * x[i];
                              return std::sqrt(s);
                          },
                          [&](const LevyNorm& b) {
                              return root(b.measure.power_sum(x), b.measure.exponent());
                          },
                      },
                      base);
}

HomogeneousFn::HomogeneousFn(NormDescriptor base, double p, std::optional<std::size_t> block_k)
    : base_(std::move(base)), p_(p), block_k_(block_k), n_(0)
{
    if (p_ == 0.0 || !std::isfinite(p_))
        throw InvalidArgument("homogeneity exponent must be finite and nonzero");
    std::visit(overloaded{
                   [](const DiscreteLrNorm& b) {
                       if (b.rows.empty())
                           throw InvalidArgument("L_r norm needs at least one row");
                       if (!(b.r > 0.0) || !std::isfinite(b.r))
                           throw InvalidArgument("L_r norm exponent must be positive");
                       const std::size_t n = b.rows.front().size();
                       for (const auto& row : b.rows)
                           if (row.size() != n)
                               throw DimensionMismatch("L_r norm rows have inconsistent lengths");
                       if (n == 0 || matrix_rank(b.rows, n) != n)
                           throw InvalidArgument("L_r norm matrix must have full column rank");
                   },
                   [](const MaxAbsNorm& b) {
                       if (b.n == 0)
                           throw InvalidArgument("max-abs norm needs positive dimension");
                   },
                   [](const EuclideanNorm& b) {
                       if (b.weights.empty())
                           throw InvalidArgument("Euclidean norm needs positive dimension");
                       for (double w : b.weights)
                           if (!(w > 0.0) || !std::isfinite(w))
                               throw InvalidArgument("Euclidean weights must be positive");
                   },
                   [](const LevyNorm& b) {
                       if (!b.measure.spans())
                           throw InvalidArgument("Levy measure does not span R^n; norm is degenerate");
                   },
               },
               base_);
    n_ = norm_dim(base_);
    if (block_k_ && (*block_k_ < 1 || *block_k_ >= n_))
        throw InvalidArgument("declared block split must satisfy 1 <= k < n");
}

HomogeneousFn max_abs_power(std::size_t n, double p)
{
    return HomogeneousFn(MaxAbsNorm{n}, p);
}

HomogeneousFn l1_power(std::size_t n, double p)
{
    std::vector<Vector> rows(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        rows[i][i] = 1.0;
    return HomogeneousFn(DiscreteLrNorm{std::move(rows), 1.0}, p);
}

HomogeneousFn euclidean_power(std::size_t n, double p)
{
    return HomogeneousFn(EuclideanNorm{Vector(n, 1.0)}, p);
}

HomogeneousFn lr_power(std::vector<Vector> rows, double r, double p)
{
    return HomogeneousFn(DiscreteLrNorm{std::move(rows), r}, p);
}

double evaluate(const HomogeneousFn& f, std::span<const double> x)
{
    const double base = evaluate_norm(f.base(), x);
    if (base == 0.0) {
        if (f.exponent() < 0.0)
            throw InvalidArgument("negative-order homogeneous function is singular at the origin");
        return 0.0;
    }
    const double p = f.exponent();
    if (p == 1.0)
        return base;
    if (p == 2.0)
        return base * base;
    return std::pow(base, p);
}

SymmetryCheck check_block_symmetry(const HomogeneousFn& f, BlockSplit split, std::size_t trials,
                                   Seed seed)
{
    split.validate(f.dim());
    if (trials == 0)
        throw InvalidArgument("symmetry check needs at least one trial");
    Engine engine = make_engine(seed, 0);
    SymmetryCheck result;
    for (std::size_t t = 0; t < trials; ++t) {
        Vector x = random_unit(engine, f.dim());
        Vector y(x);
        for (std::size_t i = split.k(); i < y.size(); ++i)
            y[i] = -y[i];
        const double a = evaluate(f, x);
        const double b = evaluate(f, y);
        const double dev = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
        result.max_relative_deviation = std::max(result.max_relative_deviation, dev);
        if (dev > 1e-10) {
            result.passed = false;
            result.witness = std::move(x);
            return result;
        }
    }
    return result;
}

HomogeneityCheck measure_homogeneity(const Evaluator& f, std::size_t n, double declared,
                                     std::size_t trials, Seed seed)
{
    if (trials == 0)
        throw InvalidArgument("homogeneity check needs at least one trial");
    Engine engine = make_engine(seed, 0);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Vector x = random_unit(engine, n);
        double log_t = 0.0;
        while (std::abs(log_t) < 0.1)
            log_t = 6.0 * (uniform_open(engine) - 0.5);
        const double sign = uniform_open(engine) < 0.5 ? -1.0 : 1.0;
        Vector tx(x);
        for (double& v : tx)
            v *= sign * std::exp(log_t);
        const double y = std::log(f(tx)) - std::log(f(x));
        sxy += y * log_t;
        sxx += log_t * log_t;
    }
    HomogeneityCheck result;
    result.declared = declared;
    result.measured = sxy / sxx;
    result.passed = std::abs(result.measured - declared) <= 1e-9;
    return result;
}

HomogeneityCheck check_homogeneity(const HomogeneousFn& f, std::size_t trials, Seed seed)
{
    return measure_homogeneity([&f](std::span<const double> x) { return evaluate(f, x); }, f.dim(),
                               f.exponent(), trials, seed);
}

std::optional<std::string> pd_certificate(const HomogeneousFn& f)
{
    const double n = static_cast<double>(f.dim());
    const double p = f.exponent();
    if (p > -n && p < -n + 1.0)
        return "order in (-n, -n+1): every even positive homogeneous function is positive definite";
    if (!(p > -n && p < 0.0))
        return std::nullopt;
    return std::visit(
        overloaded{
            [](const DiscreteLrNorm& b) -> std::optional<std::string> {
                if (b.r <= 2.0)
                    return "discrete L_r norm with r <= 2";
                return std::nullopt;
            },
            [&](const MaxAbsNorm&) -> std::optional<std::string> {
                if (f.dim() == 2)
                    return "two-dimensional normed space embeds in L_1";
                return std::nullopt;
            },
            [](const EuclideanNorm&) -> std::optional<std::string> {
                return "weighted Euclidean norm (subspace of L_2)";
            },
            [](const LevyNorm& b) -> std::optional<std::string> {
                if (b.measure.exponent() <= 2.0)
                    return "Levy representation with exponent <= 2";
                return std::nullopt;
            },
        },
        f.base());
}

std::vector<Vector> kink_normals(const HomogeneousFn& f)
{
    const std::size_t n = f.dim();
    std::vector<Vector> out;
    if (std::holds_alternative<MaxAbsNorm>(f.base())) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                for (double sign : {1.0, -1.0}) {
                    Vector c(n, 0.0);
                    c[i] = 1.0;
                    c[j] = sign;
                    out.push_back(c);
                }
            }
        }
    } else if (const auto* lr = std::get_if<DiscreteLrNorm>(&f.base())) {
        out = lr->rows;
    } else if (const auto* lv = std::get_if<LevyNorm>(&f.base())) {
        for (const auto& e : lv->measure.entries())
            out.push_back(e.direction);
    }
    return out;
}

}  // namespace stablecorr
