#include "stablecorr/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "stablecorr/quadrature.hpp"

namespace stablecorr {

void require_moment_exists(double p, StableIndex q)
{
    if (!(p > -1.0))
        throw NonexistentExpectation("E|Z|^p is infinite for p <= -1 (p = " + std::to_string(p) +
                                     ")");
    if (!q.is_gaussian() && !(p < q.value()))
        throw NonexistentExpectation("E|Z|^p is infinite for p >= q when q < 2 (p = " +
                                     std::to_string(p) + ", q = " + std::to_string(q.value()) +
                                     ")");
    if (!std::isfinite(p))
        throw NonexistentExpectation("moment order must be finite");
}

double c_pq(double p, StableIndex q)
{
    require_moment_exists(p, q);
    if (p == 0.0)
        return 1.0;
    const double gaussian = std::exp2(p) * std::tgamma(0.5 * (1.0 + p)) / std::sqrt(std::numbers::pi);
    if (q.is_gaussian())
        return gaussian;
    return gaussian * std::tgamma(1.0 - p / q.value()) / std::tgamma(1.0 - 0.5 * p);
}

double c_pq_oracle(double p, StableIndex q)
{
    require_moment_exists(p, q);
    if (p == 0.0)
        return 1.0;
    constexpr double pi = std::numbers::pi;
    const double qv = q.value();
    QuadratureOptions opts;
    opts.rel_tol = 1e-11;

    if (p < 0.0) {
        // t = u^(1/s) removes the t^(s-1) endpoint singularity.
        const double s = -p;
        const auto r = integrate([&](double u) { return std::exp(-std::pow(u, qv / s)); }, 0.0,
                                 std::numeric_limits<double>::infinity(), opts);
        return r.value / s / (std::tgamma(s) * std::cos(0.5 * pi * s));
    }
    if (p < 2.0 && p < qv) {
        // [0, 1] with t = u^(1/(q-p)); [1, inf) with t = u^(-1/p).
        const double head = integrate(
                                [&](double u) {
                                    if (u == 0.0)
                                        return 1.0;
                                    const double y = std::pow(u, qv / (qv - p));
                                    return -std::expm1(-y) / y;
                                },
                                0.0, 1.0, opts)
                                .value /
                            (qv - p);
        const double tail = integrate(
                                [&](double u) {
                                    if (u == 0.0)
                                        return 1.0;
                                    return -std::expm1(-std::pow(u, -qv / p));
                                },
                                0.0, 1.0, opts)
                                .value /
                            p;
        const double cp = 2.0 * std::tgamma(1.0 + p) * std::sin(0.5 * pi * p) / pi;
        return cp * (head + tail);
    }
    // q = 2 and p >= 2: Z ~ N(0, 2), density exp(-z^2/4) / (2 sqrt(pi)).
    const auto r = integrate([&](double z) { return std::pow(z, p) * std::exp(-0.25 * z * z); },
                             0.0, std::numeric_limits<double>::infinity(), opts);
    return r.value / std::sqrt(pi);
}

double levy_sum(const SpectralRep& rep, const LevyMeasure& gamma)
{
    if (gamma.dim() != rep.dim())
        throw DimensionMismatch("Levy measure dimension " + std::to_string(gamma.dim()) +
                                " does not match representation dimension " +
                                std::to_string(rep.dim()));
    const double ratio = gamma.exponent() / rep.q();
    double s = 0.0;
    for (const auto& e : gamma.entries()) {
        const double form = q_form(rep, e.direction);
        s += e.weight * (ratio == 1.0 ? form : std::pow(form, ratio));
    }
    return s;
}

double levy_expectation(const SpectralRep& rep, const LevyMeasure& gamma, double p)
{
    if (p != gamma.exponent())
        throw InvalidArgument("Levy measure exponent " + std::to_string(gamma.exponent()) +
                              " does not match requested power " + std::to_string(p));
    if (!(p > 0.0))
        throw InvalidArgument("Levy representation requires a positive exponent");
    if (!rep.index().is_gaussian() && p > rep.q())
        throw NonexistentExpectation("E||X||^p does not exist for p > q < 2");
    return c_pq(p, rep.index()) * levy_sum(rep, gamma);
}

HomogeneousFn norm_from_levy(const LevyMeasure& gamma)
{
    if (!gamma.spans())
        throw InvalidArgument("Levy measure entries do not span R^n; norm is degenerate");
    return HomogeneousFn(LevyNorm{gamma}, 1.0);
}

std::string to_string(EstimatorKind kind)
{
    return kind == EstimatorKind::plain ? "plain" : "median_of_means";
}

namespace {

bool order_admissible(double p, const SpectralRep& rep)
{
    const double rank = static_cast<double>(rep.rank());
    if (!(p > -rank))
        return false;
    return rep.index().is_gaussian() || p < rep.q();
}

}  // namespace

bool expectation_exists(const HomogeneousFn& f, const SpectralRep& rep)
{
    return order_admissible(f.exponent(), rep);
}

bool variance_exists(const HomogeneousFn& f, const SpectralRep& rep)
{
    return order_admissible(2.0 * f.exponent(), rep);
}

constexpr std::size_t kMinTail = 32;

TailCorrection replace_pareto_tail(std::vector<double>& values, double index, double fraction)
{
    if (!(index > 1.0))
        throw InvalidArgument("Pareto tail replacement needs a tail index above 1");
    if (!(fraction > 0.0 && fraction < 0.5))
        throw InvalidArgument("tail fraction must lie in (0, 0.5)");
    const std::size_t n = values.size();
    auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    if (k + 1 > n)
        throw InvalidArgument("too few values for the tail replacement");
    std::vector<double> top = values;
    std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(), std::greater<>());
    top.resize(k + 1);
    std::sort(top.begin(), top.end(), std::greater<>());

    // Shrink k until the Hill estimate over the top k matches the known index.
    TailCorrection tc{index, 0.0, 0, 0.0};
    for (;;) {
        const double t = top[k];
        double hill = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            hill += std::log(top[i] / t);
        tc.threshold = t;
        tc.hill_ratio = index * hill / static_cast<double>(k);
        const bool consistent = std::abs(tc.hill_ratio - 1.0) <= 3.0 / std::sqrt(static_cast<double>(k));
        if (consistent || k / 4 < kMinTail)
            break;
        k /= 4;
    }
    const double tail_mean = tc.threshold * index / (index - 1.0);
    for (double& v : values)
        if (v > tc.threshold) {
            v = tail_mean;
            ++tc.replaced;
        }
    return tc;
}

MCEstimate summarize(std::span<const double> values, EstimatorKind kind, std::size_t blocks)
{
    MCEstimate est;
    est.n_samples = values.size();
    est.estimator = kind;
    if (kind == EstimatorKind::plain) {
        if (values.size() < 2)
            throw InvalidArgument("plain estimator needs at least 2 samples");
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values)
            ss += (v - mean) * (v - mean);
        est.value = mean;
        est.std_error = std::sqrt(ss / (n - 1.0) / n);
        return est;
    }
    if (blocks < 3)
        throw InvalidArgument("median-of-means needs at least 3 blocks");
    if (values.size() < 2 * blocks)
        throw InvalidArgument("median-of-means with " + std::to_string(blocks) +
                              " blocks needs at least " + std::to_string(2 * blocks) + " samples");
    std::vector<double> means(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * values.size() / blocks;
        const std::size_t end = (b + 1) * values.size() / blocks;
        means[b] = std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(begin),
                                   values.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
                   static_cast<double>(end - begin);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    const double med = median(means);
    std::vector<double> dev(blocks);
    for (std::size_t b = 0; b < blocks; ++b)
        dev[b] = std::abs(means[b] - med);
    const double mad = median(dev);
    est.value = med;
    est.blocks = blocks;
    est.deviation_bound = 1.4826 * mad;
    return est;
}

MCEstimate mc_expectation(const HomogeneousFn& f, const SpectralRep& rep, std::size_t count,
                          Seed seed, EstimatorRequest request, std::size_t workers)
{
    if (f.dim() != rep.dim())
        throw DimensionMismatch("function dimension " + std::to_string(f.dim()) +
                                " does not match representation dimension " +
                                std::to_string(rep.dim()));
    if (!expectation_exists(f, rep))
        throw NonexistentExpectation(
            "E f(X) is infinite: order " + std::to_string(f.exponent()) + " is outside (-" +
            std::to_string(rep.rank()) + ", " + (rep.index().is_gaussian() ? "inf" : std::to_string(rep.q())) +
            ") for this representation");
    const bool finite_variance = variance_exists(f, rep);
    EstimatorKind kind = finite_variance ? EstimatorKind::plain : EstimatorKind::median_of_means;
    if (request.mode == EstimatorRequest::Mode::plain) {
        if (!finite_variance)
            throw InvalidArgument(
                "f(X) has infinite variance (2p outside the admissible range); use the "
                "median-of-means estimator");
        kind = EstimatorKind::plain;
    } else if (request.mode == EstimatorRequest::Mode::median_of_means) {
        kind = EstimatorKind::median_of_means;
    }
    if (count < 2)
        throw InvalidArgument("Monte Carlo estimate needs at least 2 samples");

    auto values = map_samples(
        rep, count, seed,
        [&f](std::span<const double> x) {
            // A zero draw (probability zero) is reported below, not dropped.
            const double base = evaluate_norm(f.base(), x);
            if (base == 0.0)
                return f.exponent() > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            return std::pow(base, f.exponent());
        },
        workers);
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericalFailure("Monte Carlo draw hit the singularity of f at the origin");
    std::optional<TailCorrection> tail;
    if (!finite_variance && f.exponent() < 0.0 && request.tail_fraction > 0.0)
        tail = replace_pareto_tail(values, static_cast<double>(rep.rank()) / -f.exponent(),
                                   request.tail_fraction);
    MCEstimate est = summarize(values, kind, request.blocks);
    if (tail) {
        est.tail = tail;
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                            static_cast<double>(values.size());
        if (est.deviation_bound) {
            const double median_se =
                std::sqrt(std::numbers::pi / 2.0) * *est.deviation_bound / std::sqrt(static_cast<double>(est.blocks));
            est.deviation_bound = std::hypot(median_se, est.value - mean);
        }
    }
    est.rep_hash = rep.hash();
    est.seed = seed;
    return est;
}

}  // namespace stablecorr
