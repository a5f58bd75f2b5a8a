#include "stablecorr/verify.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "stablecorr/fourier_pd.hpp"
#include "stablecorr/oracle2d.hpp"

namespace stablecorr {
namespace {

double lq_power(const Vector& v, double q)
{
    double s = 0.0;
    for (double x : v)
        s += std::pow(std::abs(x), q);
    return s;
}

void require_compatible(const DiscreteLqVector& x, const DiscreteLqVector& y)
{
    if (x.size() != y.size())
        throw DimensionMismatch("L_q vectors of sizes " + std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
    if (!(x.index() == y.index()))
        throw InvalidArgument("L_q vectors with different indices");
}

struct SumDiff
{
    Vector sum;
    Vector diff;
};

SumDiff sum_diff(const DiscreteLqVector& x, const DiscreteLqVector& y)
{
    SumDiff out{Vector(x.size()), Vector(x.size())};
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.sum[i] = x.values()[i] + y.values()[i];
        out.diff[i] = x.values()[i] - y.values()[i];
    }
    return out;
}

std::string format_entry(const LevyEntry& e)
{
    std::ostringstream s;
    s.precision(17);
    s << "(" << e.weight << ", [";
    for (std::size_t i = 0; i < e.direction.size(); ++i)
        s << (i ? ", " : "") << e.direction[i];
    s << "])";
    return s.str();
}

// First entry whose v-negated direction (up to sign) is absent with equal weight.
std::optional<LevyEntry> symmetry_witness(const LevyMeasure& gamma, std::size_t k)
{
    for (const auto& e : gamma.entries()) {
        Vector flipped = e.direction;
        for (std::size_t i = k; i < flipped.size(); ++i)
            flipped[i] = -flipped[i];
        bool found = false;
        for (const auto& other : gamma.entries()) {
            if (std::abs(other.weight - e.weight) > 1e-12)
                continue;
            double plus = 0.0;
            double minus = 0.0;
            for (std::size_t i = 0; i < flipped.size(); ++i) {
                plus = std::max(plus, std::abs(other.direction[i] - flipped[i]));
                minus = std::max(minus, std::abs(other.direction[i] + flipped[i]));
            }
            if (std::min(plus, minus) <= 1e-12) {
                found = true;
                break;
            }
        }
        if (!found)
            return e;
    }
    return std::nullopt;
}

double log_uniform(Engine& engine, double lo, double hi)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(engine));
}

Vector unit_vector(Engine& engine, std::size_t n)
{
    std::normal_distribution<double> normal;
    for (;;) {
        Vector v(n);
        double s = 0.0;
        for (double& x : v) {
            x = normal(engine);
            s += x * x;
        }
        if (s > 1e-12) {
            for (double& x : v)
                x /= std::sqrt(s);
            return v;
        }
    }
}

}  // namespace

DiscreteLqVector::DiscreteLqVector(Vector values, StableIndex q) : values_(std::move(values)), q_(q)
{
    for (double v : values_)
        if (!std::isfinite(v))
            throw InvalidArgument("L_q vector entries must be finite");
}

double DiscreteLqVector::norm_q_power() const { return lq_power(values_, q_.value()); }

double check_parallelogram_q(const DiscreteLqVector& x, const DiscreteLqVector& y)
{
    require_compatible(x, y);
    const double q = x.index().value();
    const auto sd = sum_diff(x, y);
    return 2.0 * (x.norm_q_power() + y.norm_q_power()) - lq_power(sd.sum, q) - lq_power(sd.diff, q);
}

double check_exp_ineq(const DiscreteLqVector& x, const DiscreteLqVector& y)
{
    require_compatible(x, y);
    const double q = x.index().value();
    const auto sd = sum_diff(x, y);
    return std::exp(-lq_power(sd.sum, q)) + std::exp(-lq_power(sd.diff, q)) -
           2.0 * std::exp(-x.norm_q_power() - y.norm_q_power());
}

bool power_regime_valid(double p, StableIndex q)
{
    return (p > 0.0 && p <= q.value()) || power_regime_reversed(p, q);
}

bool power_regime_reversed(double p, StableIndex q) { return q.is_gaussian() && p > 2.0; }

double check_power_ineq(const DiscreteLqVector& x, const DiscreteLqVector& y, double p)
{
    require_compatible(x, y);
    const StableIndex qi = x.index();
    if (!power_regime_valid(p, qi))
        throw InvalidArgument("power inequality needs 0 < p <= q, or q = 2 and p > 2");
    const double q = qi.value();
    const auto sd = sum_diff(x, y);
    const double left = 2.0 * std::pow(x.norm_q_power() + y.norm_q_power(), p / q);
    const double right = std::pow(lq_power(sd.sum, q), p / q) + std::pow(lq_power(sd.diff, q), p / q);
    return power_regime_reversed(p, qi) ? right - left : left - right;
}

double power_ineq_scale(const DiscreteLqVector& x, const DiscreteLqVector& y, double p)
{
    require_compatible(x, y);
    const double q = x.index().value();
    return 2.0 * std::pow(x.norm_q_power() + y.norm_q_power(), p / q);
}

Prop1Result verify_prop1(const SpectralRep& rep, BlockSplit split, const LevyMeasure& gamma, double p)
{
    split.validate(rep.dim());
    if (gamma.dim() != rep.dim())
        throw DimensionMismatch("Levy measure dimension does not match the representation");
    if (gamma.exponent() != p)
        throw InvalidArgument("Levy measure exponent differs from p");
    if (!power_regime_valid(p, rep.index()))
        throw InvalidArgument("the exact comparison needs 0 < p <= q, or q = 2 and p > 2");
    if (const auto w = symmetry_witness(gamma, split.k()))
        throw InvalidArgument("Levy measure is not closed under negating coordinates " +
                              std::to_string(split.k()) + ".." + std::to_string(rep.dim() - 1) +
                              "; witness entry " + format_entry(*w));

    const auto y = decouple(rep, split);
    const auto xm = reflect(rep, split);
    Prop1Result out;
    out.reversed = power_regime_reversed(p, rep.index());
    out.normalized = p == rep.q() && !rep.index().is_gaussian();
    if (out.normalized) {
        out.ex = levy_sum(rep, gamma);
        out.ey = levy_sum(y, gamma);
        out.ex_minus = levy_sum(xm, gamma);
    } else {
        out.ex = levy_expectation(rep, gamma, p);
        out.ey = levy_expectation(y, gamma, p);
        out.ex_minus = levy_expectation(xm, gamma, p);
    }
    const double sign = out.reversed ? -1.0 : 1.0;
    out.margin = sign * (out.ey - out.ex);
    out.margin_sum = sign * (2.0 * out.ey - out.ex - out.ex_minus);
    out.scale = std::max({std::abs(out.ex), std::abs(out.ey), std::abs(out.ex_minus)});
    const double tol = 1e-10 * out.scale;
    out.passed = out.margin >= -tol && out.margin_sum >= -tol;
    return out;
}

Thm1Result verify_thm1(const SpectralRep& rep, BlockSplit split, const HomogeneousFn& f,
                       std::size_t samples, Seed seed, const Thm1Options& options)
{
    const std::size_t n = rep.dim();
    if (f.dim() != n)
        throw DimensionMismatch("function dimension does not match the representation");
    split.validate(n);
    const double p = f.exponent();
    if (!(p > -static_cast<double>(n) && p < 0.0))
        throw InvalidArgument("the comparison needs p in (-n, 0)");
    if (!check_homogeneity(f, 100, seed).passed)
        throw InvalidArgument("f fails the homogeneity check");
    const auto sym = check_block_symmetry(f, split, 200, seed);
    if (!sym.passed) {
        std::ostringstream s;
        s.precision(17);
        s << "f(u, v) != f(u, -v) at";
        for (double v : *sym.witness)
            s << ' ' << v;
        throw InvalidArgument(s.str());
    }

    Thm1Result out;
    out.certificate = pd_certificate(f);
    if (!out.certificate && options.run_pd_check && (n == 2 || n == 3)) {
        PdOptions po;
        po.workers = options.workers;
        const auto report = pd_check(f, default_family(n, PdMode::full_space), PdMode::full_space, po);
        if (report.verdict == PdVerdict::consistent_with_pd)
            out.certificate = "pd_check consistent over " + report.family;
    }
    if (!out.certificate)
        out.flags.push_back("uncertified_pd");

    const auto y = decouple(rep, split);
    if (!expectation_exists(f, y))
        throw NonexistentExpectation("E f(Y) is infinite; the comparison is undefined");
    const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
    out.y = mc_expectation(f, y, samples, {seed.seed, 2 * seed.stream_id + 1}, {}, workers);
    if (!expectation_exists(f, rep)) {
        out.flags.push_back("lhs_infinite");
        out.margin = std::numeric_limits<double>::infinity();
        out.combined_uncertainty = out.y.uncertainty();
        out.passed = true;
        if (options.oracle)
            out.oracle_skipped = "E f(X) is infinite";
        return out;
    }
    out.x = mc_expectation(f, rep, samples, {seed.seed, 2 * seed.stream_id}, {}, workers);
    out.margin = out.x->value - out.y.value;
    out.combined_uncertainty = std::hypot(out.x->uncertainty(), out.y.uncertainty());
    out.passed = out.margin >= -3.0 * out.combined_uncertainty;

    if (options.oracle) {
        if (n != 2) {
            out.oracle_skipped = "oracle is two-dimensional";
            return out;
        }
        try {
            GridSpec spec;
            spec.workers = options.workers;
            const auto ox = adaptive_oracle(f, rep, spec);
            const auto oy = adaptive_oracle(f, y, spec);
            OracleCheck c;
            c.ex = ox.value;
            c.ey = oy.value;
            c.ex_error = ox.error;
            c.ey_error = oy.error;
            c.margin = ox.value - oy.value;
            c.error = ox.error + oy.error;
            auto agrees = [](double oracle, const MCEstimate& mc) {
                return std::abs(oracle - mc.value) <=
                       std::max(3.0 * mc.uncertainty(), 1e-2 * std::abs(oracle));
            };
            c.agrees_with_mc = agrees(c.ex, *out.x) && agrees(c.ey, out.y);
            c.passed = c.margin >= -c.error && c.agrees_with_mc;
            out.oracle = c;
        } catch (const InvalidArgument& e) {
            out.oracle_skipped = e.what();
        } catch (const NumericalFailure& e) {
            out.oracle_skipped = e.what();
        }
    }
    return out;
}

Thm1Result verify_cor3(const SpectralRep& rep, BlockSplit split, double p, std::size_t samples,
                       Seed seed, const Thm1Options& options)
{
    const double n = static_cast<double>(rep.dim());
    if (!(p > -n && p < -n + 1.0))
        throw InvalidArgument("the max-abs comparison needs p in the open interval (-n, -n+1)");
    return verify_thm1(rep, split, max_abs_power(rep.dim(), p), samples, seed, options);
}

DiscreteLqVector random_lq_vector(Engine& engine, std::size_t size, StableIndex q)
{
    std::cauchy_distribution<double> cauchy;
    Vector v(size);
    for (double& x : v)
        x = cauchy(engine);
    return DiscreteLqVector(std::move(v), q);
}

SpectralRep random_heavy_rep(Engine& engine, std::size_t n, StableIndex q, std::size_t min_atoms,
                             std::size_t max_atoms)
{
    if (min_atoms == 0 || max_atoms < min_atoms)
        throw InvalidArgument("atom count range is empty");
    std::uniform_int_distribution<std::size_t> count(min_atoms, max_atoms);
    std::cauchy_distribution<double> cauchy;
    const std::size_t m = count(engine);
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < m; ++j) {
        Vector a(n);
        for (double& x : a)
            x = cauchy(engine);
        atoms.push_back({log_uniform(engine, 0.25, 4.0), std::move(a)});
    }
    return SpectralRep(n, q, std::move(atoms));
}

BlockSplit random_split(Engine& engine, std::size_t n)
{
    if (n < 2)
        throw InvalidArgument("a block split needs n >= 2");
    std::uniform_int_distribution<std::size_t> k(1, n - 1);
    return BlockSplit(k(engine));
}

LevyMeasure random_block_symmetric_measure(Engine& engine, std::size_t n, BlockSplit split,
                                           double p, std::size_t pairs)
{
    split.validate(n);
    std::vector<LevyEntry> entries;
    for (std::size_t m = 0; m < pairs; ++m) {
        const Vector xi = unit_vector(engine, n);
        Vector flipped = xi;
        for (std::size_t i = split.k(); i < n; ++i)
            flipped[i] = -flipped[i];
        const double w = log_uniform(engine, 0.25, 4.0);
        entries.push_back({w, xi});
        entries.push_back({w, flipped});
    }
    return LevyMeasure(p, std::move(entries));
}

std::string to_string(NormFamily family)
{
    switch (family) {
    case NormFamily::max_abs:
        return "max_abs";
    case NormFamily::l1:
        return "l1";
    case NormFamily::euclidean:
        return "euclidean";
    case NormFamily::lr_subspace:
        return "lr_subspace";
    }
    return "unknown";
}

NormFamily norm_family_from_string(const std::string& name)
{
    for (auto f : {NormFamily::max_abs, NormFamily::l1, NormFamily::euclidean, NormFamily::lr_subspace})
        if (to_string(f) == name)
            return f;
    throw InvalidArgument("unknown norm family '" + name + "'");
}

HomogeneousFn random_norm_power(Engine& engine, NormFamily family, std::size_t n, BlockSplit split,
                                double p)
{
    split.validate(n);
    switch (family) {
    case NormFamily::max_abs:
        return HomogeneousFn(MaxAbsNorm{n}, p, split.k());
    case NormFamily::l1:
        return HomogeneousFn(l1_power(n, p).base(), p, split.k());
    case NormFamily::euclidean: {
        Vector w(n);
        for (double& x : w)
            x = log_uniform(engine, 0.25, 4.0);
        return HomogeneousFn(EuclideanNorm{std::move(w)}, p, split.k());
    }
    case NormFamily::lr_subspace: {
        static constexpr double kR[] = {0.5, 1.0, 1.5, 2.0};
        std::uniform_int_distribution<int> pick(0, 3);
        const double r = kR[pick(engine)];
        std::vector<Vector> rows;
        for (std::size_t m = 0; m < n; ++m) {
            const Vector b = unit_vector(engine, n);
            Vector flipped = b;
            for (std::size_t i = split.k(); i < n; ++i)
                flipped[i] = -flipped[i];
            rows.push_back(b);
            rows.push_back(flipped);
        }
        return HomogeneousFn(DiscreteLrNorm{std::move(rows), r}, p, split.k());
    }
    }
    throw InvalidArgument("unknown norm family");
}

}  // namespace stablecorr
