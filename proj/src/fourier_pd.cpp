#include "stablecorr/fourier_pd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "stablecorr/errors.hpp"
#include "stablecorr/sampling.hpp"

namespace stablecorr {

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(std::span<const double> x)
{
    return std::sqrt(dot(x, x));
}

void require_window(std::size_t n, double p)
{
    if (n != 2 && n != 3)
        throw InvalidArgument("positive-definiteness checks support n = 2 and n = 3 only (n = " +
                              std::to_string(n) + ")");
    if (!(p > -static_cast<double>(n) && p < 0.0))
        throw InvalidArgument("order p = " + std::to_string(p) + " is outside (-n, 0) for n = " +
                              std::to_string(n));
}

// Orthonormal completion of the unit vector e (n = 2 or 3).
std::vector<Vector> frame(const Vector& e)
{
    const std::size_t n = e.size();
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(e[i]) < std::abs(e[j]))
            j = i;
    Vector u(n, 0.0);
    u[j] = 1.0;
    const double d = dot(u, e);
    for (std::size_t i = 0; i < n; ++i)
        u[i] -= d * e[i];
    const double nu = norm2(u);
    for (double& v : u)
        v /= nu;
    if (n == 2)
        return {u};
    Vector w{e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]};
    return {u, w};
}

// Sorted breakpoints in [lo, hi] including both ends.
std::vector<double> with_ends(std::vector<double> pts, double lo, double hi)
{
    pts.push_back(lo);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double x : pts) {
        if (x < lo || x > hi)
            continue;
        if (out.empty() || x - out.back() > 1e-12)
            out.push_back(x);
    }
    if (out.back() < hi)
        out.back() = hi;
    return out;
}

// Angles psi in [0, pi/2] at which the polar circles around `axis` meet
// (n = 2) or become tangent to (n = 3) a kink plane.
std::vector<double> polar_breaks(const std::vector<Vector>& normals, const Vector& axis,
                                 const std::vector<Vector>& basis)
{
    std::vector<double> out;
    for (const auto& c : normals) {
        const double ce = dot(c, axis);
        double cu = 0.0;
        for (const auto& b : basis)
            cu += dot(c, b) * dot(c, b);
        cu = std::sqrt(cu);
        out.push_back(std::atan2(std::abs(ce), cu));
    }
    return out;
}

// Composite Gauss nodes on [0, pi/2] for the coarse and fine (doubled) rules,
// with panel edges at the polar breakpoints. Weights carry the factor 2 from
// the symmetry psi -> pi - psi.
struct AngularProfile
{
    Vector axis;
    std::vector<double> cos_psi[2];
    std::vector<double> weight[2];
    std::vector<double> value[2];
    std::vector<double> value_error[2];
};

double azimuth_integral(const HomogeneousFn& f, const std::vector<Vector>& normals, const Vector& axis,
                        const std::vector<Vector>& basis, double c, double s, double tol,
                        double* error)
{
    std::vector<double> cuts;
    for (const auto& nrm : normals) {
        const double a = dot(nrm, basis[0]);
        const double b = dot(nrm, basis[1]);
        const double r = std::hypot(a, b) * s;
        if (r == 0.0)
            continue;
        const double rhs = -dot(nrm, axis) * c / r;
        if (std::abs(rhs) > 1.0)
            continue;
        const double center = std::atan2(b, a);
        const double half = std::acos(rhs);
        for (double phi : {center + half, center - half})
            cuts.push_back(phi - 2.0 * kPi * std::floor(phi / (2.0 * kPi)));
    }
    const auto pts = with_ends(cuts, 0.0, 2.0 * kPi);
    QuadratureOptions qo;
    qo.rel_tol = tol;
    double total = 0.0;
    *error = 0.0;
    Vector t(3);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto r = integrate(
            [&](double phi) {
                const double cp = std::cos(phi);
                const double sp = std::sin(phi);
                for (std::size_t j = 0; j < 3; ++j)
                    t[j] = c * axis[j] + s * (cp * basis[0][j] + sp * basis[1][j]);
                return evaluate(f, t);
            },
            pts[i], pts[i + 1], qo);
        total += r.value;
        *error += r.error;
    }
    return total;
}

AngularProfile make_profile(const HomogeneousFn& f, const Vector& axis, const PdOptions& options)
{
    const std::size_t n = axis.size();
    const auto basis = frame(axis);
    const auto rule = gauss_legendre(options.order);
    const auto normals = kink_normals(f);
    const auto breaks = with_ends(polar_breaks(normals, axis, basis), 0.0, 0.5 * kPi);
    AngularProfile prof;
    prof.axis = axis;
    Vector theta(n);
    for (int res = 0; res < 2; ++res) {
        const double target = 0.5 * kPi / static_cast<double>(options.panels << res);
        for (std::size_t piece = 0; piece + 1 < breaks.size(); ++piece) {
            const double lo = breaks[piece];
            const double len = breaks[piece + 1] - lo;
            const std::size_t panels =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / target))) << res;
            const double h = len / static_cast<double>(panels);
            for (std::size_t k = 0; k < panels; ++k) {
                for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                    const double psi = lo + h * (static_cast<double>(k) + 0.5 * (rule.nodes[i] + 1.0));
                    const double c = std::cos(psi);
                    const double s = std::sin(psi);
                    double value = 0.0;
                    double err = 0.0;
                    if (n == 2) {
                        for (double sign : {1.0, -1.0}) {
                            for (std::size_t j = 0; j < 2; ++j)
                                theta[j] = c * axis[j] + sign * s * basis[0][j];
                            value += evaluate(f, theta);
                        }
                    } else {
                        value = s * azimuth_integral(f, normals, axis, basis, c, s,
                                                     options.azimuth_tol, &err);
                        err *= s;
                    }
                    prof.cos_psi[res].push_back(c);
                    prof.weight[res].push_back(h * rule.weights[i]);
                    prof.value[res].push_back(value);
                    prof.value_error[res].push_back(err);
                }
            }
        }
    }
    return prof;
}

// R(beta) = int_0^inf s^(a-1) cos(beta s) k(s) ds on [0, beta_max], sampled at
// Chebyshev points of each piece and evaluated by barycentric interpolation.
// Pieces break where R loses smoothness.
class RadialTable
{
public:
    struct Kernel
    {
        std::function<double(double)> k;
        double c2;            // k(s) = 1 - c2 s^2 + O(s^4)
        double s_max;
        double tail_bound;    // bound on the integral beyond s_max
        std::optional<double> kink;
    };

    RadialTable(Kernel kernel, double a, double beta_max, double tol)
        : kernel_(std::move(kernel)), a_(a)
    {
        s0_ = 1e-3 / std::max(1.0, beta_max);
        std::vector<double> cuts{0.0};
        if (kernel_.kink && *kernel_.kink < beta_max)
            cuts.push_back(*kernel_.kink);
        cuts.push_back(beta_max);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            pieces_.push_back(build(cuts[i], cuts[i + 1], tol));
        error_ = node_error_ + kernel_.tail_bound;
        for (const auto& piece : pieces_)
            error_ += piece.interp_error;
    }

    double operator()(double beta) const
    {
        beta = std::abs(beta);
        for (const auto& piece : pieces_)
            if (beta <= piece.hi)
                return piece.eval(beta);
        return pieces_.back().eval(beta);
    }

    double error() const { return error_; }

private:
    struct Piece
    {
        double lo = 0.0;
        double hi = 0.0;
        std::vector<double> values;  // at x_j = cos(pi j / m), j = 0..m
        double interp_error = 0.0;

        double eval(double beta) const
        {
            const std::size_t m = values.size() - 1;
            if (m == 0)
                return values[0];
            const double x = (2.0 * beta - lo - hi) / (hi - lo);
            double num = 0.0;
            double den = 0.0;
            for (std::size_t j = 0; j <= m; ++j) {
                const double xj = x_of(j, m);
                if (x == xj)
                    return values[j];
                double w = (j % 2 == 0) ? 1.0 : -1.0;
                if (j == 0 || j == m)
                    w *= 0.5;
                w /= (x - xj);
                num += w * values[j];
                den += w;
            }
            return num / den;
        }
    };

    static double x_of(std::size_t j, std::size_t m)
    {
        return std::cos(kPi * static_cast<double>(j) / static_cast<double>(m));
    }

    Piece build(double lo, double hi, double tol)
    {
        Piece piece{lo, hi, {}, 0.0};
        if (hi == lo) {
            piece.values = {node_value(lo)};
            return piece;
        }
        auto beta_of = [&](double x) { return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x; };
        std::size_t m = 16;
        for (std::size_t j = 0; j <= m; ++j)
            piece.values.push_back(node_value(beta_of(x_of(j, m))));
        for (;;) {
            // Second-kind points of 2m contain those of m at even indices.
            std::vector<double> finer(2 * m + 1);
            double diff = 0.0;
            for (std::size_t j = 0; j <= 2 * m; ++j) {
                if (j % 2 == 0) {
                    finer[j] = piece.values[j / 2];
                    continue;
                }
                const double beta = beta_of(x_of(j, 2 * m));
                finer[j] = node_value(beta);
                diff = std::max(diff, std::abs(finer[j] - piece.eval(beta)));
            }
            piece.values = std::move(finer);
            double peak = 0.0;
            for (double v : piece.values)
                peak = std::max(peak, std::abs(v));
            if (diff <= std::max(tol * peak, 8.0 * node_error_)) {
                piece.interp_error = diff;
                return piece;
            }
            if (m >= 4096)
                throw NumericalFailure("radial profile interpolation did not converge on [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
            m *= 2;
        }
    }

    double node_value(double beta)
    {
        const double a = a_;
        const double s0 = s0_;
        const double head = std::pow(s0, a) / a -
                            (0.5 * beta * beta + kernel_.c2) * std::pow(s0, a + 2.0) / (a + 2.0);
        QuadratureOptions qo;
        qo.rel_tol = 1e-12;
        qo.max_depth = 30;
        // Log scale below s = 1, linear above with about two periods per panel.
        const double split = std::min(1.0, kernel_.s_max);
        auto r = integrate(
            [&](double u) {
                const double s = std::exp(u);
                return std::exp(a * u) * std::cos(beta * s) * kernel_.k(s);
            },
            std::log(s0), std::log(split), qo);
        if (kernel_.s_max > split) {
            const double periods = (kernel_.s_max - split) * std::max(beta, 1.0) / (2.0 * kPi);
            qo.initial_panels = static_cast<std::size_t>(std::ceil(periods / 2.0));
            const auto hi = integrate(
                [&](double s) { return std::pow(s, a - 1.0) * std::cos(beta * s) * kernel_.k(s); }, split,
                kernel_.s_max, qo);
            r.value += hi.value;
            r.error += hi.error;
        }
        node_error_ = std::max(node_error_, r.error + std::pow(s0, a + 4.0) *
                                                          std::pow(beta * beta + 1.0, 2));
        return head + r.value;
    }

    Kernel kernel_;
    double a_;
    double s0_ = 0.0;
    std::vector<Piece> pieces_;
    double node_error_ = 0.0;
    double error_ = 0.0;
};

RadialTable::Kernel gaussian_kernel()
{
    return {[](double s) { return std::exp(-0.5 * s * s); }, 0.5, 13.0, 0.0, std::nullopt};
}

// h(s) = Gamma(mu + 1) (2/s)^mu J_mu(s): Fourier transform of the unit-mass
// bump of unit radius, mu = power + n/2.
RadialTable::Kernel bump_kernel(std::size_t n, double power, double a)
{
    const double mu = power + 0.5 * static_cast<double>(n);
    const double lg = std::lgamma(mu + 1.0) + mu * std::log(2.0);
    auto k = [mu, lg](double s) {
        if (s < 1e-4)
            return 1.0 - s * s / (4.0 * (mu + 1.0));
        return std::exp(lg - mu * std::log(s)) * boost::math::cyl_bessel_j(mu, s);
    };
    // |J_mu(s)| <= 0.7858 s^(-1/3) gives the tail bound beyond s_max.
    const double decay = mu + 1.0 / 3.0 - a;
    auto tail = [&](double s) { return std::exp(lg) * 0.7858 * std::pow(s, -decay) / decay; };
    double s_max = 20.0;
    while (tail(s_max) > 1e-11 && s_max < 2000.0)
        s_max *= 1.25;
    // The projection of the bump has finite smoothness at the edge of its
    // support, which sits at beta = 1 after scaling.
    return {k, 1.0 / (4.0 * (mu + 1.0)), s_max, tail(s_max), 1.0};
}

// Radial scale and normalized frequency for a test function: the inner
// integral equals scale^(-a) R(beta_0 cos psi).
struct RadialData
{
    double length;    // sigma or bump radius
    double beta0;     // |center| / length
    Vector axis;
};

RadialData radial_data(const TestFunction& phi)
{
    RadialData d;
    Vector center;
    if (const auto* g = std::get_if<GaussianTest>(&phi.shape)) {
        d.length = g->sigma;
        center = g->center;
    } else {
        const auto& b = std::get<BumpTest>(phi.shape);
        d.length = b.radius;
        center = b.center;
    }
    const double r = norm2(center);
    d.beta0 = r / d.length;
    d.axis.assign(center.size(), 0.0);
    if (r == 0.0) {
        d.axis[0] = 1.0;
    } else {
        for (std::size_t i = 0; i < center.size(); ++i)
            d.axis[i] = center[i] / r;
    }
    return d;
}

template <class Radial>
ActionResult combine(const AngularProfile& prof, const Radial& radial, double radial_error,
                     double beta0, double factor)
{
    double q[2] = {0.0, 0.0};
    double extra = 0.0;
    for (int res = 0; res < 2; ++res) {
        for (std::size_t i = 0; i < prof.cos_psi[res].size(); ++i) {
            const double rv = radial(beta0 * prof.cos_psi[res][i]);
            q[res] += prof.weight[res][i] * prof.value[res][i] * rv;
            if (res == 1)
                extra += prof.weight[res][i] *
                         (std::abs(rv) * prof.value_error[res][i] +
                          std::abs(prof.value[res][i]) * radial_error);
        }
    }
    return {factor * q[1], std::abs(factor) * (std::abs(q[1] - q[0]) + extra)};
}

void validate_test(const TestFunction& phi)
{
    if (!(phi.scale >= 0.0) || !std::isfinite(phi.scale))
        throw InvalidArgument("test function scale must be finite and nonnegative");
    if (const auto* g = std::get_if<GaussianTest>(&phi.shape)) {
        if (!(g->sigma > 0.0) || !std::isfinite(g->sigma))
            throw InvalidArgument("Gaussian test width must be positive");
        if (g->center.empty())
            throw InvalidArgument("test function center is empty");
    } else {
        const auto& b = std::get<BumpTest>(phi.shape);
        if (!(b.radius > 0.0) || !(b.power > 0.0))
            throw InvalidArgument("bump radius and power must be positive");
        if (!(norm2(b.center) > b.radius))
            throw InvalidArgument("bump support must avoid the origin (|center| > radius)");
    }
}

double kernel_exponent(const HomogeneousFn& f)
{
    return static_cast<double>(f.dim()) + f.exponent();
}

RadialTable make_table(const HomogeneousFn& f, bool gaussian, double power, double beta_max,
                       const PdOptions& options)
{
    const double a = kernel_exponent(f);
    return RadialTable(gaussian ? gaussian_kernel() : bump_kernel(f.dim(), power, a), a, beta_max,
                       options.table_tol);
}

ActionResult action_with(const HomogeneousFn& f, const TestFunction& phi, const AngularProfile& prof,
                         const RadialTable& table)
{
    const auto d = radial_data(phi);
    const double factor = phi.scale * std::pow(d.length, -kernel_exponent(f));
    return combine(prof, table, table.error(), d.beta0, factor);
}

}  // namespace

double radial_fourier_weight(std::size_t n, double p)
{
    const double a = static_cast<double>(n) + p - 1.0;
    if (!(a > -1.0 && a < 0.0))
        throw InvalidArgument("n + p - 1 = " + std::to_string(a) + " is outside (-1, 0)");
    const double np = static_cast<double>(n) + p;
    return std::exp2(np) * std::sqrt(kPi) * std::tgamma(0.5 * np) / std::tgamma(0.5 * (1.0 - np));
}

TestFunction gaussian_test(Vector center, double sigma, double scale)
{
    TestFunction phi{GaussianTest{std::move(center), sigma}, scale};
    validate_test(phi);
    return phi;
}

TestFunction bump_test(Vector center, double radius, double power, double scale)
{
    TestFunction phi{BumpTest{std::move(center), radius, power}, scale};
    validate_test(phi);
    return phi;
}

std::size_t test_dim(const TestFunction& phi)
{
    return std::visit([](const auto& s) { return s.center.size(); }, phi.shape);
}

double test_value(const TestFunction& phi, std::span<const double> xi)
{
    if (xi.size() != test_dim(phi))
        throw DimensionMismatch("test function dimension mismatch");
    const double n = static_cast<double>(xi.size());
    if (const auto* g = std::get_if<GaussianTest>(&phi.shape)) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i)
            d2 += (xi[i] - g->center[i]) * (xi[i] - g->center[i]);
        const double s2 = g->sigma * g->sigma;
        return phi.scale * std::exp(-0.5 * d2 / s2) / std::pow(2.0 * kPi * s2, 0.5 * n);
    }
    const auto& b = std::get<BumpTest>(phi.shape);
    double d2 = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i)
        d2 += (xi[i] - b.center[i]) * (xi[i] - b.center[i]);
    const double t = 1.0 - d2 / (b.radius * b.radius);
    if (t <= 0.0)
        return 0.0;
    const double mass = std::pow(b.radius, n) * std::pow(kPi, 0.5 * n) *
                        std::exp(std::lgamma(b.power + 1.0) - std::lgamma(b.power + 0.5 * n + 1.0));
    return phi.scale * std::pow(t, b.power) / mass;
}

double test_fourier(const TestFunction& phi, std::span<const double> x)
{
    if (x.size() != test_dim(phi))
        throw DimensionMismatch("test function dimension mismatch");
    const double r = norm2(x);
    if (const auto* g = std::get_if<GaussianTest>(&phi.shape))
        return phi.scale * std::cos(dot(x, g->center)) * std::exp(-0.5 * g->sigma * g->sigma * r * r);
    const auto& b = std::get<BumpTest>(phi.shape);
    const auto kernel = bump_kernel(x.size(), b.power, 1.0);
    return phi.scale * std::cos(dot(x, b.center)) * kernel.k(b.radius * r);
}

std::string describe(const TestFunction& phi)
{
    std::ostringstream out;
    out.precision(6);
    auto center = [&](const Vector& c) {
        out << "(";
        for (std::size_t i = 0; i < c.size(); ++i)
            out << (i ? ", " : "") << c[i];
        out << ")";
    };
    if (const auto* g = std::get_if<GaussianTest>(&phi.shape)) {
        out << "gaussian center=";
        center(g->center);
        out << " sigma=" << g->sigma;
    } else {
        const auto& b = std::get<BumpTest>(phi.shape);
        out << "bump center=";
        center(b.center);
        out << " radius=" << b.radius << " power=" << b.power;
    }
    if (phi.scale != 1.0)
        out << " scale=" << phi.scale;
    return out.str();
}

ActionResult pd_action(const HomogeneousFn& f, const TestFunction& phi, const PdOptions& options)
{
    require_window(f.dim(), f.exponent());
    validate_test(phi);
    if (test_dim(phi) != f.dim())
        throw DimensionMismatch("test function dimension does not match f");
    if (phi.scale == 0.0)
        return {0.0, 0.0};
    const auto d = radial_data(phi);
    const bool gaussian = std::holds_alternative<GaussianTest>(phi.shape);
    const double power = gaussian ? 0.0 : std::get<BumpTest>(phi.shape).power;
    const auto table = make_table(f, gaussian, power, d.beta0, options);
    return action_with(f, phi, make_profile(f, d.axis, options), table);
}

ActionResult projection_action(const HomogeneousFn& f, const TestFunction& phi,
                               const PdOptions& options)
{
    const std::size_t n = f.dim();
    const double p = f.exponent();
    const double c = radial_fourier_weight(n, p);
    validate_test(phi);
    const auto* g = std::get_if<GaussianTest>(&phi.shape);
    if (!g)
        throw InvalidArgument("projection route needs a Gaussian test function");
    if (test_dim(phi) != n)
        throw DimensionMismatch("test function dimension does not match f");
    const auto d = radial_data(phi);
    const double s = static_cast<double>(n) + p;
    // G(beta) = int |t|^(-s) N(beta, 1)(t) dt, with t = u^(1/(1-s)).
    double worst = 0.0;
    auto radial = [&](double beta) {
        const double b = std::abs(beta);
        QuadratureOptions qo;
        qo.rel_tol = 1e-12;
        const auto r = integrate(
            [&](double u) {
                const double t = std::pow(u, 1.0 / (1.0 - s));
                return (std::exp(-0.5 * (t - b) * (t - b)) + std::exp(-0.5 * (t + b) * (t + b))) /
                       std::sqrt(2.0 * kPi);
            },
            0.0, std::pow(b + 13.0, 1.0 - s), qo);
        worst = std::max(worst, r.error / (1.0 - s));
        return r.value / (1.0 - s);
    };
    const auto prof = make_profile(f, d.axis, options);
    const double factor = 0.5 * c * phi.scale * std::pow(d.length, -s);
    auto result = combine(prof, radial, 0.0, d.beta0, factor);
    double total = 0.0;
    for (std::size_t i = 0; i < prof.weight[1].size(); ++i)
        total += prof.weight[1][i] * prof.value[1][i];
    result.error += std::abs(factor) * worst * total;
    return result;
}

double euclidean_gaussian_action(std::size_t n, double p, const GaussianTest& phi)
{
    const double nd = static_cast<double>(n);
    if (!(p > -nd && p < 0.0))
        throw InvalidArgument("order p is outside (-n, 0)");
    const double a = nd + p;
    const double r = norm2(phi.center);
    const double z = r * r / (2.0 * phi.sigma * phi.sigma);
    return std::exp2(0.5 * a) * std::pow(kPi, 0.5 * nd) * std::tgamma(0.5 * a) *
           std::pow(phi.sigma, -a) / std::tgamma(0.5 * nd) *
           boost::math::hypergeometric_1F1(0.5 * a, 0.5 * nd, -z);
}

std::string to_string(PdMode mode)
{
    return mode == PdMode::full_space ? "full_space" : "away_from_origin";
}

std::string to_string(PdVerdict verdict)
{
    switch (verdict) {
    case PdVerdict::consistent_with_pd:
        return "consistent_with_pd";
    case PdVerdict::inconclusive:
        return "inconclusive_within_tolerance";
    case PdVerdict::violation:
        return "violation";
    }
    return "unknown";
}

TestFamily default_family(std::size_t n, PdMode mode)
{
    if (n != 2 && n != 3)
        throw InvalidArgument("default test family exists for n = 2 and n = 3 only");
    TestFamily family;
    if (n == 2) {
        for (int k = 0; k < 8; ++k) {
            const double t = kPi * k / 8.0;
            family.directions.push_back({std::cos(t), std::sin(t)});
        }
    } else {
        // Axes, face diagonals and body diagonals of the cube, up to sign.
        const std::vector<Vector> dirs = {{1, 0, 0},  {0, 1, 0},  {0, 0, 1},  {1, 1, 0},  {1, -1, 0},
                                          {1, 0, 1},  {1, 0, -1}, {0, 1, 1},  {0, 1, -1}, {1, 1, 1},
                                          {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
        for (auto d : dirs) {
            const double r = norm2(d);
            for (double& v : d)
                v /= r;
            family.directions.push_back(d);
        }
    }
    if (mode == PdMode::full_space) {
        family.widths = {0.25, 0.5, 1.0, 2.0, 4.0};
        family.radii = {0.0, 0.5, 1.0, 2.0, 4.0};
    } else {
        family.widths = {0.25, 0.5, 0.9};
        family.radii = {1.0, 2.0, 4.0};
    }
    return family;
}

std::string describe(const TestFamily& family)
{
    std::ostringstream out;
    auto list = [&](const std::vector<double>& v) {
        out << "{";
        for (std::size_t i = 0; i < v.size(); ++i)
            out << (i ? ", " : "") << v[i];
        out << "}";
    };
    out << "widths=";
    list(family.widths);
    out << " radii=";
    list(family.radii);
    out << " directions=" << family.directions.size();
    out << " bump_power=" << family.bump_power << " refine=" << (family.refine ? "yes" : "no");
    return out.str();
}

PDReport pd_check(const HomogeneousFn& f, const TestFamily& family, PdMode mode,
                  const PdOptions& options)
{
    const std::size_t n = f.dim();
    require_window(n, f.exponent());
    if (family.widths.empty() || family.radii.empty() || family.directions.empty())
        throw InvalidArgument("test family is empty");
    const bool gaussian = mode == PdMode::full_space;
    for (double w : family.widths)
        if (!(w > 0.0) || (!gaussian && !(w < 1.0)))
            throw InvalidArgument(gaussian ? "Gaussian widths must be positive"
                                           : "bump width ratios must lie in (0, 1)");
    for (double r : family.radii)
        if (!(r >= 0.0) || (!gaussian && !(r > 0.0)))
            throw InvalidArgument("bump centers must avoid the origin");

    std::vector<Vector> dirs;
    for (const auto& d : family.directions) {
        if (d.size() != n)
            throw DimensionMismatch("test family direction dimension does not match f");
        const double r = norm2(d);
        if (!(r > 0.0))
            throw InvalidArgument("test family direction is zero");
        Vector u(d);
        for (double& v : u)
            v /= r;
        dirs.push_back(u);
    }
    Vector e1(n, 0.0);
    e1[0] = 1.0;

    struct Candidate
    {
        double width;
        double radius;
        Vector dir;
    };
    auto build = [&](const Candidate& c) {
        Vector center(n);
        for (std::size_t i = 0; i < n; ++i)
            center[i] = c.radius * c.dir[i];
        if (gaussian)
            return gaussian_test(center, c.width);
        return bump_test(center, c.width * c.radius, family.bump_power);
    };

    std::vector<Candidate> grid;
    for (double w : family.widths) {
        for (double r : family.radii) {
            if (r == 0.0) {
                grid.push_back({w, 0.0, e1});
                continue;
            }
            for (const auto& d : dirs)
                grid.push_back({w, r, d});
        }
    }

    const auto [wmin, wmax] = std::minmax_element(family.widths.begin(), family.widths.end());
    const auto [rmin, rmax] = std::minmax_element(family.radii.begin(), family.radii.end());
    const double beta_max = gaussian ? *rmax / *wmin : 1.0 / *wmin;
    const auto table = make_table(f, gaussian, family.bump_power, beta_max, options);

    // Angular profiles: one per distinct axis.
    std::vector<Vector> axes = dirs;
    axes.push_back(e1);
    std::vector<AngularProfile> profiles(axes.size());
    const std::size_t workers = options.workers ? options.workers : default_workers();
    parallel_chunks(axes.size(), workers,
                    [&](std::size_t i) { profiles[i] = make_profile(f, axes[i], options); });
    auto profile_index = [&](const Vector& d) -> std::size_t {
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i] == d)
                return i;
        return axes.size();
    };

    std::vector<ActionResult> actions(grid.size());
    parallel_chunks(grid.size(), workers, [&](std::size_t i) {
        const auto& c = grid[i];
        actions[i] = action_with(f, build(c), profiles[profile_index(c.radius == 0.0 ? e1 : c.dir)],
                                 table);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (actions[i].value < actions[best].value)
            best = i;
    Candidate cur = grid[best];
    ActionResult cur_action = actions[best];
    std::size_t evaluated = grid.size();

    if (family.refine) {
        const auto tangents_of = [&](const Vector& d) { return frame(d); };
        double log_step = 0.5;
        double angle = kPi / 16.0;
        for (int round = 0; round < 5; ++round) {
            bool improved = false;
            std::vector<Candidate> moves;
            for (double sgn : {-1.0, 1.0}) {
                Candidate c = cur;
                c.width = std::clamp(cur.width * std::exp2(sgn * log_step), *wmin, *wmax);
                moves.push_back(c);
                if (cur.radius > 0.0) {
                    c = cur;
                    c.radius = std::clamp(cur.radius * std::exp2(sgn * log_step), *rmin, *rmax);
                    if (c.radius > 0.0)
                        moves.push_back(c);
                    for (const auto& t : tangents_of(cur.dir)) {
                        c = cur;
                        for (std::size_t i = 0; i < n; ++i)
                            c.dir[i] = std::cos(angle) * cur.dir[i] + sgn * std::sin(angle) * t[i];
                        moves.push_back(c);
                    }
                }
            }
            for (auto& c : moves) {
                std::size_t idx = c.radius == 0.0 ? profile_index(e1) : profile_index(c.dir);
                if (idx == axes.size()) {
                    axes.push_back(c.dir);
                    profiles.push_back(make_profile(f, c.dir, options));
                }
                const auto a = action_with(f, build(c), profiles[idx], table);
                ++evaluated;
                if (a.value < cur_action.value) {
                    cur = c;
                    cur_action = a;
                    improved = true;
                }
            }
            if (!improved) {
                log_step *= 0.5;
                angle *= 0.5;
            }
        }
    }

    PDReport report;
    report.min_action = cur_action.value;
    report.quadrature_error_bound = cur_action.error;
    report.witness = build(cur);
    report.evaluated = evaluated;
    report.mode = mode;
    report.family = describe(family);
    if (report.min_action < -report.quadrature_error_bound)
        report.verdict = PdVerdict::violation;
    else if (report.min_action < 0.0)
        report.verdict = PdVerdict::inconclusive;
    else
        report.verdict = PdVerdict::consistent_with_pd;
    return report;
}

QuadratureResult subordination_power(const HomogeneousFn& f, std::span<const double> x)
{
    const double p = f.exponent();
    if (!(p < 0.0))
        throw InvalidArgument("subordination formula needs a negative order");
    if (x.size() != f.dim())
        throw DimensionMismatch("point dimension does not match f");
    std::vector<double> terms;
    double r = 0.0;
    if (const auto* lr = std::get_if<DiscreteLrNorm>(&f.base())) {
        r = lr->r;
        for (const auto& row : lr->rows)
            terms.push_back(std::abs(dot(row, x)));
    } else if (const auto* lv = std::get_if<LevyNorm>(&f.base())) {
        r = lv->measure.exponent();
        for (const auto& e : lv->measure.entries())
            terms.push_back(std::pow(e.weight, 1.0 / r) * std::abs(dot(e.direction, x)));
    } else {
        throw InvalidArgument("subordination formula needs a discrete-L_r or Levy-measure base");
    }
    if (!(r > 0.0 && r <= 2.0))
        throw InvalidArgument("subordination formula needs 0 < r <= 2");
    const double top = *std::max_element(terms.begin(), terms.end());
    if (!(top > 0.0))
        throw InvalidArgument("x = 0 is the singular point of f");
    // t = tau e^s with tau = 1 / max |c_i|; every factor exp(-|t c_i|^r) is kept separate.
    std::vector<double> scaled;
    double sum = 0.0;
    for (double c : terms) {
        scaled.push_back(std::pow(c / top, r));
        sum += scaled.back();
    }
    const double s_lo = std::log(1e-7 / sum) / r;
    const double s_hi = std::log(80.0) / r;
    const double head = std::exp(-p * s_lo) / (-p) - sum * std::exp((r - p) * s_lo) / (r - p);
    const double head_error = 0.5 * sum * sum * std::exp((2.0 * r - p) * s_lo) / (2.0 * r - p);
    QuadratureOptions qo;
    qo.rel_tol = 1e-13;
    const auto body = integrate(
        [&](double s) {
            const double ts = std::exp(r * s);
            double prod = std::exp(-p * s);
            for (double c : scaled)
                prod *= std::exp(-ts * c);
            return prod;
        },
        s_lo, s_hi, qo);
    const double tail_error = std::exp(-p * s_hi - 80.0) * 10.0;
    const double factor = r / std::tgamma(-p / r) * std::pow(top, p);
    QuadratureResult out;
    out.value = factor * (head + body.value);
    out.error = factor * (body.error + head_error + tail_error);
    out.l1 = factor * (std::abs(head) + body.l1);
    return out;
}

}  // namespace stablecorr
