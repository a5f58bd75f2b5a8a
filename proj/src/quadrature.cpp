#include "stablecorr/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stablecorr/errors.hpp"

namespace stablecorr {

namespace {

struct Panel
{
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    unsigned depth = 0;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One 31-point Kronrod panel with the embedded 15-point Gauss rule.
Panel kronrod_panel(const std::function<double(double)>& f, double a, double b, unsigned depth)
{
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    static const auto& kx = gauss_kronrod<double, 31>::abscissa();
    static const auto& kw = gauss_kronrod<double, 31>::weights();
    static const auto& gw = gauss<double, 15>::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 31> fx;
    fx[15] = f(mid);
    for (std::size_t i = 1; i < kx.size(); ++i) {
        fx[15 - i] = f(mid - half * kx[i]);
        fx[15 + i] = f(mid + half * kx[i]);
    }
    double k = kw[0] * fx[15];
    double g = gw[0] * fx[15];
    double l1 = kw[0] * std::abs(fx[15]);
    for (std::size_t i = 1; i < kx.size(); ++i) {
        const double s = fx[15 - i] + fx[15 + i];
        k += kw[i] * s;
        l1 += kw[i] * (std::abs(fx[15 - i]) + std::abs(fx[15 + i]));
        if (i % 2 == 0)
            g += gw[i / 2] * s;
    }
    // QUADPACK's estimate: |K - G| alone is optimistic when the two rules
    // agree by accident on an unresolved oscillation.
    const double mean = 0.5 * k;
    double asc = kw[0] * std::abs(fx[15] - mean);
    for (std::size_t i = 1; i < kx.size(); ++i)
        asc += kw[i] * (std::abs(fx[15 - i] - mean) + std::abs(fx[15 + i] - mean));
    Panel p{a, b, half * k, 0.0, half * l1, depth};
    double err = std::abs(half * (k - g));
    asc *= half;
    if (asc > 0.0 && err > 0.0)
        err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    p.error = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * p.l1);
    return p;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options)
{
    if (!(a <= b) || std::isinf(a))
        throw InvalidArgument("quadrature needs finite a <= b");
    std::function<double(double)> g = f;
    double lo = a;
    double hi = b;
    if (std::isinf(b)) {
        // x = a + t / (1 - t) on [0, 1); the Kronrod nodes never touch t = 1.
        g = [&f, a](double t) {
            const double u = 1.0 - t;
            return f(a + t / u) / (u * u);
        };
        lo = 0.0;
        hi = 1.0;
    }
    QuadratureResult r;
    if (lo == hi)
        return r;

    // Global adaptive bisection: always split the panel with the largest error.
    // Panels at the depth limit stay in the heap with their error.
    const std::size_t start = std::max<std::size_t>(1, options.initial_panels);
    const std::size_t max_panels = start + 20000;
    std::vector<Panel> heap;
    auto edge = [&](std::size_t i) {
        return i == start ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(start);
    };
    for (std::size_t i = 0; i < start; ++i)
        heap.push_back(kronrod_panel(g, edge(i), edge(i + 1), 0));
    std::make_heap(heap.begin(), heap.end());
    auto resum = [&] {
        r = {};
        for (const auto& p : heap) {
            r.value += p.value;
            r.error += p.error;
            r.l1 += p.l1;
        }
    };
    auto converged = [&] { return r.error <= std::max(options.abs_tol, options.rel_tol * r.l1); };
    resum();
    double error = r.error;
    double l1 = r.l1;
    std::size_t retired = 0;
    while (heap.size() < max_panels && retired < heap.size() && std::isfinite(r.value)) {
        if (error <= std::max(options.abs_tol, options.rel_tol * l1)) {
            // Running totals drift; confirm on exact sums.
            resum();
            error = r.error;
            l1 = r.l1;
            if (converged())
                break;
        }
        std::pop_heap(heap.begin(), heap.end() - static_cast<std::ptrdiff_t>(retired));
        Panel worst = heap[heap.size() - 1 - retired];
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.depth >= options.max_depth || !(worst.a < mid && mid < worst.b)) {
            ++retired;  // parked past the heap range
            continue;
        }
        const Panel left = kronrod_panel(g, worst.a, mid, worst.depth + 1);
        const Panel right = kronrod_panel(g, mid, worst.b, worst.depth + 1);
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        r.value += left.value + right.value - worst.value;
        heap[heap.size() - 1 - retired] = left;
        std::push_heap(heap.begin(), heap.end() - static_cast<std::ptrdiff_t>(retired));
        heap.push_back(right);
        if (retired > 0)
            std::swap(heap[heap.size() - 1 - retired], heap.back());
        std::push_heap(heap.begin(), heap.end() - static_cast<std::ptrdiff_t>(retired));
    }
    resum();

    const double allowed = std::max(options.abs_tol, options.rel_tol * r.l1);
    if (!std::isfinite(r.value) || !(r.error <= allowed)) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << r.value
            << ", error " << r.error << " > allowed " << allowed;
        throw NumericalFailure(msg.str());
    }
    return r;
}

namespace {

// Legendre polynomial P_order(x) and its derivative.
std::pair<double, double> legendre(std::size_t order, double x)
{
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= order; ++k) {
        const double kd = static_cast<double>(k);
        const double pk = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = pk;
    }
    const double dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

GaussRule gauss_legendre(std::size_t order)
{
    if (order == 0)
        throw InvalidArgument("Gauss-Legendre order must be positive");
    GaussRule rule;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    if (order == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    const double nd = static_cast<double>(order);
    for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(order, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double dp = legendre(order, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

double composite_gauss(const std::function<double(double)>& f, double a, double b,
                       std::size_t panels, const GaussRule& rule)
{
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + (static_cast<double>(p) + 0.5) * h;
        double panel = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        sum += 0.5 * h * panel;
    }
    return sum;
}

}  // namespace stablecorr
