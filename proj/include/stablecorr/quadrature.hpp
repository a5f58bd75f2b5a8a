#pragma once

#include <functional>
#include <vector>

namespace stablecorr {

struct QuadratureResult
{
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    double l1 = 0.0;     // integral of |f|, for conditioning
};

struct QuadratureOptions
{
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    unsigned max_depth = 24;
    // Equal panels to start from; oscillatory integrands need enough of them
    // that no panel spans many periods, or the error estimate can alias.
    std::size_t initial_panels = 1;
};

// Globally adaptive 31-point Gauss-Kronrod on [a, b]; b may be +infinity. Throws
// NumericalFailure when the requested tolerance is not reached.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

struct GaussRule
{
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t order);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
double composite_gauss(const std::function<double(double)>& f, double a, double b,
                       std::size_t panels, const GaussRule& rule);

}  // namespace stablecorr
