#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stablecorr/homogeneous.hpp"
#include "stablecorr/quadrature.hpp"

namespace stablecorr {

// Constant c with (|r|^a)^ = c |t|^(-1-a) for a = n + p - 1 in (-1, 0).
double radial_fourier_weight(std::size_t n, double p);

// Unit-mass N(center, sigma^2 I) density; its Fourier transform is
// exp(i(x, center)) exp(-sigma^2 |x|^2 / 2).
struct GaussianTest
{
    Vector center;
    double sigma;
    friend bool operator==(const GaussianTest&, const GaussianTest&) = default;
};

// Unit-mass multiple of (1 - |xi - center|^2 / radius^2)_+^power.
struct BumpTest
{
    Vector center;
    double radius;
    double power = 10.0;
    friend bool operator==(const BumpTest&, const BumpTest&) = default;
};

struct TestFunction
{
    std::variant<GaussianTest, BumpTest> shape;
    double scale = 1.0;  // multiplies the unit-mass function
    friend bool operator==(const TestFunction&, const TestFunction&) = default;
};

TestFunction gaussian_test(Vector center, double sigma, double scale = 1.0);
TestFunction bump_test(Vector center, double radius, double power = 10.0, double scale = 1.0);

std::size_t test_dim(const TestFunction& phi);
double test_value(const TestFunction& phi, std::span<const double> xi);
// Real part of the Fourier transform, int phi(xi) cos((x, xi)) dxi.
double test_fourier(const TestFunction& phi, std::span<const double> x);
std::string describe(const TestFunction& phi);

struct ActionResult
{
    double value = 0.0;
    double error = 0.0;
};

struct PdOptions
{
    std::size_t panels = 32;        // composite Gauss panels on [0, pi/2] (doubled for the error)
    std::size_t order = 8;
    double azimuth_tol = 1e-10;     // n = 3 only
    double table_tol = 1e-11;       // radial profile interpolation, relative to its peak
    std::size_t workers = 0;        // 0: default_workers()
};

// (f^, phi) = int f(x) phi^(x) dx for f of order p in (-n, 0), n in {2, 3},
// computed in spherical coordinates with the radial integral tabulated.
ActionResult pd_action(const HomogeneousFn& f, const TestFunction& phi, const PdOptions& options = {});

// Same pairing through the one-dimensional pair |r|^(n+p-1) <-> c |t|^(-n-p):
// (c/2) int_S f(theta) int_R |t|^(-n-p) (R phi)(theta, t) dt dtheta, with R phi
// the projection of phi onto the line through theta. Needs p in (-n, -n+1) and
// a Gaussian test function.
ActionResult projection_action(const HomogeneousFn& f, const TestFunction& phi,
                               const PdOptions& options = {});

// Closed form of (f^, phi) for f = |x|^p (unit weights) and a Gaussian test.
double euclidean_gaussian_action(std::size_t n, double p, const GaussianTest& phi);

enum class PdMode
{
    full_space,
    away_from_origin
};

enum class PdVerdict
{
    consistent_with_pd,
    inconclusive,  // min_action in [-bound, 0)
    violation
};

std::string to_string(PdMode mode);
std::string to_string(PdVerdict verdict);

struct TestFamily
{
    // Gaussians: widths are sigma, radii are |center| (0 allowed).
    // Bumps: widths are radius / |center| in (0, 1), radii are |center| > 0.
    std::vector<double> widths;
    std::vector<double> radii;
    std::vector<Vector> directions;
    double bump_power = 10.0;
    bool refine = true;
};

TestFamily default_family(std::size_t n, PdMode mode);
std::string describe(const TestFamily& family);

struct PDReport
{
    double min_action = 0.0;
    TestFunction witness;
    PdVerdict verdict = PdVerdict::consistent_with_pd;
    double quadrature_error_bound = 0.0;  // error estimate of the minimizing action
    std::size_t evaluated = 0;
    PdMode mode = PdMode::full_space;
    std::string family;
};

PDReport pd_check(const HomogeneousFn& f, const TestFamily& family, PdMode mode,
                  const PdOptions& options = {});

// (r / Gamma(-p/r)) int_0^inf t^(-1-p) prod_i exp(-t^r |c_i(x)|^r) dt, where
// the c_i are the terms of a discrete-L_r or Levy-measure base with r <= 2.
QuadratureResult subordination_power(const HomogeneousFn& f, std::span<const double> x);

}  // namespace stablecorr
