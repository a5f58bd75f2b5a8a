#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stablecorr/levy_measure.hpp"
#include "stablecorr/sampling.hpp"
#include "stablecorr/spectral.hpp"

namespace stablecorr {

// (sum_i |(b_i, x)|^r)^(1/r) for the rows b_i of B. For r < 1 this is a
// quasi-norm; it is still continuous, positive and 1-homogeneous.
struct DiscreteLrNorm
{
    std::vector<Vector> rows;
    double r;
    friend bool operator==(const DiscreteLrNorm&, const DiscreteLrNorm&) = default;
};

struct MaxAbsNorm
{
    std::size_t n;
    friend bool operator==(const MaxAbsNorm&, const MaxAbsNorm&) = default;
};

// sqrt(sum_i d_i x_i^2), d_i > 0.
struct EuclideanNorm
{
    Vector weights;
    friend bool operator==(const EuclideanNorm&, const EuclideanNorm&) = default;
};

struct LevyNorm
{
    LevyMeasure measure;
    friend bool operator==(const LevyNorm&, const LevyNorm&) = default;
};

using NormDescriptor = std::variant<DiscreteLrNorm, MaxAbsNorm, EuclideanNorm, LevyNorm>;

std::size_t norm_dim(const NormDescriptor& base);
double evaluate_norm(const NormDescriptor& base, std::span<const double> x);
std::string norm_kind(const NormDescriptor& base);

/// f(x) = base(x)^p: continuous, positive, even and p-homogeneous on R^n \ {0}.
class HomogeneousFn
{
public:
    // Validates that the base is positive on the sphere (full rank rows,
    // positive weights, spanning Levy measure) and p != 0.
    HomogeneousFn(NormDescriptor base, double p, std::optional<std::size_t> block_k = std::nullopt);

    const NormDescriptor& base() const noexcept { return base_; }
    double exponent() const noexcept { return p_; }
    std::size_t dim() const noexcept { return n_; }
    std::optional<std::size_t> declared_block_symmetry() const noexcept { return block_k_; }

    friend bool operator==(const HomogeneousFn&, const HomogeneousFn&) = default;

private:
    NormDescriptor base_;
    double p_;
    std::optional<std::size_t> block_k_;
    std::size_t n_;
};

HomogeneousFn max_abs_power(std::size_t n, double p);
HomogeneousFn l1_power(std::size_t n, double p);
HomogeneousFn euclidean_power(std::size_t n, double p);
HomogeneousFn lr_power(std::vector<Vector> rows, double r, double p);

// Throws on x = 0 when p < 0; returns 0 at x = 0 when p > 0.
double evaluate(const HomogeneousFn& f, std::span<const double> x);

struct SymmetryCheck
{
    bool passed = true;
    std::optional<Vector> witness;
    double max_relative_deviation = 0.0;
};

// Compares f(u, v) with f(u, -v) on uniform points of the unit sphere.
SymmetryCheck check_block_symmetry(const HomogeneousFn& f, BlockSplit split, std::size_t trials,
                                   Seed seed);

struct HomogeneityCheck
{
    bool passed = true;
    double declared = 0.0;
    double measured = 0.0;
};

using Evaluator = std::function<double(std::span<const double>)>;

// Least-squares slope of log f(tx) - log f(x) against log|t| over random
// (x, t); passes when it is within 1e-9 of `declared`.
HomogeneityCheck measure_homogeneity(const Evaluator& f, std::size_t n, double declared,
                                     std::size_t trials, Seed seed);

HomogeneityCheck check_homogeneity(const HomogeneousFn& f, std::size_t trials, Seed seed);

// Positive-definiteness certificate available without numerical checking:
// the negative-order window (-n, -n+1) for any even positive homogeneous
// function, or a base norm that embeds in L_r with 0 < r <= 2 for p in (-n, 0).
std::optional<std::string> pd_certificate(const HomogeneousFn& f);

// Normals of the hyperplanes across which f may fail to be smooth.
std::vector<Vector> kink_normals(const HomogeneousFn& f);

}  // namespace stablecorr
