#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stablecorr/homogeneous.hpp"
#include "stablecorr/levy_measure.hpp"
#include "stablecorr/sampling.hpp"
#include "stablecorr/spectral.hpp"

namespace stablecorr {

// Throws NonexistentExpectation unless E|Z|^p is finite: p > -1, and p < q
// when q < 2.
void require_moment_exists(double p, StableIndex q);

/// E|Z|^p for the standard symmetric q-stable Z (cf exp(-|t|^q)).
///
/// Closed form 2^p Gamma((1+p)/2) Gamma(1-p/q) / (sqrt(pi) Gamma(1-p/2)),
/// which reduces to the Gaussian moment 2^p Gamma((1+p)/2) / sqrt(pi) for
/// q = 2. Cross-checked against c_pq_oracle in the test suite.
double c_pq(double p, StableIndex q);

/// Quadrature evaluation of E|Z|^p that never uses the closed form:
///   0 < p < 2:  C_p int_0^inf (1 - exp(-t^q)) t^(-1-p) dt,
///               C_p = 2 Gamma(1+p) sin(pi p / 2) / pi
///   -1 < p < 0: (Gamma(s) cos(pi s / 2))^(-1) int_0^inf t^(s-1) exp(-t^q) dt, s = -p
///   q = 2, p >= 2: direct integration against the N(0, 2) density.
/// Throws NumericalFailure if the quadrature does not converge.
double c_pq_oracle(double p, StableIndex q);

// sum_m c_m (sum_j w_j |(a_j, xi_m)|^q)^(p/q) with p the measure's exponent:
// E||X||^p without the c_pq factor. Finite for every p > 0.
double levy_sum(const SpectralRep& rep, const LevyMeasure& gamma);

// E||X||^p = c_pq * levy_sum for the norm represented by gamma.
double levy_expectation(const SpectralRep& rep, const LevyMeasure& gamma, double p);

// The 1-homogeneous norm represented by gamma. Throws if gamma does not span.
HomogeneousFn norm_from_levy(const LevyMeasure& gamma);

enum class EstimatorKind { plain, median_of_means };

std::string to_string(EstimatorKind kind);

struct EstimatorRequest
{
    enum class Mode { automatic, plain, median_of_means } mode = Mode::automatic;
    std::size_t blocks = 32;
    // For p < 0 with infinite variance: fraction of largest draws replaced
    // by their Pareto conditional mean (see replace_pareto_tail). 0 disables.
    double tail_fraction = 1e-3;
};

struct TailCorrection
{
    double index = 0.0;      // alpha = rank / |p|
    double threshold = 0.0;  // T
    std::size_t replaced = 0;
    double hill_ratio = 0.0;  // alpha times the Hill estimate; 1 for an exact Pareto tail
};

struct MCEstimate
{
    double value = 0.0;
    // Standard error for plain means; absent for median-of-means.
    std::optional<double> std_error;
    // Robust spread of a single block mean (1.4826 * MAD of the block means);
    // present only for median-of-means. With infinite variance the median of
    // block means is biased towards the mode of the block-mean law, and this
    // spread bounds that gap as well as the sampling error.
    // With a tail correction the block means have finite variance and the
    // bound is instead the standard error of their median combined with the
    // median-mean gap.
    std::optional<double> deviation_bound;
    std::optional<TailCorrection> tail;
    std::size_t n_samples = 0;
    EstimatorKind estimator = EstimatorKind::plain;
    std::size_t blocks = 0;
    std::string rep_hash;
    Seed seed;

    double uncertainty() const { return std_error ? *std_error : deviation_bound.value_or(0.0); }
};

// Whether E f(X) is finite: -rank < p, and p < q when q < 2.
bool expectation_exists(const HomogeneousFn& f, const SpectralRep& rep);

// Whether f(X) has finite variance, i.e. 2p satisfies the same condition.
bool variance_exists(const HomogeneousFn& f, const SpectralRep& rep);

MCEstimate mc_expectation(const HomogeneousFn& f, const SpectralRep& rep, std::size_t count,
                          Seed seed, EstimatorRequest request = {},
                          std::size_t workers = default_workers());

// For p < 0 the upper tail of f(X) comes from X near the origin, where the
// density is smooth and even: P(f(X) > t) ~ c t^(-alpha), alpha = rank / |p|,
// with relative correction O(t^(2/p)). Values above the (1 - fraction)
// quantile T are replaced by E[f(X) | f(X) > T] = T alpha / (alpha - 1).
// The fraction is an upper limit: the count is divided by 4 (down to 32)
// until the Hill estimate over the replaced values is within 3/sqrt(k) of
// 1/alpha, since a narrow density peak delays the Pareto regime.
// Needs alpha > 1.
TailCorrection replace_pareto_tail(std::vector<double>& values, double index, double fraction);

// Plain or median-of-means summary of precomputed values.
MCEstimate summarize(std::span<const double> values, EstimatorKind kind, std::size_t blocks);

}  // namespace stablecorr
