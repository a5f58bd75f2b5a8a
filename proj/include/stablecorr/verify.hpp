#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stablecorr/homogeneous.hpp"
#include "stablecorr/levy_measure.hpp"
#include "stablecorr/moments.hpp"
#include "stablecorr/sampling.hpp"
#include "stablecorr/spectral.hpp"

namespace stablecorr {

// Element of L_q over an atomic measure with unit weights.
class DiscreteLqVector
{
public:
    DiscreteLqVector(Vector values, StableIndex q);

    const Vector& values() const noexcept { return values_; }
    StableIndex index() const noexcept { return q_; }
    std::size_t size() const noexcept { return values_.size(); }
    // sum_i |x_i|^q
    double norm_q_power() const;

private:
    Vector values_;
    StableIndex q_;
};

// 2(|x|^q + |y|^q) - |x+y|^q - |x-y|^q
double check_parallelogram_q(const DiscreteLqVector& x, const DiscreteLqVector& y);
// e^{-|x+y|^q} + e^{-|x-y|^q} - 2 e^{-|x|^q - |y|^q}
double check_exp_ineq(const DiscreteLqVector& x, const DiscreteLqVector& y);
// 2(|x|^q + |y|^q)^{p/q} - |x+y|^p - |x-y|^p for 0 < p <= q; for q = 2 and
// p > 2 the inequality reverses and the sign is flipped, so a nonnegative
// margin always means the inequality holds.
double check_power_ineq(const DiscreteLqVector& x, const DiscreteLqVector& y, double p);
// Size of the terms compared by check_power_ineq, for relative tolerances.
double power_ineq_scale(const DiscreteLqVector& x, const DiscreteLqVector& y, double p);

// Whether (p, q) is in the forward (0 < p <= q) or reversed (q = 2, p > 2)
// regime of the power inequality.
bool power_regime_valid(double p, StableIndex q);
bool power_regime_reversed(double p, StableIndex q);

struct Prop1Result
{
    double ex = 0.0;       // E||X||^p
    double ey = 0.0;       // E||Y||^p
    double ex_minus = 0.0; // E||X_-||^p
    // ey - ex and 2 ey - ex - ex_minus, sign-flipped in the reversed regime.
    double margin = 0.0;
    double margin_sum = 0.0;
    double scale = 0.0;
    bool reversed = false;
    // For p = q < 2 the moments are infinite and the margins compare the
    // finite sums without the common factor c_{p,q}.
    bool normalized = false;
    bool passed = false;
};

// Exact check of E||X||^p <= E||Y||^p and E||X||^p + E||X_-||^p <= 2E||Y||^p
// for the norm represented by gamma. Throws InvalidArgument, with a witness
// entry in the message, when gamma is not closed under v-negation.
Prop1Result verify_prop1(const SpectralRep& rep, BlockSplit split, const LevyMeasure& gamma,
                         double p);

struct OracleCheck
{
    double ex = 0.0;
    double ey = 0.0;
    double ex_error = 0.0;
    double ey_error = 0.0;
    double margin = 0.0;
    double error = 0.0;
    // |oracle - MC| <= max(3 uncertainty, 1e-2 |oracle|) for both laws.
    bool agrees_with_mc = false;
    bool passed = false;  // margin >= -error and agreement
};

struct Thm1Options
{
    bool oracle = false;    // n = 2 only
    bool run_pd_check = false;
    std::size_t workers = 0;
};

struct Thm1Result
{
    std::optional<MCEstimate> x;  // absent when E f(X) is infinite
    MCEstimate y;
    double margin = 0.0;          // +inf when E f(X) is infinite
    double combined_uncertainty = 0.0;
    bool passed = false;
    std::optional<std::string> certificate;
    std::vector<std::string> flags;
    std::optional<OracleCheck> oracle;
    std::optional<std::string> oracle_skipped;
};

// MC check of E f(X) >= E f(Y) with X and Y drawn from independent streams
// (stream ids 2s and 2s+1 of `seed`). Fails only when the margin is below
// -3 combined uncertainty. f must pass the homogeneity and block-symmetry
// checks and have p in (-n, 0); a missing PD certificate is flagged.
Thm1Result verify_thm1(const SpectralRep& rep, BlockSplit split, const HomogeneousFn& f,
                       std::size_t samples, Seed seed, const Thm1Options& options = {});

// verify_thm1 with f = max_i |x_i|^p, p in the open window (-n, -n+1).
Thm1Result verify_cor3(const SpectralRep& rep, BlockSplit split, double p, std::size_t samples,
                       Seed seed, const Thm1Options& options = {});

// Random configurations. Entries are standard Cauchy, weights log-uniform on
// [1/4, 4].
DiscreteLqVector random_lq_vector(Engine& engine, std::size_t size, StableIndex q);
SpectralRep random_heavy_rep(Engine& engine, std::size_t n, StableIndex q, std::size_t min_atoms,
                             std::size_t max_atoms);
BlockSplit random_split(Engine& engine, std::size_t n);
// Pairs {xi, xi with block v negated} of unit directions.
LevyMeasure random_block_symmetric_measure(Engine& engine, std::size_t n, BlockSplit split,
                                           double p, std::size_t pairs);

enum class NormFamily
{
    max_abs,
    l1,
    euclidean,
    lr_subspace
};

std::string to_string(NormFamily family);
NormFamily norm_family_from_string(const std::string& name);

// Block-symmetric norm of the family raised to p. Euclidean weights are
// log-uniform; L_r rows come in v-negated pairs with r drawn from
// {0.5, 1, 1.5, 2}.
HomogeneousFn random_norm_power(Engine& engine, NormFamily family, std::size_t n, BlockSplit split,
                                double p);

}  // namespace stablecorr
