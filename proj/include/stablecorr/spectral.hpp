#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stablecorr/errors.hpp"

namespace stablecorr {

using Vector = std::vector<double>;

// Index of stability, 0 < q <= 2.
class StableIndex
{
public:
    explicit StableIndex(double q);
    double value() const noexcept { return q_; }
    bool is_gaussian() const noexcept { return q_ == 2.0; }
    bool is_cauchy() const noexcept { return q_ == 1.0; }
    friend bool operator==(const StableIndex&, const StableIndex&) = default;

private:
    double q_;
};

// Number of leading coordinates forming the first block; 1 <= k < n.
class BlockSplit
{
public:
    explicit BlockSplit(std::size_t k);
    std::size_t k() const noexcept { return k_; }
    void validate(std::size_t n) const;

private:
    std::size_t k_;
};

// Half-open, zero-based coordinate range [begin, end).
struct IndexRange
{
    std::size_t begin;
    std::size_t end;
};

struct Atom
{
    double weight;
    Vector direction;
    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite atomic spectral representation of a symmetric q-stable vector.
///
/// The law has characteristic function exp(-sum_j w_j |(a_j, xi)|^q). Atoms
/// need not be normalized and may be degenerate (zero directions are allowed
/// as long as at least one atom is nonzero).
class SpectralRep
{
public:
    SpectralRep(std::size_t n, StableIndex q, std::vector<Atom> atoms);

    std::size_t dim() const noexcept { return n_; }
    StableIndex index() const noexcept { return q_; }
    double q() const noexcept { return q_.value(); }
    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t atom_count() const noexcept { return atoms_.size(); }

    // Dimension of the linear span of the atom directions.
    std::size_t rank() const;

    // Stable 64-bit FNV-1a digest of the representation, as 16 hex digits.
    std::string hash() const;

    // Same law with every atom rescaled to a unit direction.
    SpectralRep canonical() const;

    friend bool operator==(const SpectralRep&, const SpectralRep&) = default;

private:
    std::size_t n_;
    StableIndex q_;
    std::vector<Atom> atoms_;
};

// sum_j w_j |(a_j, xi)|^q, the exponent of the characteristic function.
double q_form(const SpectralRep& rep, std::span<const double> xi);

// ||sum_i xi_i s_i||_q = q_form^(1/q).
double scale_q(const SpectralRep& rep, std::span<const double> xi);

double char_fn(const SpectralRep& rep, std::span<const double> xi);

// Representation of Y: blocks [0, k) and [k, n) made independent with the
// same marginals. Halves whose block vector is zero are dropped.
SpectralRep decouple(const SpectralRep& rep, BlockSplit split);

// Representation of X_- = (X_1..X_k, -X_{k+1}..-X_n).
SpectralRep reflect(const SpectralRep& rep, BlockSplit split);

// Law of the coordinates in `range`. Atoms that vanish on the range are
// dropped; throws if nothing remains.
SpectralRep marginal_block(const SpectralRep& rep, IndexRange range);

double dot(std::span<const double> a, std::span<const double> b);

// Numerical rank of the matrix whose rows are `rows` (each of length n).
std::size_t matrix_rank(std::span<const Vector> rows, std::size_t n);

}  // namespace stablecorr
