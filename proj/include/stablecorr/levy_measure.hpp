#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stablecorr/spectral.hpp"

namespace stablecorr {

struct LevyEntry
{
    double weight;
    Vector direction;  // unit vector
    friend bool operator==(const LevyEntry&, const LevyEntry&) = default;
};

/// Finite measure on the unit sphere representing the norm
/// N(x) = (sum_m c_m |(x, xi_m)|^p)^(1/p) of a subspace of L_p.
class LevyMeasure
{
public:
    LevyMeasure(double exponent, std::vector<LevyEntry> entries);

    double exponent() const noexcept { return p_; }
    std::size_t dim() const noexcept { return entries_.front().direction.size(); }
    std::span<const LevyEntry> entries() const noexcept { return entries_; }

    // sum_m c_m |(x, xi_m)|^p, i.e. N(x)^p.
    double power_sum(std::span<const double> x) const;
    bool spans() const;

    // Entries closed under negation of coordinates [k, n), up to sign of the
    // whole direction, with matching weights (tolerance 1e-12).
    bool is_block_symmetric(std::size_t k) const;

    friend bool operator==(const LevyMeasure&, const LevyMeasure&) = default;

private:
    double p_;
    std::vector<LevyEntry> entries_;
};

}  // namespace stablecorr
