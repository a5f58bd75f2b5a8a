#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "stablecorr/homogeneous.hpp"
#include "stablecorr/spectral.hpp"

namespace stablecorr {

struct GridSpec
{
    std::size_t resolution = 1024;  // M, even
    double spacing = 0.0;           // 0: automatic_spacing(rep, M)
    std::size_t workers = 0;        // 0: default_workers()
};

// Largest spacing that keeps |char_fn| < 1e-12 beyond the Nyquist frequency,
// refined towards 1/40 of the narrowest marginal scale as long as the grid
// still spans 24 times the widest one.
double automatic_spacing(const SpectralRep& rep, std::size_t resolution);

/// Density of a two-dimensional stable vector on the periodic M x M lattice
/// x_ij = ((i - M/2) h, (j - M/2) h), recovered from char_fn by FFT.
struct DensityField
{
    SpectralRep rep;
    std::string rep_hash;
    std::size_t resolution = 0;
    double spacing = 0.0;
    std::vector<double> values;  // row-major, M x M, clipped at 0
    double clipped_mass = 0.0;
    double min_value = 0.0;      // before clipping
    double mass = 0.0;
    double asymmetry = 0.0;      // max |p(x) - p(-x)|
    // Value and Hessian (h00, h01, h11) at the origin from moments of char_fn.
    double origin_value = 0.0;
    std::array<double, 3> origin_hessian{};
    // origin_value minus the exact density at 0: the mass folded in by periodization.
    double origin_alias = 0.0;

    double extent() const { return spacing * static_cast<double>(resolution); }
    double coordinate(std::size_t i) const
    {
        return (static_cast<double>(i) - static_cast<double>(resolution / 2)) * spacing;
    }
    double at(std::size_t i, std::size_t j) const { return values[i * resolution + j]; }
};

// Throws InvalidArgument for n != 2, rank-one reps and q-forms with
// condition number above 1e6; NumericalFailure if the clipped negative
// mass exceeds 1e-4 or a Gaussian law does not fit in the grid.
DensityField density_2d(const SpectralRep& rep, const GridSpec& spec = {});

struct OracleResult
{
    double value = 0.0;
    double error = 0.0;
    double extrapolation = 0.0;  // Richardson step in the grid extent
    std::size_t resolution = 0;
    double spacing = 0.0;
};

/// E f(X) from a density field.
///
/// The second-order Taylor polynomial of the density at 0, damped by a
/// Gaussian, is subtracted and integrated exactly in polar coordinates; the
/// remainder (of order |x|^(p+4) at the origin) goes through the periodic
/// trapezoid rule. The error combines the change under doubling the spacing
/// with twice the periodization excess at the origin spread over the grid.
OracleResult oracle_expectation(const HomogeneousFn& f, const DensityField& field);

// Fields at M and 2M with the same spacing.
struct RefinedDensity
{
    DensityField base;
    DensityField doubled;
};

RefinedDensity refined_density(const SpectralRep& rep, const GridSpec& spec = {});

// Value from the doubled field. For q < 2 the heavy-tail truncation, of
// order extent^(p - q), is removed by Richardson extrapolation and the step
// is added to the error; for q = 2 the error adds the change between fields.
OracleResult oracle_expectation(const HomogeneousFn& f, const RefinedDensity& fields);

// Doubles M from spec.resolution while the error exceeds rel_error * |value|,
// up to max_resolution. Narrow laws need the larger grids.
OracleResult adaptive_oracle(const HomogeneousFn& f, const SpectralRep& rep, GridSpec spec = {},
                             double rel_error = 2e-2, std::size_t max_resolution = 4096);

// Writes `<stem>.bin` (float64, row-major, host byte order) and `<stem>.json`.
void write_density(const DensityField& field, const std::filesystem::path& stem);

}  // namespace stablecorr
