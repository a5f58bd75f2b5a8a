#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "stablecorr/sampling.hpp"
#include "stablecorr/spectral.hpp"

namespace stablecorr::testing {

inline std::vector<double> unit(std::size_t n, std::size_t i)
{
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    return e;
}

inline SpectralRep random_rep(Engine& engine, std::size_t n, double q, std::size_t atoms)
{
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> weight(0.2, 2.0);
    std::vector<Atom> out;
    for (std::size_t j = 0; j < atoms; ++j) {
        Vector a(n);
        for (double& x : a)
            x = normal(engine);
        out.push_back({weight(engine), std::move(a)});
    }
    return SpectralRep(n, StableIndex(q), std::move(out));
}

inline Vector random_vector(Engine& engine, std::size_t n, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    Vector x(n);
    for (double& v : x)
        v = normal(engine);
    return x;
}

// Empirical E cos((xi, X)); the law is symmetric so the imaginary part is 0.
inline double empirical_cf(const SampleBatch& batch, std::span<const double> xi)
{
    double s = 0.0;
    for (std::size_t i = 0; i < batch.rows(); ++i)
        s += std::cos(dot(batch.point(i), xi));
    return s / static_cast<double>(batch.rows());
}

}  // namespace stablecorr::testing
