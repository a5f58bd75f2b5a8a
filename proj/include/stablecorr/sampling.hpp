#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stablecorr/spectral.hpp"

namespace stablecorr {

struct Seed
{
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    friend bool operator==(const Seed&, const Seed&) = default;
};

using Engine = std::mt19937_64;

// Draws per RNG chunk. Chunk c of a run with Seed s always uses
// make_engine(s, c), so output does not depend on the worker count.
inline constexpr std::size_t kChunkSize = 4096;

Engine make_engine(Seed seed, std::uint64_t chunk);

// Uniform on the open interval (0, 1).
double uniform_open(Engine& engine);

// One draw of Z with E exp(itZ) = exp(-|t|^q).
double draw_standard(StableIndex q, Engine& engine);

std::vector<double> sample_standard(StableIndex q, std::size_t count, Seed seed);

// Atoms pre-scaled to b_j = w_j^{1/q} a_j so that X = sum_j Z_j b_j.
class VectorSampler
{
public:
    explicit VectorSampler(const SpectralRep& rep);

    std::size_t dim() const noexcept { return n_; }
    void draw(Engine& engine, std::span<double> out) const;

private:
    StableIndex q_;
    std::size_t n_;
    std::vector<Vector> scaled_;
};

Vector sample_vector(const SpectralRep& rep, Engine& engine);

struct SampleBatch
{
    std::size_t n = 0;
    std::vector<double> data;  // row-major, rows() x n
    std::string rep_hash;
    Seed seed;

    std::size_t rows() const noexcept { return n == 0 ? 0 : data.size() / n; }
    std::span<const double> point(std::size_t i) const { return {data.data() + i * n, n}; }
};

// Worker count from STABLECORR_WORKERS, falling back to hardware concurrency.
std::size_t default_workers();

SampleBatch sample_batch(const SpectralRep& rep, std::size_t count, Seed seed,
                         std::size_t workers = default_workers());

// Evaluates `fn` on `count` draws of the rep's law. The draws are exactly
// those of sample_batch with the same (count, seed); the result is in draw
// order and independent of `workers`.
std::vector<double> map_samples(const SpectralRep& rep, std::size_t count, Seed seed,
                                const std::function<double(std::span<const double>)>& fn,
                                std::size_t workers = default_workers());

// Runs body(chunk_index) for chunk_index in [0, chunks) on up to `workers`
// threads. The first exception thrown by any body is rethrown.
void parallel_chunks(std::size_t chunks, std::size_t workers,
                     const std::function<void(std::size_t)>& body);

void write_csv(const SampleBatch& batch, std::ostream& out);

// Writes little-endian float64 rows to `path` and a JSON header to
// `path` + ".json".
void write_binary(const SampleBatch& batch, const std::string& path);

SampleBatch read_binary(const std::string& path);

}  // namespace stablecorr
