#include "stablecorr/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace stablecorr {

Engine make_engine(Seed seed, std::uint64_t chunk)
{
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffU); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed.seed),      hi(seed.seed), lo(seed.stream_id),
                      hi(seed.stream_id), lo(chunk),     hi(chunk)};
    return Engine(seq);
}

double uniform_open(Engine& engine)
{
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double draw_standard(StableIndex q, Engine& engine)
{
    constexpr double pi = std::numbers::pi;
    const double alpha = q.value();
    if (q.is_gaussian()) {
        // sqrt(2) * N(0, 1) by Box-Muller; variance 2 gives cf exp(-t^2).
        const double u1 = uniform_open(engine);
        const double u2 = uniform_open(engine);
        return 2.0 * std::sqrt(-std::log(u1)) * std::cos(2.0 * pi * u2);
    }
    const double v = pi * (uniform_open(engine) - 0.5);
    if (q.is_cauchy())
        return std::tan(v);
    const double w = -std::log(uniform_open(engine));
    // Chambers-Mallows-Stuck, symmetric case.
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

std::vector<double> sample_standard(StableIndex q, std::size_t count, Seed seed)
{
    if (count == 0)
        throw InvalidArgument("sample count must be positive");
    std::vector<double> out(count);
    const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
    for (std::size_t c = 0; c < chunks; ++c) {
        Engine engine = make_engine(seed, c);
        const std::size_t end = std::min(count, (c + 1) * kChunkSize);
        for (std::size_t i = c * kChunkSize; i < end; ++i)
            out[i] = draw_standard(q, engine);
    }
    return out;
}

VectorSampler::VectorSampler(const SpectralRep& rep) : q_(rep.index()), n_(rep.dim())
{
    scaled_.reserve(rep.atom_count());
    for (const auto& atom : rep.atoms()) {
        const double factor = std::pow(atom.weight, 1.0 / rep.q());
        Vector b(atom.direction);
        for (double& x : b)
            x *= factor;
        scaled_.push_back(std::move(b));
    }
}

void VectorSampler::draw(Engine& engine, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& b : scaled_) {
        const double z = draw_standard(q_, engine);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] += z * b[i];
    }
}

Vector sample_vector(const SpectralRep& rep, Engine& engine)
{
    VectorSampler sampler(rep);
    Vector x(rep.dim());
    sampler.draw(engine, x);
    return x;
}

std::size_t default_workers()
{
    if (const char* env = std::getenv("STABLECORR_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<std::size_t>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t chunks, std::size_t workers,
                     const std::function<void(std::size_t)>& body)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(chunks, 1));
    if (workers == 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    try {
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (std::size_t c = next++; c < chunks; c = next++) {
                    try {
                        body(c);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                        next = chunks;
                    }
                }
            });
        }
    } catch (const std::system_error& e) {
        next = chunks;
        for (auto& t : threads)
            t.join();
        throw ResourceError(std::string("could not start worker threads: ") + e.what());
    }
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

namespace {

template <class Fill>
void run_chunks(std::size_t count, Seed seed, std::size_t workers, Fill&& fill)
{
    const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
    parallel_chunks(chunks, workers, [&](std::size_t c) {
        Engine engine = make_engine(seed, c);
        const std::size_t begin = c * kChunkSize;
        fill(engine, begin, std::min(count, begin + kChunkSize));
    });
}

}  // namespace

SampleBatch sample_batch(const SpectralRep& rep, std::size_t count, Seed seed, std::size_t workers)
{
    if (count == 0)
        throw InvalidArgument("sample count must be positive");
    const VectorSampler sampler(rep);
    const std::size_t n = rep.dim();
    SampleBatch batch;
    batch.n = n;
    batch.rep_hash = rep.hash();
    batch.seed = seed;
    try {
        batch.data.resize(count * n);
    } catch (const std::bad_alloc&) {
        throw ResourceError("cannot allocate " + std::to_string(count) + " x " + std::to_string(n) +
                            " sample batch");
    }
    run_chunks(count, seed, workers, [&](Engine& engine, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            sampler.draw(engine, std::span<double>(batch.data.data() + i * n, n));
    });
    return batch;
}

std::vector<double> map_samples(const SpectralRep& rep, std::size_t count, Seed seed,
                                const std::function<double(std::span<const double>)>& fn,
                                std::size_t workers)
{
    if (count == 0)
        throw InvalidArgument("sample count must be positive");
    const VectorSampler sampler(rep);
    std::vector<double> values;
    try {
        values.resize(count);
    } catch (const std::bad_alloc&) {
        throw ResourceError("cannot allocate " + std::to_string(count) + " sample values");
    }
    run_chunks(count, seed, workers, [&](Engine& engine, std::size_t begin, std::size_t end) {
        Vector x(rep.dim());
        for (std::size_t i = begin; i < end; ++i) {
            sampler.draw(engine, x);
            values[i] = fn(x);
        }
    });
    return values;
}

void write_csv(const SampleBatch& batch, std::ostream& out)
{
    for (std::size_t j = 0; j < batch.n; ++j)
        out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        auto row = batch.point(i);
        for (std::size_t j = 0; j < batch.n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::little)
        return v;
    else
        return __builtin_bswap64(v);
}

}  // namespace

void write_binary(const SampleBatch& batch, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path + " for writing");
    for (double x : batch.data) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(x));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out)
        throw Error("write failed for " + path);

    nlohmann::json header = {
        {"rows", batch.rows()},          {"cols", batch.n},
        {"dtype", "float64"},            {"endianness", "little"},
        {"layout", "row-major"},         {"rep_hash", batch.rep_hash},
        {"seed", batch.seed.seed},       {"stream_id", batch.seed.stream_id},
    };
    std::ofstream side(path + ".json");
    side << header.dump(2) << '\n';
    if (!side)
        throw Error("write failed for " + path + ".json");
}

SampleBatch read_binary(const std::string& path)
{
    std::ifstream side(path + ".json");
    if (!side)
        throw Error("missing header " + path + ".json");
    const auto header = nlohmann::json::parse(side);
    if (header.at("dtype") != "float64" || header.at("endianness") != "little" ||
        header.at("layout") != "row-major")
        throw InvalidArgument("unsupported binary layout in " + path + ".json");

    SampleBatch batch;
    batch.n = header.at("cols").get<std::size_t>();
    const auto rows = header.at("rows").get<std::size_t>();
    batch.rep_hash = header.at("rep_hash").get<std::string>();
    batch.seed = {header.at("seed").get<std::uint64_t>(), header.at("stream_id").get<std::uint64_t>()};
    batch.data.resize(rows * batch.n);

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path);
    for (double& x : batch.data) {
        std::uint64_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof bits);
        x = std::bit_cast<double>(to_little_endian(bits));
    }
    if (!in)
        throw Error("truncated binary batch " + path);
    return batch;
}

}  // namespace stablecorr
