#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gridrv {

/// Purpose tags so that streams derived from one master seed never overlap.
enum class StreamPurpose : std::uint32_t {
    replication = 1,
    jump_scenario = 2,
    limit_sampler = 3,
    aux = 4,
};

/// Independent random stream identified by (master seed, purpose, index).
///
/// Streams are split by seeding a 64-bit Mersenne Twister through
/// std::seed_seq with the full identifier, so the draws for replication r do
/// not depend on how many other replications ran or in which order.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index)
        : id_(index)
    {
        std::seed_seq seq{
            static_cast<std::uint32_t>(master_seed),
            static_cast<std::uint32_t>(master_seed >> 32),
            static_cast<std::uint32_t>(purpose),
            static_cast<std::uint32_t>(index),
            static_cast<std::uint32_t>(index >> 32),
        };
        engine_.seed(seq);
    }

    explicit Stream(std::uint64_t master_seed)
        : Stream(master_seed, StreamPurpose::aux, 0) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t id() const { return id_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// One word split into an open uniform (top 53 bits) and a fair sign
    /// (lowest bit). Used on the hot path of the exit sampler.
    double uniform_open_with_sign(int& sign)
    {
        const std::uint64_t w = engine_();
        sign = (w & 1u) ? 1 : -1;
        return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(*this); }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    std::uint64_t id_;
};

} // namespace gridrv
