#pragma once

#include <cstdint>
#include <cstddef>

namespace isoguard {

// Deterministic random source used everywhere randomness is needed.
// std::uniform_*_distribution is implementation-defined across standard
// libraries, so the generator and the draw helpers are spelled out here;
// identical seeds give identical streams on every platform.
//
// Generator: xoshiro256** seeded through splitmix64.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

class Rng {
public:
    explicit Rng(uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : state_) w = sm.next();
    }

    // Independent stream for a numbered task (one per isolation tree, one per
    // k-means restart). Streams depend only on (master seed, stream id), never
    // on scheduling, so parallel builds stay reproducible.
    static Rng derive(uint64_t master_seed, uint64_t stream_id) {
        SplitMix64 sm(master_seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
        uint64_t mixed = sm.next() ^ sm.next();
        return Rng(mixed);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1); rejects the (astronomically rare) exact zero.
    double uniform_open01() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    // Uniform index in [0, n); n must be > 0. Multiply-shift map.
    size_t uniform_index(size_t n) {
        return static_cast<size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace isoguard
