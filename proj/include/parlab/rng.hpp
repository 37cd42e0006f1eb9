// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_RNG_HPP
#define PARLAB_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace parlab::num {

/// FNV-1a 64-bit hash; used for stream derivation and artifact provenance.
uint64_t fnv1a64(const void* bytes, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64(std::string_view s);

/// Counter-based pseudo-random stream. Draw i is a pure function of
/// (seed, i) — the splitmix64 finalizer applied to seed + i*gamma — so
/// identical seeds give identical sequences on every platform. Derived
/// streams (seed ^ fnv1a64(label)) are independent for distinct labels.
class SeededStream {
public:
    explicit SeededStream(uint64_t seed) : seed_(seed) {}

    uint64_t seed() const { return seed_; }
    uint64_t counter() const { return counter_; }

    SeededStream derive(std::string_view label) const {
        return SeededStream(seed_ ^ fnv1a64(label));
    }
    SeededStream derive(std::string_view label, uint64_t index) const;

    uint64_t next_u64();

    /// Uniform in [0, 1), 53 significant bits.
    double uniform();

    /// Uniform integer in [0, n). n must be positive.
    uint64_t uniform_int(uint64_t n);

    /// One standard normal draw via Box-Muller (consumes two uniforms).
    double gaussian();

    /// k distinct values sampled uniformly from {0, ..., n-1}, sorted ascending.
    std::vector<int> sample_without_replacement(int n, int k);

    /// In-place Fisher-Yates shuffle.
    template <typename Seq>
    void shuffle(Seq& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

} // namespace parlab::num

#endif
