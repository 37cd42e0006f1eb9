// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "parlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "parlab/errors.hpp"

namespace parlab::num {

uint64_t fnv1a64(const void* bytes, size_t len, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

namespace {
constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ull;

uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
} // namespace

SeededStream SeededStream::derive(std::string_view label, uint64_t index) const {
    uint64_t h = fnv1a64(label);
    h = fnv1a64(&index, sizeof(index), h);
    return SeededStream(seed_ ^ h);
}

uint64_t SeededStream::next_u64() {
    ++counter_;
    return mix(seed_ + counter_ * kGamma);
}

double SeededStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t SeededStream::uniform_int(uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_int: n must be positive");
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double SeededStream::gaussian() {
    // u1 in (0,1] keeps the log finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> SeededStream::sample_without_replacement(int n, int k) {
    if (k < 0 || k > n) throw ArgumentError("sample_without_replacement: k=" + std::to_string(k) +
                                            " out of range for n=" + std::to_string(n));
    std::vector<int> pool(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(uniform_int(static_cast<uint64_t>(n - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace parlab::num
