// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "parlab/rng.hpp"
#include "parlab/tape.hpp"

using namespace parlab;
using num::SeededStream;

TEST_CASE("identical seeds give identical draw sequences") {
    SeededStream a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams are label-dependent") {
    SeededStream base(9);
    auto a = base.derive("alpha");
    auto b = base.derive("beta");
    CHECK(a.next_u64() != b.next_u64());
    auto a2 = base.derive("alpha");
    CHECK(a2.next_u64() == SeededStream(9).derive("alpha").next_u64());
}

TEST_CASE("uniform stays in [0,1)") {
    SeededStream s(5);
    for (int i = 0; i < 1000; ++i) {
        double u = s.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sample_gaussian with std=0 is the constant function") {
    SeededStream s(1);
    auto t = num::sample_gaussian<float>(s, 0.0, 0.0, 5);
    for (float v : t.data) CHECK(v == 0.0f);
    auto t2 = num::sample_gaussian<float>(s, 3.5, 0.0, 4);
    for (float v : t2.data) CHECK(v == 3.5f);
}

TEST_CASE("sample_gaussian is deterministic per seed") {
    SeededStream a(77), b(77);
    auto x = num::sample_gaussian<float>(a, 0.0, 1.0, 2);
    auto y = num::sample_gaussian<float>(b, 0.0, 1.0, 2);
    CHECK(x.data == y.data);
}

TEST_CASE("sample_gaussian rejects negative std") {
    SeededStream s(1);
    CHECK_THROWS_AS(num::sample_gaussian<float>(s, 0.0, -1.0, 3), ArgumentError);
}

TEST_CASE("gaussian sample statistics at (0,10)") {
    // statistical oracle: for n=100000, se(mean)=std/sqrt(n)~0.032 and
    // se(std)~std/sqrt(2n)~0.022, so the bounds below are > 3 sigma wide
    SeededStream s(2024);
    const int n = 100000;
    auto t = num::sample_gaussian<double>(s, 0.0, 10.0, n);
    double mean = 0.0;
    for (double v : t.data) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : t.data) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / (n - 1));
    CHECK(std::abs(mean) <= 0.1 * 10.0);
    CHECK(sd >= 0.99 * 10.0);
    CHECK(sd <= 1.01 * 10.0);
}

TEST_CASE("sample_without_replacement covers the range exactly") {
    SeededStream s(3);
    auto v = s.sample_without_replacement(8, 8);
    for (int i = 0; i < 8; ++i) CHECK(v[static_cast<size_t>(i)] == i);
    auto w = s.sample_without_replacement(10, 3);
    CHECK(w.size() == 3);
    CHECK(std::is_sorted(w.begin(), w.end()));
    CHECK(w[0] != w[1]);
}
