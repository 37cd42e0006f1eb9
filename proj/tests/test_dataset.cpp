// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "parlab/model.hpp"
#include "test_support.hpp"

using namespace parlab;
using model::ModelConfig;
using model::SyntheticSample;
using model::Vocab;

TEST_CASE("dataset generation is deterministic per seed") {
    ModelConfig cfg;
    auto a = model::gen_synthetic_dataset(cfg, 50, num::SeededStream(9));
    auto b = model::gen_synthetic_dataset(cfg, 50, num::SeededStream(9));
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].grid == b[i].grid);
        CHECK(a[i].question == b[i].question);
        CHECK(a[i].answer == b[i].answer);
    }
    auto c = model::gen_synthetic_dataset(cfg, 50, num::SeededStream(10));
    bool any_diff = false;
    for (size_t i = 0; i < a.size(); ++i)
        any_diff = any_diff || a[i].grid != c[i].grid || a[i].question != c[i].question;
    CHECK(any_diff);
}

TEST_CASE("answers are exactly computable from grid and question") {
    ModelConfig cfg;
    Vocab vocab = cfg.vocab();
    auto samples = model::gen_synthetic_dataset(cfg, 500, num::SeededStream(4));
    int zero_count_seen = 0;
    for (const auto& s : samples) {
        if (s.question[0] == Vocab::kCount) {
            int color = s.question[1] - vocab.color_token(0);
            int count = 0;
            for (uint8_t cell : s.grid) count += cell == color ? 1 : 0;
            CHECK(s.answer == vocab.digit_token(count));
            if (count == 0) ++zero_count_seen;
        } else {
            REQUIRE(s.question.size() == 6);
            int r = s.question[3] - vocab.row_token(0);
            int c = s.question[4] - vocab.col_token(0);
            CHECK(s.answer ==
                  vocab.color_token(s.grid[static_cast<size_t>(r * cfg.grid_side + c)]));
        }
    }
    // the zero-occurrence case ("count red" with no red cells -> "0") occurs
    CHECK(zero_count_seen > 0);
}

TEST_CASE("question templates are ~50/50 and answers are balanced") {
    ModelConfig cfg;
    auto samples = model::gen_synthetic_dataset(cfg, 10000, num::SeededStream(7));
    int count_template = 0;
    std::map<int, int> answer_freq;
    for (const auto& s : samples) {
        count_template += s.question[0] == Vocab::kCount ? 1 : 0;
        answer_freq[s.answer]++;
    }
    double frac = static_cast<double>(count_template) / 10000.0;
    CHECK(frac > 0.45);
    CHECK(frac < 0.55);

    // counting oracle: empirical entropy and majority class over the set
    double entropy = 0.0;
    double majority = 0.0;
    for (auto& [tok, n] : answer_freq) {
        double p = n / 10000.0;
        entropy -= p * std::log(p);
        majority = std::max(majority, p);
    }
    CHECK(entropy >= 1.5);
    CHECK(majority < 0.35);
}

TEST_CASE("dataset JSONL round trip") {
    ModelConfig cfg;
    auto dir = std::filesystem::temp_directory_path() / "parlab_data_test";
    std::filesystem::create_directories(dir);
    std::string path = (dir / "d.jsonl").string();
    auto samples = model::gen_synthetic_dataset(cfg, 20, num::SeededStream(3));
    model::save_dataset_jsonl(samples, cfg, path, R"({"kind":"header","seed":3})");
    auto loaded = model::load_dataset_jsonl(path);
    REQUIRE(loaded.size() == samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        CHECK(loaded[i].id == samples[i].id);
        CHECK(loaded[i].grid == samples[i].grid);
        CHECK(loaded[i].question == samples[i].question);
        CHECK(loaded[i].answer == samples[i].answer);
    }
}
