// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "parlab/vocab.hpp"

#include "parlab/errors.hpp"

namespace parlab::model {

namespace {
const char* kColorNames[] = {"red", "green", "blue", "yellow", "purple", "orange"};
} // namespace

Vocab::Vocab(int palette_size, int grid_side) : palette_(palette_size), grid_(grid_side) {
    if (palette_size < 2 || palette_size > 6)
        throw ArgumentError("palette_size must be in [2,6], got " + std::to_string(palette_size));
    if (grid_side < 1)
        throw ArgumentError("grid_side must be positive, got " + std::to_string(grid_side));
    names_ = {"<end>", "what", "color", "at", "count", "?"};
    for (int i = 0; i < palette_; ++i) names_.emplace_back(kColorNames[i]);
    for (int i = 0; i < 10; ++i) names_.emplace_back(std::to_string(i));
    for (int i = 0; i < grid_; ++i) names_.emplace_back("r" + std::to_string(i));
    for (int i = 0; i < grid_; ++i) names_.emplace_back("c" + std::to_string(i));
    used_ = static_cast<int>(names_.size());
}

int Vocab::color_token(int color) const {
    if (color < 0 || color >= palette_) throw ArgumentError("color index out of palette range");
    return 6 + color;
}

int Vocab::digit_token(int digit) const {
    if (digit < 0 || digit > 9) throw ArgumentError("digit out of range");
    return 6 + palette_ + digit;
}

int Vocab::row_token(int r) const {
    if (r < 0 || r >= grid_) throw ArgumentError("row out of range");
    return 6 + palette_ + 10 + r;
}

int Vocab::col_token(int c) const {
    if (c < 0 || c >= grid_) throw ArgumentError("column out of range");
    return 6 + palette_ + 10 + grid_ + c;
}

const std::string& Vocab::name(int token) const {
    if (token < 0 || token >= used_) {
        static const std::string unk = "<unused>";
        return unk;
    }
    return names_[static_cast<size_t>(token)];
}

std::string Vocab::render(const std::vector<int>& tokens) const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += name(tokens[i]);
    }
    return out;
}

} // namespace parlab::model
