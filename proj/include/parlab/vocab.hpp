// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_VOCAB_HPP
#define PARLAB_VOCAB_HPP

#include <string>
#include <vector>

namespace parlab::model {

/// Fixed token layout for the synthetic grid-VQA task. Ids are a pure
/// function of (palette_size, grid_side):
///   0            <end>
///   1..5         what color at count ?
///   6..6+P-1     color words
///   then         digit words "0".."9"
///   then         row words r0..r{g-1}, column words c0..c{g-1}
class Vocab {
public:
    Vocab(int palette_size, int grid_side);

    static constexpr int kEnd = 0;
    static constexpr int kWhat = 1;
    static constexpr int kColor = 2;
    static constexpr int kAt = 3;
    static constexpr int kCount = 4;
    static constexpr int kQMark = 5;

    int color_token(int color) const;
    int digit_token(int digit) const;
    int row_token(int r) const;
    int col_token(int c) const;

    /// Number of distinct token ids in use; vocab_size must be >= this.
    int used() const { return used_; }

    const std::string& name(int token) const;
    std::string render(const std::vector<int>& tokens) const;

    int palette_size() const { return palette_; }
    int grid_side() const { return grid_; }

private:
    int palette_;
    int grid_;
    int used_;
    std::vector<std::string> names_;
};

} // namespace parlab::model

#endif
