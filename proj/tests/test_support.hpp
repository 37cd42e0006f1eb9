// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, independent of the library implementation paths they
// check: a triple-loop matrix product and a plain-loop double-precision
// decoder forward.

#ifndef PARLAB_TEST_SUPPORT_HPP
#define PARLAB_TEST_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include "parlab/model.hpp"
#include "parlab/tensor.hpp"

namespace parlab::test {

/// Brute-force reference product, accumulation in double.
template <typename T>
num::TensorT<T> matmul_reference(const num::TensorT<T>& a, const num::TensorT<T>& b) {
    num::TensorT<T> out = num::TensorT<T>::zeros({a.rows(), b.cols()});
    for (int64_t i = 0; i < a.rows(); ++i)
        for (int64_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int64_t k = 0; k < a.cols(); ++k)
                acc += static_cast<double>(a.at(i, k)) * static_cast<double>(b.at(k, j));
            out.at(i, j) = static_cast<T>(acc);
        }
    return out;
}

inline double max_abs_diff(const num::Tensor& a, const num::Tensor& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(a.data[i]) -
                                         static_cast<double>(b.data[i])));
    return worst;
}

using Mat = std::vector<std::vector<double>>;

/// Plain-loop decoder forward in double precision. Written directly from
/// the architecture definition (pre-norm blocks, erf GELU, causal mask on
/// original positions) without the tape, Eigen, or the graph builder.
inline Mat reference_forward_logits(const model::LvlmWeights& w,
                                    const model::SyntheticSample& sample,
                                    const model::PruneAction& action) {
    const auto& cfg = w.config;
    const int S = cfg.visual_tokens();
    const int d = cfg.d_model;
    const int dh = cfg.head_dim();
    const int c = static_cast<int>(sample.question.size());

    auto P = [&](const std::string& name) -> const num::Tensor& { return w.params.at(name); };

    // entry rows + original positions
    Mat x;
    std::vector<int> pos;
    for (int i = 0; i < S + c; ++i) {
        std::vector<double> row(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j) {
            if (i < S)
                row[static_cast<size_t>(j)] =
                    static_cast<double>(P("embed.patch").at(sample.grid[static_cast<size_t>(i)], j)) +
                    static_cast<double>(P("embed.pos").at(i, j));
            else
                row[static_cast<size_t>(j)] =
                    static_cast<double>(
                        P("embed.token").at(sample.question[static_cast<size_t>(i - S)], j)) +
                    static_cast<double>(P("embed.pos").at(i, j));
        }
        x.push_back(std::move(row));
        pos.push_back(i);
    }

    auto layer_norm = [&](const Mat& in, const num::Tensor& gain, const num::Tensor& bias) {
        Mat out = in;
        for (auto& row : out) {
            double mean = 0.0;
            for (double v : row) mean += v;
            mean /= static_cast<double>(row.size());
            double var = 0.0;
            for (double v : row) var += (v - mean) * (v - mean);
            var /= static_cast<double>(row.size());
            double inv = 1.0 / std::sqrt(var + static_cast<double>(model::kLayerNormEps));
            for (size_t j = 0; j < row.size(); ++j)
                row[j] = (row[j] - mean) * inv * static_cast<double>(gain.data[j]) +
                         static_cast<double>(bias.data[j]);
        }
        return out;
    };
    auto linear = [&](const Mat& in, const num::Tensor& wt, const num::Tensor& b) {
        Mat out(in.size(), std::vector<double>(static_cast<size_t>(wt.cols()), 0.0));
        for (size_t i = 0; i < in.size(); ++i)
            for (int64_t j = 0; j < wt.cols(); ++j) {
                double acc = static_cast<double>(b.data[static_cast<size_t>(j)]);
                for (int64_t k = 0; k < wt.rows(); ++k)
                    acc += in[i][static_cast<size_t>(k)] * static_cast<double>(wt.at(k, j));
                out[i][static_cast<size_t>(j)] = acc;
            }
        return out;
    };

    auto drop_now = [&]() {
        std::vector<bool> dropped(static_cast<size_t>(S), false);
        for (int t : action.dropped_tokens) dropped[static_cast<size_t>(t)] = true;
        Mat nx;
        std::vector<int> np;
        for (size_t i = 0; i < x.size(); ++i) {
            int p = pos[i];
            if (p < S && dropped[static_cast<size_t>(p)]) continue;
            nx.push_back(x[i]);
            np.push_back(p);
        }
        x = std::move(nx);
        pos = std::move(np);
    };

    std::vector<bool> skip(static_cast<size_t>(cfg.n_layers), false);
    for (int l : action.dropped_layers) skip[static_cast<size_t>(l)] = true;

    for (int l = 0; l < cfg.n_layers; ++l) {
        if (l == action.drop_at_layer && !action.dropped_tokens.empty()) drop_now();
        if (skip[static_cast<size_t>(l)]) continue;
        std::string pre = model::detail::layer_prefix(l);
        const size_t n = x.size();

        Mat a = layer_norm(x, P(pre + "ln1.gain"), P(pre + "ln1.bias"));
        Mat q = linear(a, P(pre + "attn.wq"), P(pre + "attn.bq"));
        Mat k = linear(a, P(pre + "attn.wk"), P(pre + "attn.bk"));
        Mat v = linear(a, P(pre + "attn.wv"), P(pre + "attn.bv"));

        Mat attn_out(n, std::vector<double>(static_cast<size_t>(d), 0.0));
        for (int h = 0; h < cfg.n_heads; ++h) {
            int off = h * dh;
            for (size_t i = 0; i < n; ++i) {
                std::vector<double> scores(n, -1e9);
                double mx = -1e300;
                for (size_t j = 0; j < n; ++j) {
                    if (pos[j] > pos[i]) continue;
                    double s = 0.0;
                    for (int t = 0; t < dh; ++t)
                        s += q[i][static_cast<size_t>(off + t)] * k[j][static_cast<size_t>(off + t)];
                    s /= std::sqrt(static_cast<double>(dh));
                    scores[j] = s;
                    mx = std::max(mx, s);
                }
                double z = 0.0;
                for (size_t j = 0; j < n; ++j) {
                    scores[j] = pos[j] > pos[i] ? 0.0 : std::exp(scores[j] - mx);
                    z += scores[j];
                }
                for (size_t j = 0; j < n; ++j) {
                    double wgt = scores[j] / z;
                    for (int t = 0; t < dh; ++t)
                        attn_out[i][static_cast<size_t>(off + t)] +=
                            wgt * v[j][static_cast<size_t>(off + t)];
                }
            }
        }
        Mat o = linear(attn_out, P(pre + "attn.wo"), P(pre + "attn.bo"));
        for (size_t i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) x[i][static_cast<size_t>(j)] += o[i][static_cast<size_t>(j)];

        Mat f = layer_norm(x, P(pre + "ln2.gain"), P(pre + "ln2.bias"));
        Mat h1 = linear(f, P(pre + "ffn.w1"), P(pre + "ffn.b1"));
        for (auto& row : h1)
            for (double& val : row)
                val = val * 0.5 * (1.0 + std::erf(val / std::numbers::sqrt2));
        Mat h2 = linear(h1, P(pre + "ffn.w2"), P(pre + "ffn.b2"));
        for (size_t i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) x[i][static_cast<size_t>(j)] += h2[i][static_cast<size_t>(j)];
    }

    Mat fin = layer_norm(x, P("final_norm.gain"), P("final_norm.bias"));
    return linear(fin, P("head.w"), P("head.b"));
}

inline model::ModelConfig tiny_config() {
    model::ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_ff = 16;
    cfg.grid_side = 2;
    cfg.palette_size = 4;
    cfg.max_text_len = 8;
    cfg.vocab_size = 32;
    return cfg;
}

} // namespace parlab::test

#endif
