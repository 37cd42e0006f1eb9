// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_MODEL_HPP
#define PARLAB_MODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parlab/errors.hpp"
#include "parlab/rng.hpp"
#include "parlab/tape.hpp"
#include "parlab/tensor.hpp"
#include "parlab/vocab.hpp"

namespace parlab::model {

using num::ParamSet;
using num::ParamSetT;
using num::SeededStream;
using num::TapeT;
using num::Tensor;
using num::TensorT;

inline constexpr float kLayerNormEps = 1e-5f;

struct ModelConfig {
    int n_layers = 8;
    int d_model = 64;
    int n_heads = 4;
    int d_ff = 256;
    int vocab_size = 64;
    int grid_side = 8;
    int max_text_len = 16;
    int palette_size = 6;

    int visual_tokens() const { return grid_side * grid_side; }
    int head_dim() const { return d_model / n_heads; }
    /// Position slots cover [visual; question; answer; end].
    int pos_slots() const { return visual_tokens() + max_text_len + 2; }

    void validate() const;
    Vocab vocab() const { return Vocab(palette_size, grid_side); }
};

/// One grid-VQA instance. The answer is exactly computable from the grid
/// and the question (count-of-color or color-at-cell).
struct SyntheticSample {
    int64_t id = 0;
    std::vector<uint8_t> grid;  // grid_side^2 color indices, row-major
    std::vector<int> question;  // token ids, ends with "?"
    int answer = 0;             // token id
};

/// One concrete acceleration decision: layers to skip, visual tokens to
/// drop, and the stack depth at which the drop takes effect (0 = entry,
/// n_layers = never).
struct PruneAction {
    std::vector<int> dropped_layers;
    std::vector<int> dropped_tokens;
    int drop_at_layer = 0;

    bool empty() const { return dropped_layers.empty() && dropped_tokens.empty(); }
    void validate(const ModelConfig& cfg) const;
    bool operator==(const PruneAction& o) const = default;
};

/// Block-boundary states and per-head attention maps from one forward
/// pass. hidden_states[l] is the active state entering layer l (after any
/// boundary token drop); hidden_states[0] is the embedding output and
/// hidden_states[n_layers] the final block output. attention[l] is empty
/// when layer l was skipped. positions maps active rows to original
/// sequence positions per boundary.
struct TraceBundle {
    std::vector<Tensor> hidden_states;
    std::vector<std::vector<Tensor>> attention;
    std::vector<std::vector<int>> positions;
};

struct LvlmWeights {
    ModelConfig config;
    ParamSet params;
};

// ---- weights --------------------------------------------------------

LvlmWeights init_weights(const ModelConfig& cfg, SeededStream stream);
int64_t lvlm_param_count(const ModelConfig& cfg);
void save_weights(const LvlmWeights& w, const std::string& stem);
LvlmWeights load_weights(const std::string& stem);

// ---- graph builder ---------------------------------------------------

template <typename T>
using LeafMap = std::map<std::string, typename TapeT<T>::Var>;

/// Register every parameter as a tape leaf; trainable leaves collect
/// gradients in backward().
template <typename T>
LeafMap<T> register_params(TapeT<T>& tape, const ParamSetT<T>& params, bool trainable) {
    LeafMap<T> leaves;
    for (const auto& [name, tensor] : params)
        leaves[name] = trainable ? tape.param(name, tensor) : tape.constant(tensor);
    return leaves;
}

template <typename T>
struct LvlmGraph {
    typename TapeT<T>::Var logits = -1;                       // [n_final x vocab]
    std::vector<typename TapeT<T>::Var> boundaries;           // n_layers+1 states
    std::vector<std::vector<typename TapeT<T>::Var>> attention; // [layer][head]
    std::vector<std::vector<int>> positions;                  // per boundary
    std::vector<int> final_positions;
};

namespace detail {

template <typename T>
typename TapeT<T>::Var causal_mask_leaf(TapeT<T>& tape, const std::vector<int>& positions) {
    int64_t n = static_cast<int64_t>(positions.size());
    TensorT<T> m = TensorT<T>::zeros({n, n});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j)
            if (positions[static_cast<size_t>(j)] > positions[static_cast<size_t>(i)])
                m.at(i, j) = T(-1e9);
    return tape.constant(std::move(m));
}

/// Pre-norm transformer block shared by the host model and the
/// meta-router. `mask` < 0 means no attention mask. Appends the per-head
/// attention vars to `attn_out` when it is non-null.
template <typename T>
typename TapeT<T>::Var transformer_block(TapeT<T>& tape, const LeafMap<T>& leaf,
                                         const std::string& prefix, typename TapeT<T>::Var x,
                                         int n_heads, typename TapeT<T>::Var mask,
                                         std::vector<typename TapeT<T>::Var>* attn_out) {
    using Var = typename TapeT<T>::Var;
    auto L = [&](const std::string& suffix) -> Var { return leaf.at(prefix + suffix); };

    int64_t d = tape.value(x).cols();
    int64_t dh = d / n_heads;
    T inv_sqrt_dh = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

    Var a = tape.layer_norm(x, L("ln1.gain"), L("ln1.bias"), static_cast<T>(kLayerNormEps));
    Var q = tape.add(tape.matmul(a, L("attn.wq")), L("attn.bq"));
    Var k = tape.add(tape.matmul(a, L("attn.wk")), L("attn.bk"));
    Var v = tape.add(tape.matmul(a, L("attn.wv")), L("attn.bv"));

    std::vector<Var> head_outs;
    for (int h = 0; h < n_heads; ++h) {
        Var qh = tape.cols_slice(q, h * dh, dh);
        Var kh = tape.cols_slice(k, h * dh, dh);
        Var vh = tape.cols_slice(v, h * dh, dh);
        Var scores = tape.affine(tape.matmul(qh, tape.transpose(kh)), inv_sqrt_dh, T(0));
        if (mask >= 0) scores = tape.add(scores, mask);
        Var attn = tape.softmax_rows(scores);
        if (attn_out) attn_out->push_back(attn);
        head_outs.push_back(tape.matmul(attn, vh));
    }
    Var o = tape.concat_cols(std::span<const Var>(head_outs.data(), head_outs.size()));
    x = tape.add(x, tape.add(tape.matmul(o, L("attn.wo")), L("attn.bo")));

    Var f = tape.layer_norm(x, L("ln2.gain"), L("ln2.bias"), static_cast<T>(kLayerNormEps));
    Var h1 = tape.gelu(tape.add(tape.matmul(f, L("ffn.w1")), L("ffn.b1")));
    x = tape.add(x, tape.add(tape.matmul(h1, L("ffn.w2")), L("ffn.b2")));
    return x;
}

inline std::string layer_prefix(int layer) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "layer.%02d.", layer);
    return buf;
}

} // namespace detail

/// Run the transformer stack from precomputed entry rows. `positions`
/// carries the original sequence position of each row; the causal mask
/// compares positions, so gathered subsets behave exactly like a model
/// built without the dropped rows. Skipped layers are the identity on
/// the residual stream; dropped visual tokens leave the active set at
/// drop_at_layer (row indices below n_visual count as visual).
template <typename T>
LvlmGraph<T> build_lvlm_stack(TapeT<T>& tape, const LeafMap<T>& leaf, const ModelConfig& cfg,
                              typename TapeT<T>::Var x, std::vector<int> positions, int n_visual,
                              const PruneAction& action, bool capture = false) {
    using Var = typename TapeT<T>::Var;
    action.validate(cfg);

    // Row indices that survive the token drop (visual complement + text).
    std::vector<int> surviving_rows;
    if (!action.dropped_tokens.empty()) {
        std::vector<bool> dropped(static_cast<size_t>(n_visual), false);
        for (int t : action.dropped_tokens) dropped[static_cast<size_t>(t)] = true;
        for (int i = 0; i < static_cast<int>(positions.size()); ++i)
            if (i >= n_visual || !dropped[static_cast<size_t>(i)]) surviving_rows.push_back(i);
    }

    std::vector<bool> skip(static_cast<size_t>(cfg.n_layers), false);
    for (int l : action.dropped_layers) skip[static_cast<size_t>(l)] = true;

    LvlmGraph<T> g;
    Var mask = -1;
    auto apply_drop = [&]() {
        x = tape.rows_gather(x, surviving_rows);
        std::vector<int> np;
        np.reserve(surviving_rows.size());
        for (int r : surviving_rows) np.push_back(positions[static_cast<size_t>(r)]);
        positions = std::move(np);
        mask = -1; // active set changed; rebuild on demand
    };

    for (int l = 0; l < cfg.n_layers; ++l) {
        if (l == action.drop_at_layer && !action.dropped_tokens.empty()) apply_drop();
        g.boundaries.push_back(x);
        g.positions.push_back(positions);
        g.attention.emplace_back();
        if (skip[static_cast<size_t>(l)]) continue;
        if (mask < 0) mask = detail::causal_mask_leaf(tape, positions);
        x = detail::transformer_block(tape, leaf, detail::layer_prefix(l), x, cfg.n_heads, mask,
                                      capture ? &g.attention.back() : nullptr);
    }
    // drop_at_layer == n_layers never matches the loop: the drop is a no-op.
    g.boundaries.push_back(x);
    g.positions.push_back(positions);
    g.final_positions = positions;

    Var fin = tape.layer_norm(x, leaf.at("final_norm.gain"), leaf.at("final_norm.bias"),
                              static_cast<T>(kLayerNormEps));
    g.logits = tape.add(tape.matmul(fin, leaf.at("head.w")), leaf.at("head.b"));
    return g;
}

/// Build the decoder forward over the sequence [visual tokens; text
/// tokens] with causal masking. Kept tokens retain their original
/// positional embeddings.
template <typename T>
LvlmGraph<T> build_lvlm_graph(TapeT<T>& tape, const LeafMap<T>& leaf, const ModelConfig& cfg,
                              const std::vector<uint8_t>& grid, const std::vector<int>& text,
                              const PruneAction& action, bool capture = false) {
    using Var = typename TapeT<T>::Var;
    const int S = cfg.visual_tokens();
    const int c = static_cast<int>(text.size());
    if (static_cast<int>(grid.size()) != S)
        throw ContractError("grid size " + std::to_string(grid.size()) + " != visual tokens " +
                            std::to_string(S));
    if (c < 1 || c > cfg.max_text_len + 2)
        throw ContractError("text length " + std::to_string(c) + " out of range");

    // Embedding: patch projector + positional for visual rows, token
    // embedding + positional for text rows.
    std::vector<int> grid_idx(grid.begin(), grid.end());
    std::vector<int> vis_pos(static_cast<size_t>(S));
    for (int i = 0; i < S; ++i) vis_pos[static_cast<size_t>(i)] = i;
    std::vector<int> txt_pos(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) txt_pos[static_cast<size_t>(i)] = S + i;

    Var vis = tape.add(tape.rows_gather(leaf.at("embed.patch"), grid_idx),
                       tape.rows_gather(leaf.at("embed.pos"), vis_pos));
    Var txt = tape.add(tape.rows_gather(leaf.at("embed.token"), text),
                       tape.rows_gather(leaf.at("embed.pos"), txt_pos));
    Var x = tape.concat_rows({vis, txt});

    std::vector<int> positions(static_cast<size_t>(S + c));
    for (int i = 0; i < S + c; ++i) positions[static_cast<size_t>(i)] = i;

    return build_lvlm_stack(tape, leaf, cfg, x, std::move(positions), S, action, capture);
}

/// Cross-entropy training objective: predict the answer token at the
/// final question position and <end> right after it. Mean over the two
/// supervised positions.
template <typename T>
typename TapeT<T>::Var lvlm_loss_graph(TapeT<T>& tape, const LeafMap<T>& leaf,
                                       const ModelConfig& cfg, const SyntheticSample& sample) {
    using Var = typename TapeT<T>::Var;
    std::vector<int> text = sample.question;
    text.push_back(sample.answer);
    auto g = build_lvlm_graph(tape, leaf, cfg, sample.grid, text, PruneAction{});

    int n_rows = static_cast<int>(tape.value(g.logits).rows());
    int q_last = n_rows - 2; // last question row; answer row follows
    Var picked = tape.rows_gather(g.logits, {q_last, q_last + 1});
    Var lp = tape.log(tape.softmax_rows(picked));

    TensorT<T> onehot = TensorT<T>::zeros({2, cfg.vocab_size});
    onehot.at(0, sample.answer) = T(1);
    onehot.at(1, Vocab::kEnd) = T(1);
    Var target = tape.constant(std::move(onehot));
    return tape.affine(tape.sum(tape.mul(target, lp)), T(-0.5), T(0));
}

// ---- product forward APIs (float) -------------------------------------

struct ForwardOutput {
    Tensor logits;                    // [n_active_final x vocab]
    std::vector<int> positions;       // original sequence position per row
    std::optional<TraceBundle> trace;
};

ForwardOutput lvlm_forward(const LvlmWeights& w, const SyntheticSample& sample,
                           const PruneAction& action, bool capture = false);

/// Softmax (computed in 64-bit) of the logits row at the answer slot —
/// the final question position.
std::vector<double> answer_distribution(const LvlmWeights& w, const SyntheticSample& sample,
                                        const PruneAction& action);

/// Argmax decoding from the answer slot; ties break toward the lower
/// token id; stops at <end> or after max_steps tokens.
std::vector<int> greedy_decode(const LvlmWeights& w, const SyntheticSample& sample,
                               const PruneAction& action, int max_steps);

/// Entry embeddings (the layer-0 input rows) for the meta-router.
Tensor entry_visual_embeddings(const LvlmWeights& w, const SyntheticSample& sample);
Tensor entry_text_embeddings(const LvlmWeights& w, const SyntheticSample& sample);

// ---- dataset -----------------------------------------------------------

std::vector<SyntheticSample> gen_synthetic_dataset(const ModelConfig& cfg, int n,
                                                   SeededStream stream);

void save_dataset_jsonl(const std::vector<SyntheticSample>& samples, const ModelConfig& cfg,
                        const std::string& path, const std::string& provenance_json);
std::vector<SyntheticSample> load_dataset_jsonl(const std::string& path);

// ---- training ----------------------------------------------------------

struct PretrainConfig {
    int steps = 3000;
    int batch_size = 32;
    float lr = 3e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    int eval_every = 150;
    int eval_subset = 500;        // samples used for in-training eval
    double early_stop_acc = 0.97; // stop once reached (<= 0 disables)
    uint64_t seed = 1;
    int jobs = 1;
};

struct PretrainMetrics {
    struct Row {
        int step;
        double loss;
        double eval_acc;
    };
    std::vector<Row> rows;
    int steps_run = 0;
    double final_eval_acc = 0.0;
};

LvlmWeights pretrain(const ModelConfig& cfg, const std::vector<SyntheticSample>& train_set,
                     const std::vector<SyntheticSample>& eval_set, const PretrainConfig& pc,
                     PretrainMetrics* metrics = nullptr);

/// Fraction of samples whose answer-slot argmax equals the true answer.
double eval_accuracy(const LvlmWeights& w, const std::vector<SyntheticSample>& samples,
                     const PruneAction& action, int jobs = 1);

/// Per-sample action variant (attention ranking produces per-sample actions).
double eval_accuracy_per_sample(const LvlmWeights& w, const std::vector<SyntheticSample>& samples,
                                const std::function<PruneAction(const SyntheticSample&)>& provider,
                                int jobs = 1);

// ---- optimizer ----------------------------------------------------------

struct AdamState {
    num::GradRecord m, v;
    int64_t t = 0;
};

void adam_step(ParamSet& params, const num::GradRecord& grads, AdamState& state, float lr,
               float beta1, float beta2, float eps = 1e-8f);

} // namespace parlab::model

#endif
