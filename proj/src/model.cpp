// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "parlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "parlab/checkpoint.hpp"
#include "parlab/parallel.hpp"

namespace parlab::model {

using num::GradRecord;
using num::Tape;

// ---- config / action validation ---------------------------------------

void ModelConfig::validate() const {
    if (n_layers < 1 || d_model < 1 || n_heads < 1 || d_ff < 1 || vocab_size < 1 ||
        grid_side < 1 || max_text_len < 1 || palette_size < 2)
        throw ConfigError("model config has non-positive dimensions");
    if (d_model % n_heads != 0)
        throw ConfigError("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                          std::to_string(n_heads));
    Vocab v(palette_size, grid_side);
    if (vocab_size < v.used())
        throw ConfigError("vocab_size " + std::to_string(vocab_size) + " below required " +
                          std::to_string(v.used()));
    if (max_text_len < 6) throw ConfigError("max_text_len must fit the longest question (6)");
}

void PruneAction::validate(const ModelConfig& cfg) const {
    auto check_sorted_unique = [](const std::vector<int>& v, int lo, int hi,
                                  const char* what) {
        int prev = -1;
        for (int x : v) {
            if (x < lo || x >= hi)
                throw ContractError(std::string(what) + " index " + std::to_string(x) +
                                    " out of range [" + std::to_string(lo) + "," +
                                    std::to_string(hi) + ")");
            if (x <= prev)
                throw ContractError(std::string(what) + " indices not sorted/unique");
            prev = x;
        }
    };
    check_sorted_unique(dropped_layers, 0, cfg.n_layers, "dropped layer");
    check_sorted_unique(dropped_tokens, 0, cfg.visual_tokens(), "dropped token");
    if (drop_at_layer < 0 || drop_at_layer > cfg.n_layers)
        throw ContractError("drop_at_layer " + std::to_string(drop_at_layer) +
                            " out of range [0," + std::to_string(cfg.n_layers) + "]");
}

// ---- weights ------------------------------------------------------------

namespace {

Tensor normal_init(SeededStream stream, std::vector<int64_t> shape, double std) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(std * stream.gaussian());
    return t;
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"n_layers", c.n_layers},       {"d_model", c.d_model},
            {"n_heads", c.n_heads},         {"d_ff", c.d_ff},
            {"vocab_size", c.vocab_size},   {"grid_side", c.grid_side},
            {"max_text_len", c.max_text_len}, {"palette_size", c.palette_size}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_layers = j.at("n_layers");
    c.d_model = j.at("d_model");
    c.n_heads = j.at("n_heads");
    c.d_ff = j.at("d_ff");
    c.vocab_size = j.at("vocab_size");
    c.grid_side = j.at("grid_side");
    c.max_text_len = j.at("max_text_len");
    c.palette_size = j.at("palette_size");
    c.validate();
    return c;
}

} // namespace

LvlmWeights init_weights(const ModelConfig& cfg, SeededStream stream) {
    cfg.validate();
    const double std0 = 0.02;
    // Residual-branch output projections are damped by 1/sqrt(2*n_layers).
    const double std_res = std0 / std::sqrt(2.0 * cfg.n_layers);
    const int d = cfg.d_model;

    ParamSet p;
    auto put_normal = [&](const std::string& name, std::vector<int64_t> shape, double std) {
        p.emplace(name, normal_init(stream.derive(name), std::move(shape), std));
    };
    auto put_const = [&](const std::string& name, std::vector<int64_t> shape, float v) {
        p.emplace(name, Tensor::full(std::move(shape), v));
    };

    put_normal("embed.patch", {cfg.palette_size, d}, std0);
    put_normal("embed.token", {cfg.vocab_size, d}, std0);
    put_normal("embed.pos", {cfg.pos_slots(), d}, std0);
    for (int l = 0; l < cfg.n_layers; ++l) {
        std::string pre = detail::layer_prefix(l);
        put_const(pre + "ln1.gain", {d}, 1.0f);
        put_const(pre + "ln1.bias", {d}, 0.0f);
        put_normal(pre + "attn.wq", {d, d}, std0);
        put_const(pre + "attn.bq", {d}, 0.0f);
        put_normal(pre + "attn.wk", {d, d}, std0);
        put_const(pre + "attn.bk", {d}, 0.0f);
        put_normal(pre + "attn.wv", {d, d}, std0);
        put_const(pre + "attn.bv", {d}, 0.0f);
        put_normal(pre + "attn.wo", {d, d}, std_res);
        put_const(pre + "attn.bo", {d}, 0.0f);
        put_const(pre + "ln2.gain", {d}, 1.0f);
        put_const(pre + "ln2.bias", {d}, 0.0f);
        put_normal(pre + "ffn.w1", {d, cfg.d_ff}, std0);
        put_const(pre + "ffn.b1", {cfg.d_ff}, 0.0f);
        put_normal(pre + "ffn.w2", {cfg.d_ff, d}, std_res);
        put_const(pre + "ffn.b2", {d}, 0.0f);
    }
    put_const("final_norm.gain", {d}, 1.0f);
    put_const("final_norm.bias", {d}, 0.0f);
    put_normal("head.w", {d, cfg.vocab_size}, std0);
    put_const("head.b", {cfg.vocab_size}, 0.0f);

    return LvlmWeights{cfg, std::move(p)};
}

int64_t lvlm_param_count(const ModelConfig& cfg) {
    int64_t d = cfg.d_model, dff = cfg.d_ff, V = cfg.vocab_size;
    int64_t per_layer = 2 * d              // ln1
                        + 4 * (d * d + d)  // qkvo
                        + 2 * d            // ln2
                        + d * dff + dff    // ffn in
                        + dff * d + d;     // ffn out
    return cfg.palette_size * d + V * d + static_cast<int64_t>(cfg.pos_slots()) * d +
           cfg.n_layers * per_layer + 2 * d + d * V + V;
}

void save_weights(const LvlmWeights& w, const std::string& stem) {
    num::save_checkpoint(w.params, stem);
    std::ofstream f(stem + ".meta.json", std::ios::trunc);
    if (!f) throw IoError("cannot write " + stem + ".meta.json");
    f << nlohmann::json{{"kind", "lvlm"}, {"model", config_to_json(w.config)}}.dump(2) << "\n";
}

LvlmWeights load_weights(const std::string& stem) {
    std::ifstream f(stem + ".meta.json");
    if (!f) throw IoError("cannot read " + stem + ".meta.json");
    nlohmann::json j = nlohmann::json::parse(f);
    LvlmWeights w;
    w.config = config_from_json(j.at("model"));
    w.params = num::load_checkpoint(stem);
    if (num::param_count(w.params) != lvlm_param_count(w.config))
        throw IoError("checkpoint " + stem + " does not match its model config");
    return w;
}

// ---- forward -------------------------------------------------------------

ForwardOutput lvlm_forward(const LvlmWeights& w, const SyntheticSample& sample,
                           const PruneAction& action, bool capture) {
    Tape tape;
    auto leaf = register_params<float>(tape, w.params, false);
    auto g = build_lvlm_graph<float>(tape, leaf, w.config, sample.grid, sample.question, action,
                                     capture);
    ForwardOutput out;
    out.logits = tape.value(g.logits);
    out.positions = g.final_positions;
    if (capture) {
        TraceBundle trace;
        for (auto b : g.boundaries) trace.hidden_states.push_back(tape.value(b));
        for (auto& layer : g.attention) {
            std::vector<Tensor> maps;
            for (auto a : layer) maps.push_back(tape.value(a));
            trace.attention.push_back(std::move(maps));
        }
        trace.positions = g.positions;
        out.trace = std::move(trace);
    }
    return out;
}

std::vector<double> answer_distribution(const LvlmWeights& w, const SyntheticSample& sample,
                                        const PruneAction& action) {
    ForwardOutput out = lvlm_forward(w, sample, action, false);
    int64_t row = out.logits.rows() - 1; // the final question position
    int64_t V = out.logits.cols();
    double mx = -1e300;
    for (int64_t i = 0; i < V; ++i) mx = std::max(mx, static_cast<double>(out.logits.at(row, i)));
    std::vector<double> p(static_cast<size_t>(V));
    double sum = 0.0;
    for (int64_t i = 0; i < V; ++i) {
        p[static_cast<size_t>(i)] = std::exp(static_cast<double>(out.logits.at(row, i)) - mx);
        sum += p[static_cast<size_t>(i)];
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<int> greedy_decode(const LvlmWeights& w, const SyntheticSample& sample,
                               const PruneAction& action, int max_steps) {
    if (max_steps < 1) throw ArgumentError("greedy_decode: max_steps must be >= 1");
    std::vector<int> generated;
    std::vector<int> text = sample.question;
    const int limit = w.config.max_text_len + 2;
    for (int step = 0; step < max_steps; ++step) {
        if (static_cast<int>(text.size()) >= limit) break;
        SyntheticSample s = sample;
        s.question = text;
        ForwardOutput out = lvlm_forward(w, s, action, false);
        int64_t row = out.logits.rows() - 1;
        int best = 0;
        float best_v = out.logits.at(row, 0);
        for (int i = 1; i < w.config.vocab_size; ++i)
            if (out.logits.at(row, i) > best_v) { // strict: ties keep the lower id
                best_v = out.logits.at(row, i);
                best = i;
            }
        generated.push_back(best);
        if (best == Vocab::kEnd) break;
        text.push_back(best);
    }
    return generated;
}

Tensor entry_visual_embeddings(const LvlmWeights& w, const SyntheticSample& sample) {
    const int S = w.config.visual_tokens();
    const int d = w.config.d_model;
    const Tensor& patch = w.params.at("embed.patch");
    const Tensor& pos = w.params.at("embed.pos");
    Tensor out = Tensor::zeros({S, d});
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < d; ++j)
            out.at(i, j) = patch.at(sample.grid[static_cast<size_t>(i)], j) + pos.at(i, j);
    return out;
}

Tensor entry_text_embeddings(const LvlmWeights& w, const SyntheticSample& sample) {
    const int S = w.config.visual_tokens();
    const int d = w.config.d_model;
    const int c = static_cast<int>(sample.question.size());
    const Tensor& tok = w.params.at("embed.token");
    const Tensor& pos = w.params.at("embed.pos");
    Tensor out = Tensor::zeros({c, d});
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < d; ++j)
            out.at(i, j) = tok.at(sample.question[static_cast<size_t>(i)], j) + pos.at(S + i, j);
    return out;
}

// ---- dataset --------------------------------------------------------------

namespace {
constexpr int kMaxCount = 5; // count questions ask about 0..5 occurrences
}

std::vector<SyntheticSample> gen_synthetic_dataset(const ModelConfig& cfg, int n,
                                                   SeededStream stream) {
    if (n <= 0) throw ArgumentError("gen_synthetic_dataset: n must be positive");
    cfg.validate();
    Vocab vocab = cfg.vocab();
    const int g = cfg.grid_side;
    const int S = cfg.visual_tokens();
    const int P = cfg.palette_size;

    std::vector<SyntheticSample> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        SeededStream s = stream.derive("sample", static_cast<uint64_t>(i));
        SyntheticSample sample;
        sample.id = i;
        sample.grid.resize(static_cast<size_t>(S));
        if (s.uniform() < 0.5) {
            // color-at-cell
            for (auto& cell : sample.grid)
                cell = static_cast<uint8_t>(s.uniform_int(static_cast<uint64_t>(P)));
            int r = static_cast<int>(s.uniform_int(static_cast<uint64_t>(g)));
            int c = static_cast<int>(s.uniform_int(static_cast<uint64_t>(g)));
            sample.question = {Vocab::kWhat, Vocab::kColor, Vocab::kAt, vocab.row_token(r),
                               vocab.col_token(c), Vocab::kQMark};
            sample.answer = vocab.color_token(sample.grid[static_cast<size_t>(r * g + c)]);
        } else {
            // count-of-color: plant exactly k cells of the target color
            int target = static_cast<int>(s.uniform_int(static_cast<uint64_t>(P)));
            int k = static_cast<int>(s.uniform_int(std::min(kMaxCount, S) + 1));
            for (auto& cell : sample.grid) {
                int c = static_cast<int>(s.uniform_int(static_cast<uint64_t>(P - 1)));
                if (c >= target) ++c;
                cell = static_cast<uint8_t>(c);
            }
            for (int pos : s.sample_without_replacement(S, k))
                sample.grid[static_cast<size_t>(pos)] = static_cast<uint8_t>(target);
            sample.question = {Vocab::kCount, vocab.color_token(target), Vocab::kQMark};
            sample.answer = vocab.digit_token(k);
        }
        out.push_back(std::move(sample));
    }
    return out;
}

void save_dataset_jsonl(const std::vector<SyntheticSample>& samples, const ModelConfig& cfg,
                        const std::string& path, const std::string& provenance_json) {
    Vocab vocab = cfg.vocab();
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write dataset " + path);
    f << provenance_json << "\n";
    for (const auto& s : samples) {
        nlohmann::json j;
        j["id"] = s.id;
        j["grid"] = std::vector<int>(s.grid.begin(), s.grid.end());
        j["question"] = s.question;
        j["answer"] = s.answer;
        j["question_text"] = vocab.render(s.question);
        j["answer_text"] = vocab.name(s.answer);
        f << j.dump() << "\n";
    }
}

std::vector<SyntheticSample> load_dataset_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read dataset " + path);
    std::vector<SyntheticSample> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("kind") && j.at("kind") == "header") continue;
        SyntheticSample s;
        s.id = j.at("id");
        auto grid = j.at("grid").get<std::vector<int>>();
        s.grid.assign(grid.begin(), grid.end());
        s.question = j.at("question").get<std::vector<int>>();
        s.answer = j.at("answer");
        out.push_back(std::move(s));
    }
    return out;
}

// ---- optimizer --------------------------------------------------------------

void adam_step(ParamSet& params, const GradRecord& grads, AdamState& state, float lr, float beta1,
               float beta2, float eps) {
    if (state.t == 0) {
        for (const auto& [name, t] : params) {
            state.m.emplace(name, Tensor::zeros(t.shape));
            state.v.emplace(name, Tensor::zeros(t.shape));
        }
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(state.t));
    for (auto& [name, p] : params) {
        const Tensor& g = grads.at(name);
        Tensor& m = state.m.at(name);
        Tensor& v = state.v.at(name);
        for (size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = beta1 * m.data[i] + (1.0f - beta1) * g.data[i];
            v.data[i] = beta2 * v.data[i] + (1.0f - beta2) * g.data[i] * g.data[i];
            double mhat = static_cast<double>(m.data[i]) / bc1;
            double vhat = static_cast<double>(v.data[i]) / bc2;
            p.data[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

// ---- evaluation ---------------------------------------------------------------

namespace {

int argmax_answer(const LvlmWeights& w, const SyntheticSample& s, const PruneAction& a) {
    ForwardOutput out = lvlm_forward(w, s, a, false);
    int64_t row = out.logits.rows() - 1;
    int best = 0;
    float best_v = out.logits.at(row, 0);
    for (int i = 1; i < w.config.vocab_size; ++i)
        if (out.logits.at(row, i) > best_v) {
            best_v = out.logits.at(row, i);
            best = i;
        }
    return best;
}

} // namespace

double eval_accuracy(const LvlmWeights& w, const std::vector<SyntheticSample>& samples,
                     const PruneAction& action, int jobs) {
    return eval_accuracy_per_sample(
        w, samples, [&](const SyntheticSample&) { return action; }, jobs);
}

double eval_accuracy_per_sample(const LvlmWeights& w, const std::vector<SyntheticSample>& samples,
                                const std::function<PruneAction(const SyntheticSample&)>& provider,
                                int jobs) {
    if (samples.empty()) return 0.0;
    std::vector<char> hit(samples.size(), 0);
    num::parallel_for(static_cast<int64_t>(samples.size()), jobs, [&](int64_t i) {
        const auto& s = samples[static_cast<size_t>(i)];
        hit[static_cast<size_t>(i)] = argmax_answer(w, s, provider(s)) == s.answer ? 1 : 0;
    });
    int64_t correct = 0;
    for (char h : hit) correct += h;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// ---- pretraining -----------------------------------------------------------------

LvlmWeights pretrain(const ModelConfig& cfg, const std::vector<SyntheticSample>& train_set,
                     const std::vector<SyntheticSample>& eval_set, const PretrainConfig& pc,
                     PretrainMetrics* metrics) {
    if (train_set.empty() || eval_set.empty())
        throw ArgumentError("pretrain: train and eval sets must be nonempty");
    SeededStream stream(pc.seed);
    LvlmWeights w = init_weights(cfg, stream.derive("init"));
    AdamState adam;

    const int eval_n = std::min<int>(pc.eval_subset, static_cast<int>(eval_set.size()));
    std::vector<SyntheticSample> eval_subset(eval_set.begin(), eval_set.begin() + eval_n);

    auto record = [&](int step, double loss, double acc) {
        if (metrics) metrics->rows.push_back({step, loss, acc});
    };

    SeededStream batch_stream = stream.derive("batches");
    double last_acc = eval_accuracy(w, eval_subset, PruneAction{}, pc.jobs);
    int step = 0;
    for (; step < pc.steps; ++step) {
        // Draw the batch, then per-sample tapes; gradients are summed in
        // sample order so the result is independent of the thread count.
        std::vector<const SyntheticSample*> batch(static_cast<size_t>(pc.batch_size));
        for (auto& b : batch)
            b = &train_set[batch_stream.uniform_int(train_set.size())];

        std::vector<GradRecord> grads(batch.size());
        std::vector<double> losses(batch.size());
        num::parallel_for(static_cast<int64_t>(batch.size()), pc.jobs, [&](int64_t i) {
            Tape tape;
            auto leaf = register_params<float>(tape, w.params, true);
            auto loss = lvlm_loss_graph<float>(tape, leaf, cfg, *batch[static_cast<size_t>(i)]);
            losses[static_cast<size_t>(i)] = tape.value(loss).data[0];
            grads[static_cast<size_t>(i)] = tape.backward(loss);
        });

        double mean_loss = 0.0;
        for (double l : losses) mean_loss += l;
        mean_loss /= static_cast<double>(batch.size());
        if (!std::isfinite(mean_loss))
            throw ContractError("pretrain diverged: non-finite loss at step " +
                                std::to_string(step));

        GradRecord total = std::move(grads[0]);
        for (size_t i = 1; i < grads.size(); ++i)
            for (auto& [name, t] : total) {
                const Tensor& gi = grads[i].at(name);
                for (size_t k = 0; k < t.data.size(); ++k) t.data[k] += gi.data[k];
            }
        const float scale = 1.0f / static_cast<float>(batch.size());
        for (auto& [name, t] : total)
            for (auto& v : t.data) v *= scale;

        if (step == 0) record(0, mean_loss, last_acc);
        adam_step(w.params, total, adam, pc.lr, pc.beta1, pc.beta2);

        if ((step + 1) % pc.eval_every == 0 || step + 1 == pc.steps) {
            last_acc = eval_accuracy(w, eval_subset, PruneAction{}, pc.jobs);
            record(step + 1, mean_loss, last_acc);
            if (pc.early_stop_acc > 0 && last_acc >= pc.early_stop_acc) {
                ++step;
                break;
            }
        }
    }
    if (metrics) {
        metrics->steps_run = step;
        metrics->final_eval_acc = eval_accuracy(w, eval_set, PruneAction{}, pc.jobs);
    }
    return w;
}

} // namespace parlab::model
