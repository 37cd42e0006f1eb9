// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_TAPE_HPP
#define PARLAB_TAPE_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "parlab/rng.hpp"
#include "parlab/tensor.hpp"

namespace parlab::num {

/// Input floor for log(); keeps Bernoulli log-likelihoods finite near 0/1.
inline constexpr double kLogFloor = 1e-12;

/// Reverse-mode tape over a fixed op vocabulary. Nodes are created in
/// topological order; backward() replays them in reverse. Values are
/// immutable once recorded. First-order gradients only.
template <typename T>
class TapeT {
public:
    using Var = int;

    TapeT() = default;
    TapeT(const TapeT&) = delete;
    TapeT& operator=(const TapeT&) = delete;

    // ---- leaves ------------------------------------------------------

    /// Trainable leaf; its gradient is collected by backward().
    Var param(const std::string& name, TensorT<T> v) {
        Var id = push(std::move(v), true);
        nodes_[static_cast<size_t>(id)].name = name;
        return id;
    }

    /// Non-trainable leaf (inputs, masks, frozen weights).
    Var constant(TensorT<T> v) { return push(std::move(v), false); }

    const TensorT<T>& value(Var id) const { return nodes_.at(static_cast<size_t>(id)).value; }
    size_t size() const { return nodes_.size(); }

    // ---- elementwise -------------------------------------------------

    /// a + b. Either identical shapes, or b rank-1 [d] broadcast over the
    /// rows of a [n×d].
    Var add(Var a, Var b) {
        const auto& va = val(a);
        const auto& vb = val(b);
        TensorT<T> out;
        bool broadcast = false;
        if (va.shape == vb.shape) {
            out = va;
            for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb.data[i];
        } else if (va.rank() == 2 && vb.rank() == 1 && va.cols() == vb.shape[0]) {
            broadcast = true;
            out = va;
            int64_t n = va.rows(), d = va.cols();
            for (int64_t r = 0; r < n; ++r)
                for (int64_t c = 0; c < d; ++c) out.at(r, c) += vb.data[static_cast<size_t>(c)];
        } else {
            throw ShapeError("add shape mismatch: " + va.shape_str() + " vs " + vb.shape_str());
        }
        Var id = push(std::move(out), needs(a) || needs(b));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, a, b, broadcast] {
            const auto& g = grad(id);
            if (needs(a)) acc_same(a, g);
            if (needs(b)) {
                if (!broadcast) {
                    acc_same(b, g);
                } else {
                    auto& gb = grad_slot(b);
                    int64_t n = g.rows(), d = g.cols();
                    for (int64_t r = 0; r < n; ++r)
                        for (int64_t c = 0; c < d; ++c)
                            gb.data[static_cast<size_t>(c)] += g.at(r, c);
                }
            }
        });
        return id;
    }

    /// Elementwise a * b, identical shapes.
    Var mul(Var a, Var b) {
        const auto& va = val(a);
        const auto& vb = val(b);
        if (va.shape != vb.shape)
            throw ShapeError("mul shape mismatch: " + va.shape_str() + " vs " + vb.shape_str());
        TensorT<T> out = va;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb.data[i];
        Var id = push(std::move(out), needs(a) || needs(b));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, a, b] {
            const auto& g = grad(id);
            if (needs(a)) {
                auto& ga = grad_slot(a);
                const auto& vb2 = val(b);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * vb2.data[i];
            }
            if (needs(b)) {
                auto& gb = grad_slot(b);
                const auto& va2 = val(a);
                for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i] * va2.data[i];
            }
        });
        return id;
    }

    /// alpha * x + beta, elementwise with scalar constants.
    Var affine(Var x, T alpha, T beta) {
        TensorT<T> out = val(x);
        for (T& v : out.data) v = alpha * v + beta;
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x, alpha] {
            const auto& g = grad(id);
            auto& gx = grad_slot(x);
            for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += alpha * g.data[i];
        });
        return id;
    }

    Var sigmoid(Var x) {
        TensorT<T> out = val(x);
        for (T& v : out.data) v = sigmoid_scalar(v);
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            const auto& g = grad(id);
            const auto& y = value(id);
            auto& gx = grad_slot(x);
            for (size_t i = 0; i < g.data.size(); ++i)
                gx.data[i] += g.data[i] * y.data[i] * (T(1) - y.data[i]);
        });
        return id;
    }

    /// Gaussian-error-function GELU: x * Phi(x).
    Var gelu(Var x) {
        TensorT<T> out = val(x);
        for (T& v : out.data) v = v * phi_cdf(v);
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            const auto& g = grad(id);
            const auto& vx = val(x);
            auto& gx = grad_slot(x);
            for (size_t i = 0; i < g.data.size(); ++i) {
                T v = vx.data[i];
                gx.data[i] += g.data[i] * (phi_cdf(v) + v * phi_pdf(v));
            }
        });
        return id;
    }

    /// ln(max(x, 1e-12)). Below the floor the function is constant, so the
    /// gradient there is zero.
    Var log(Var x) {
        TensorT<T> out = val(x);
        for (T& v : out.data) v = std::log(std::max(v, static_cast<T>(kLogFloor)));
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            const auto& g = grad(id);
            const auto& vx = val(x);
            auto& gx = grad_slot(x);
            for (size_t i = 0; i < g.data.size(); ++i)
                if (vx.data[i] > static_cast<T>(kLogFloor)) gx.data[i] += g.data[i] / vx.data[i];
        });
        return id;
    }

    // ---- matrix ------------------------------------------------------

    Var matmul(Var a, Var b) {
        TensorT<T> out = matmul_value(val(a), val(b));
        Var id = push(std::move(out), needs(a) || needs(b));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, a, b] {
            const auto& g = grad(id);
            if (needs(a)) {
                auto& ga = grad_slot(a);
                as_mat(ga).noalias() += as_mat(g) * as_mat(val(b)).transpose();
            }
            if (needs(b)) {
                auto& gb = grad_slot(b);
                as_mat(gb).noalias() += as_mat(val(a)).transpose() * as_mat(g);
            }
        });
        return id;
    }

    Var transpose(Var x) {
        const auto& vx = val(x);
        TensorT<T> out = TensorT<T>::zeros({vx.cols(), vx.rows()});
        as_mat(out) = as_mat(vx).transpose();
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            auto& gx = grad_slot(x);
            as_mat(gx).noalias() += as_mat(grad(id)).transpose();
        });
        return id;
    }

    /// Row-wise softmax with per-row max subtraction.
    Var softmax_rows(Var x) {
        const auto& vx = val(x);
        if (vx.rank() != 2) throw ShapeError("softmax_rows expects rank-2, got " + vx.shape_str());
        TensorT<T> out = vx;
        int64_t n = vx.rows(), d = vx.cols();
        for (int64_t r = 0; r < n; ++r) {
            T mx = out.at(r, 0);
            for (int64_t c = 1; c < d; ++c) mx = std::max(mx, out.at(r, c));
            double sum = 0.0;
            for (int64_t c = 0; c < d; ++c) {
                T e = std::exp(out.at(r, c) - mx);
                out.at(r, c) = e;
                sum += static_cast<double>(e);
            }
            T inv = static_cast<T>(1.0 / sum);
            for (int64_t c = 0; c < d; ++c) out.at(r, c) *= inv;
        }
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            const auto& g = grad(id);
            const auto& y = value(id);
            auto& gx = grad_slot(x);
            int64_t n = y.rows(), d = y.cols();
            for (int64_t r = 0; r < n; ++r) {
                double dot = 0.0;
                for (int64_t c = 0; c < d; ++c)
                    dot += static_cast<double>(g.at(r, c)) * static_cast<double>(y.at(r, c));
                for (int64_t c = 0; c < d; ++c)
                    gx.at(r, c) += y.at(r, c) * (g.at(r, c) - static_cast<T>(dot));
            }
        });
        return id;
    }

    /// Per-row standardization of x [n×d] followed by the gain/bias affine.
    Var layer_norm(Var x, Var gain, Var bias, T eps) {
        const auto& vx = val(x);
        const auto& vg = val(gain);
        const auto& vb = val(bias);
        if (vx.rank() != 2 || vg.rank() != 1 || vb.rank() != 1 || vg.shape[0] != vx.cols() ||
            vb.shape[0] != vx.cols())
            throw ShapeError("layer_norm shape mismatch: x=" + vx.shape_str() +
                             " gain=" + vg.shape_str() + " bias=" + vb.shape_str());
        if (!(eps > T(0))) throw ArgumentError("layer_norm: eps must be positive");
        int64_t n = vx.rows(), d = vx.cols();
        TensorT<T> xhat = TensorT<T>::zeros({n, d});
        std::vector<T> inv_std(static_cast<size_t>(n));
        for (int64_t r = 0; r < n; ++r) {
            double mean = 0.0;
            for (int64_t c = 0; c < d; ++c) mean += static_cast<double>(vx.at(r, c));
            mean /= static_cast<double>(d);
            double var = 0.0;
            for (int64_t c = 0; c < d; ++c) {
                double t = static_cast<double>(vx.at(r, c)) - mean;
                var += t * t;
            }
            var /= static_cast<double>(d);
            T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
            inv_std[static_cast<size_t>(r)] = is;
            for (int64_t c = 0; c < d; ++c)
                xhat.at(r, c) = (vx.at(r, c) - static_cast<T>(mean)) * is;
        }
        TensorT<T> out = TensorT<T>::zeros({n, d});
        for (int64_t r = 0; r < n; ++r)
            for (int64_t c = 0; c < d; ++c)
                out.at(r, c) = xhat.at(r, c) * vg.data[static_cast<size_t>(c)] +
                               vb.data[static_cast<size_t>(c)];
        Var id = push(std::move(out), needs(x) || needs(gain) || needs(bias));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x, gain, bias, xhat = std::move(xhat),
                    inv_std = std::move(inv_std)] {
            const auto& g = grad(id);
            const auto& vg2 = val(gain);
            int64_t n = g.rows(), d = g.cols();
            if (needs(gain)) {
                auto& gg = grad_slot(gain);
                for (int64_t r = 0; r < n; ++r)
                    for (int64_t c = 0; c < d; ++c)
                        gg.data[static_cast<size_t>(c)] += g.at(r, c) * xhat.at(r, c);
            }
            if (needs(bias)) {
                auto& gb = grad_slot(bias);
                for (int64_t r = 0; r < n; ++r)
                    for (int64_t c = 0; c < d; ++c) gb.data[static_cast<size_t>(c)] += g.at(r, c);
            }
            if (needs(x)) {
                auto& gx = grad_slot(x);
                for (int64_t r = 0; r < n; ++r) {
                    double mean_gy = 0.0, mean_gyx = 0.0;
                    for (int64_t c = 0; c < d; ++c) {
                        double gy = static_cast<double>(g.at(r, c)) *
                                    static_cast<double>(vg2.data[static_cast<size_t>(c)]);
                        mean_gy += gy;
                        mean_gyx += gy * static_cast<double>(xhat.at(r, c));
                    }
                    mean_gy /= static_cast<double>(d);
                    mean_gyx /= static_cast<double>(d);
                    for (int64_t c = 0; c < d; ++c) {
                        double gy = static_cast<double>(g.at(r, c)) *
                                    static_cast<double>(vg2.data[static_cast<size_t>(c)]);
                        gx.at(r, c) += static_cast<T>(
                            static_cast<double>(inv_std[static_cast<size_t>(r)]) *
                            (gy - mean_gy - static_cast<double>(xhat.at(r, c)) * mean_gyx));
                    }
                }
            }
        });
        return id;
    }

    // ---- gather / reshape / concat ------------------------------------

    /// Select rows of x by index; duplicates allowed. Backward scatters
    /// (accumulating) into the source rows — the embedding-gather op.
    Var rows_gather(Var x, std::vector<int> idx) {
        const auto& vx = val(x);
        if (vx.rank() != 2) throw ShapeError("rows_gather expects rank-2, got " + vx.shape_str());
        int64_t d = vx.cols();
        for (int i : idx)
            if (i < 0 || i >= vx.rows())
                throw ContractError("rows_gather index " + std::to_string(i) +
                                    " out of range for " + vx.shape_str());
        TensorT<T> out = TensorT<T>::zeros({static_cast<int64_t>(idx.size()), d});
        for (size_t r = 0; r < idx.size(); ++r)
            std::copy_n(vx.data.begin() + static_cast<int64_t>(idx[r]) * d, d,
                        out.data.begin() + static_cast<int64_t>(r) * d);
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x, idx = std::move(idx)] {
            const auto& g = grad(id);
            auto& gx = grad_slot(x);
            int64_t d = gx.cols();
            for (size_t r = 0; r < idx.size(); ++r)
                for (int64_t c = 0; c < d; ++c)
                    gx.at(idx[r], c) += g.at(static_cast<int64_t>(r), c);
        });
        return id;
    }

    /// Columns [begin, begin+len) of x.
    Var cols_slice(Var x, int64_t begin, int64_t len) {
        const auto& vx = val(x);
        if (vx.rank() != 2 || begin < 0 || len <= 0 || begin + len > vx.cols())
            throw ShapeError("cols_slice [" + std::to_string(begin) + "," +
                             std::to_string(begin + len) + ") out of range for " + vx.shape_str());
        int64_t n = vx.rows();
        TensorT<T> out = TensorT<T>::zeros({n, len});
        for (int64_t r = 0; r < n; ++r)
            std::copy_n(vx.data.begin() + r * vx.cols() + begin, len,
                        out.data.begin() + r * len);
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x, begin, len] {
            const auto& g = grad(id);
            auto& gx = grad_slot(x);
            for (int64_t r = 0; r < g.rows(); ++r)
                for (int64_t c = 0; c < len; ++c) gx.at(r, begin + c) += g.at(r, c);
        });
        return id;
    }

    /// Vertical concatenation; rank-2 inputs share a column count, rank-1
    /// inputs concatenate into a longer rank-1 tensor.
    Var concat_rows(std::span<const Var> parts) {
        if (parts.empty()) throw ArgumentError("concat_rows: empty input list");
        const bool vec = val(parts[0]).rank() == 1;
        int64_t total = 0, d = vec ? 1 : val(parts[0]).cols();
        bool any_grad = false;
        for (Var p : parts) {
            const auto& v = val(p);
            if (vec ? v.rank() != 1 : (v.rank() != 2 || v.cols() != d))
                throw ShapeError("concat_rows mismatch at " + v.shape_str());
            total += vec ? v.shape[0] : v.rows();
            any_grad = any_grad || needs(p);
        }
        TensorT<T> out = vec ? TensorT<T>::zeros({total}) : TensorT<T>::zeros({total, d});
        int64_t off = 0;
        for (Var p : parts) {
            const auto& v = val(p);
            std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
            off += v.numel();
        }
        std::vector<Var> ps(parts.begin(), parts.end());
        Var id = push(std::move(out), any_grad);
        if (!grads_enabled(id)) return id;
        record(id, [this, id, ps = std::move(ps)] {
            const auto& g = grad(id);
            int64_t off = 0;
            for (Var p : ps) {
                int64_t n = val(p).numel();
                if (needs(p)) {
                    auto& gp = grad_slot(p);
                    for (int64_t i = 0; i < n; ++i)
                        gp.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(off + i)];
                }
                off += n;
            }
        });
        return id;
    }
    Var concat_rows(std::initializer_list<Var> parts) {
        return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
    }

    /// Horizontal concatenation of rank-2 tensors with equal row counts.
    Var concat_cols(std::span<const Var> parts) {
        if (parts.empty()) throw ArgumentError("concat_cols: empty input list");
        int64_t n = val(parts[0]).rows(), total = 0;
        bool any_grad = false;
        for (Var p : parts) {
            const auto& v = val(p);
            if (v.rank() != 2 || v.rows() != n)
                throw ShapeError("concat_cols mismatch at " + v.shape_str());
            total += v.cols();
            any_grad = any_grad || needs(p);
        }
        TensorT<T> out = TensorT<T>::zeros({n, total});
        int64_t off = 0;
        for (Var p : parts) {
            const auto& v = val(p);
            for (int64_t r = 0; r < n; ++r)
                std::copy_n(v.data.begin() + r * v.cols(), v.cols(),
                            out.data.begin() + r * total + off);
            off += v.cols();
        }
        std::vector<Var> ps(parts.begin(), parts.end());
        Var id = push(std::move(out), any_grad);
        if (!grads_enabled(id)) return id;
        record(id, [this, id, ps = std::move(ps), total] {
            const auto& g = grad(id);
            int64_t off = 0;
            for (Var p : ps) {
                const auto& v = val(p);
                if (needs(p)) {
                    auto& gp = grad_slot(p);
                    for (int64_t r = 0; r < v.rows(); ++r)
                        for (int64_t c = 0; c < v.cols(); ++c)
                            gp.at(r, c) += g.data[static_cast<size_t>(r * total + off + c)];
                }
                off += v.cols();
            }
        });
        return id;
    }
    Var concat_cols(std::initializer_list<Var> parts) {
        return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
    }

    Var reshape(Var x, std::vector<int64_t> shape) {
        const auto& vx = val(x);
        if (TensorT<T>::numel_of(shape) != vx.numel())
            throw ShapeError("reshape " + vx.shape_str() + " -> " +
                             TensorT<T>::shape_str(shape) + " changes element count");
        TensorT<T> out(std::move(shape), vx.data);
        Var id = push(std::move(out), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            const auto& g = grad(id);
            auto& gx = grad_slot(x);
            for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
        });
        return id;
    }

    // ---- reductions ----------------------------------------------------

    /// Sum of all elements; 64-bit accumulation.
    Var sum(Var x) {
        const auto& vx = val(x);
        double s = 0.0;
        for (T v : vx.data) s += static_cast<double>(v);
        Var id = push(TensorT<T>::scalar(static_cast<T>(s)), needs(x));
        if (!grads_enabled(id)) return id;
        record(id, [this, id, x] {
            T g = grad(id).data[0];
            auto& gx = grad_slot(x);
            for (T& v : gx.data) v += g;
        });
        return id;
    }

    /// Mean of all elements.
    Var mean(Var x) {
        int64_t n = val(x).numel();
        return affine(sum(x), static_cast<T>(1.0 / static_cast<double>(n)), T(0));
    }

    // ---- backward ------------------------------------------------------

    /// Reverse sweep from a scalar loss; returns gradients for every
    /// trainable leaf reachable from it (unreachable params get zeros).
    GradRecordT<T> backward(Var loss) {
        auto& ln = nodes_.at(static_cast<size_t>(loss));
        if (ln.value.numel() != 1)
            throw ContractError("backward: loss must be scalar, got " + ln.value.shape_str());
        grad_slot(loss).data[0] = T(1);
        for (int i = loss; i >= 0; --i) {
            auto& n = nodes_[static_cast<size_t>(i)];
            if (n.pull && n.needs_grad && !n.grad.data.empty()) n.pull();
        }
        GradRecordT<T> rec;
        for (auto& n : nodes_) {
            if (n.name.empty()) continue;
            rec[n.name] = n.grad.data.empty() ? TensorT<T>::zeros(n.value.shape) : n.grad;
        }
        return rec;
    }

    static T sigmoid_scalar(T x) {
        if (x >= T(0)) {
            T e = std::exp(-x);
            return T(1) / (T(1) + e);
        }
        T e = std::exp(x);
        return e / (T(1) + e);
    }

private:
    struct Node {
        TensorT<T> value;
        TensorT<T> grad; // empty until touched by backward
        std::function<void()> pull;
        std::string name;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;

    Var push(TensorT<T> v, bool needs_grad) {
        Node n;
        n.value = std::move(v);
        n.needs_grad = needs_grad;
        nodes_.push_back(std::move(n));
        return static_cast<Var>(nodes_.size() - 1);
    }

    bool needs(Var id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
    bool grads_enabled(Var id) const { return needs(id); }
    const TensorT<T>& val(Var id) const { return nodes_[static_cast<size_t>(id)].value; }
    const TensorT<T>& grad(Var id) const { return nodes_[static_cast<size_t>(id)].grad; }

    TensorT<T>& grad_slot(Var id) {
        auto& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.data.empty()) n.grad = TensorT<T>::zeros(n.value.shape);
        return n.grad;
    }

    void acc_same(Var id, const TensorT<T>& g) {
        auto& slot = grad_slot(id);
        for (size_t i = 0; i < g.data.size(); ++i) slot.data[i] += g.data[i];
    }

    void record(Var id, std::function<void()> pull) {
        nodes_[static_cast<size_t>(id)].pull = std::move(pull);
    }

    static T phi_cdf(T x) {
        return static_cast<T>(0.5 * (1.0 + std::erf(static_cast<double>(x) / std::numbers::sqrt2)));
    }
    static T phi_pdf(T x) {
        double d = static_cast<double>(x);
        return static_cast<T>(std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi));
    }
};

using Tape = TapeT<float>;

/// Fill a tensor with Gaussian draws: mean + std * z. std must be
/// nonnegative; std = 0 yields the constant tensor.
template <typename T>
TensorT<T> sample_gaussian(SeededStream& stream, double mean, double std, int64_t n) {
    if (std < 0.0) throw ArgumentError("sample_gaussian: negative std");
    TensorT<T> out = TensorT<T>::zeros({n});
    for (int64_t i = 0; i < n; ++i)
        out.data[static_cast<size_t>(i)] = static_cast<T>(mean + std * stream.gaussian());
    return out;
}

/// Max relative error between reverse-mode and central-difference
/// gradients of `f` over every scalar in `params`. The relative error of
/// one entry is |ad-fd| / max(1e-6, |ad|+|fd|).
template <typename T, typename F>
double grad_check(F&& f, ParamSetT<T> params, double h) {
    if (!(h > 0)) throw ArgumentError("grad_check: h must be positive");
    GradRecordT<T> analytic;
    {
        TapeT<T> tape;
        auto loss = f(tape, params);
        analytic = tape.backward(loss);
    }
    double worst = 0.0;
    for (auto& [name, tensor] : params) {
        for (size_t i = 0; i < tensor.data.size(); ++i) {
            T saved = tensor.data[i];
            tensor.data[i] = saved + static_cast<T>(h);
            double up, down;
            {
                TapeT<T> tape;
                up = static_cast<double>(tape.value(f(tape, params)).data[0]);
            }
            tensor.data[i] = saved - static_cast<T>(h);
            {
                TapeT<T> tape;
                down = static_cast<double>(tape.value(f(tape, params)).data[0]);
            }
            tensor.data[i] = saved;
            double fd = (up - down) / (2.0 * h);
            double ad = static_cast<double>(analytic.at(name).data[i]);
            double rel = std::abs(ad - fd) / std::max(1e-6, std::abs(ad) + std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace parlab::num

#endif
