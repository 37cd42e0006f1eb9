// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_TENSOR_HPP
#define PARLAB_TENSOR_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "parlab/errors.hpp"

namespace parlab::num {

/// Dense row-major tensor. The product instantiation uses 32-bit reals;
/// the double instantiation exists for finite-difference testing of the
/// same graph code.
template <typename T>
struct TensorT {
    std::vector<int64_t> shape;
    std::vector<T> data;

    TensorT() = default;
    TensorT(std::vector<int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (numel_of(shape) != static_cast<int64_t>(data.size()))
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(s));
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<int64_t> s) {
        int64_t n = numel_of(s);
        return TensorT(std::move(s), std::vector<T>(static_cast<size_t>(n), T(0)));
    }

    static TensorT full(std::vector<int64_t> s, T v) {
        int64_t n = numel_of(s);
        return TensorT(std::move(s), std::vector<T>(static_cast<size_t>(n), v));
    }

    static TensorT scalar(T v) { return TensorT({1}, {v}); }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int64_t rows() const { return shape.at(0); }
    int64_t cols() const { return shape.at(1); }

    T& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    const T& at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }
    T& operator[](size_t i) { return data[i]; }
    const T& operator[](size_t i) const { return data[i]; }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    static std::string shape_str(const std::vector<int64_t>& s) {
        std::ostringstream os;
        os << '[';
        for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
        os << ']';
        return os.str();
    }
    std::string shape_str() const { return shape_str(shape); }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using Tensor = TensorT<float>;

/// Named parameter collection. std::map gives the lexicographic, stable
/// iteration order the checkpoint format relies on.
template <typename T>
using ParamSetT = std::map<std::string, TensorT<T>>;
using ParamSet = ParamSetT<float>;

/// Gradients keyed by parameter name, same shapes as the ParamSet entries.
template <typename T>
using GradRecordT = std::map<std::string, TensorT<T>>;
using GradRecord = GradRecordT<float>;

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
ConstMatMap<T> as_mat(const TensorT<T>& t) {
    if (t.rank() != 2) throw ShapeError("expected rank-2 tensor, got " + t.shape_str());
    return ConstMatMap<T>(t.data.data(), t.rows(), t.cols());
}

template <typename T>
MatMap<T> as_mat(TensorT<T>& t) {
    if (t.rank() != 2) throw ShapeError("expected rank-2 tensor, got " + t.shape_str());
    return MatMap<T>(t.data.data(), t.rows(), t.cols());
}

/// a[m×k] · b[k×n]. Inner dimensions must agree.
template <typename T>
TensorT<T> matmul_value(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
        throw ShapeError("matmul shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    TensorT<T> out = TensorT<T>::zeros({a.rows(), b.cols()});
    as_mat(out).noalias() = as_mat(a) * as_mat(b);
    return out;
}

template <typename T>
int64_t param_count(const ParamSetT<T>& params) {
    int64_t n = 0;
    for (const auto& [name, t] : params) n += t.numel();
    return n;
}

} // namespace parlab::num

#endif
