#pragma once

#include "svt/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svt {

struct Triplet {
    Index row;
    Index col;
    double value;
};

// Sparse matrix supported on a fixed sample set: stored as sorted row-major
// triplets with a row-offset index, immutable after construction. Both the
// observed data A restricted to the sample set and the solver iterate Y live
// in this representation; the iterate is never densified because its support
// never grows.
class SampledMatrix {
public:
    SampledMatrix(Index rows, Index cols, std::vector<Triplet> entries)
        : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) {
            throw std::invalid_argument("SampledMatrix: dimensions must be >= 1");
        }
        if (entries.empty()) {
            throw std::invalid_argument("SampledMatrix: at least one entry required");
        }
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        col_index_.resize(entries.size());
        values_.resize(entries.size());
        row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const Triplet& t = entries[k];
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
                throw std::invalid_argument("SampledMatrix: entry (" + std::to_string(t.row) +
                                            ", " + std::to_string(t.col) + ") out of range");
            }
            if (!std::isfinite(t.value)) {
                throw std::invalid_argument("SampledMatrix: non-finite value at (" +
                                            std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
            }
            if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
                throw std::invalid_argument("SampledMatrix: duplicate entry (" +
                                            std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
            }
            col_index_[k] = t.col;
            values_[k] = t.value;
            ++row_offsets_[static_cast<std::size_t>(t.row) + 1];
        }
        for (std::size_t i = 1; i < row_offsets_.size(); ++i) {
            row_offsets_[i] += row_offsets_[i - 1];
        }
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }

    const std::vector<Index>& row_offsets() const { return row_offsets_; }
    const std::vector<Index>& col_index() const { return col_index_; }
    const std::vector<double>& values() const { return values_; }

    bool same_pattern(const SampledMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ &&
               row_offsets_ == other.row_offsets_ && col_index_ == other.col_index_;
    }

    // New matrix on the identical pattern with replacement values (row-major
    // entry order).
    SampledMatrix with_values(std::vector<double> vals) const {
        if (vals.size() != values_.size()) {
            throw std::invalid_argument("with_values: size mismatch");
        }
        for (double v : vals) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("with_values: non-finite value");
            }
        }
        SampledMatrix out(*this);
        out.values_ = std::move(vals);
        return out;
    }

    std::vector<Triplet> triplets() const {
        std::vector<Triplet> out;
        out.reserve(values_.size());
        for (Index i = 0; i < rows_; ++i) {
            for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
                out.push_back({i, col_index_[k], values_[k]});
            }
        }
        return out;
    }

private:
    Index rows_;
    Index cols_;
    std::vector<Index> row_offsets_;  // rows + 1
    std::vector<Index> col_index_;
    std::vector<double> values_;
};

// S * X, O(nnz * k).
inline DenseBlock sp_mult(const SampledMatrix& S, const DenseBlock& X) {
    if (X.rows() != S.cols()) {
        throw std::invalid_argument("sp_mult: inner dimensions disagree");
    }
    DenseBlock out = DenseBlock::Zero(S.rows(), X.cols());
    const auto& offsets = S.row_offsets();
    const auto& cols = S.col_index();
    const auto& vals = S.values();
    for (Index i = 0; i < S.rows(); ++i) {
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
            out.row(i) += vals[k] * X.row(cols[k]);
        }
    }
    return out;
}

// S^T * X, O(nnz * k).
inline DenseBlock sp_mult_t(const SampledMatrix& S, const DenseBlock& X) {
    if (X.rows() != S.rows()) {
        throw std::invalid_argument("sp_mult_t: inner dimensions disagree");
    }
    DenseBlock out = DenseBlock::Zero(S.cols(), X.cols());
    const auto& offsets = S.row_offsets();
    const auto& cols = S.col_index();
    const auto& vals = S.values();
    for (Index i = 0; i < S.rows(); ++i) {
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
            out.row(cols[k]) += vals[k] * X.row(i);
        }
    }
    return out;
}

// Projection of U * diag(sigma) * V^T onto the pattern of `pattern`,
// O(nnz * r); the dense product is never formed.
inline SampledMatrix project_low_rank(const SampledMatrix& pattern, const LowRankFactors& F) {
    if (F.U.rows() != pattern.rows() || F.V.rows() != pattern.cols()) {
        throw std::invalid_argument("project_low_rank: factor dimensions disagree with pattern");
    }
    const DenseBlock W = F.V * F.sigma.asDiagonal();  // n x r
    const auto& offsets = pattern.row_offsets();
    const auto& cols = pattern.col_index();
    std::vector<double> vals(static_cast<std::size_t>(pattern.nnz()));
    std::size_t k = 0;
    for (Index i = 0; i < pattern.rows(); ++i) {
        for (Index p = offsets[i]; p < offsets[i + 1]; ++p, ++k) {
            vals[k] = F.U.row(i).dot(W.row(cols[p]));
        }
    }
    return pattern.with_values(std::move(vals));
}

// Yc + alpha * D on the shared pattern.
inline SampledMatrix sp_axpy(const SampledMatrix& Yc, double alpha, const SampledMatrix& D) {
    if (!Yc.same_pattern(D)) {
        throw std::invalid_argument("sp_axpy: operands must share the identical pattern");
    }
    std::vector<double> vals(Yc.values());
    const auto& dv = D.values();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        vals[k] += alpha * dv[k];
    }
    return Yc.with_values(std::move(vals));
}

inline double sp_frob_norm_sq(const SampledMatrix& S) {
    double acc = 0.0;
    for (double v : S.values()) {
        acc += v * v;
    }
    return acc;
}

// Largest singular value estimate by alternating power iteration with a
// seeded Gaussian start vector. Always a lower bound (up to roundoff).
inline double spectral_norm_est(const SampledMatrix& S, int iters, std::uint64_t seed) {
    if (iters < 1) {
        throw std::invalid_argument("spectral_norm_est: iters must be >= 1");
    }
    DenseBlock x = gaussian_block(S.cols(), 1, seed);
    double xn = x.norm();
    if (xn == 0.0) {
        return 0.0;
    }
    x /= xn;
    double estimate = 0.0;
    for (int it = 0; it < iters; ++it) {
        DenseBlock y = sp_mult(S, x);  // ||y|| <= sigma_1 since ||x|| = 1
        estimate = y.norm();
        if (estimate == 0.0) {
            return 0.0;
        }
        x = sp_mult_t(S, y);
        xn = x.norm();
        if (xn == 0.0) {
            return estimate;
        }
        x /= xn;
    }
    return estimate;
}

// Dense copy; used by the full-SVD solver backend and image reconstruction,
// not by the sketching paths.
inline DenseBlock densify(const SampledMatrix& S) {
    DenseBlock out = DenseBlock::Zero(S.rows(), S.cols());
    const auto& offsets = S.row_offsets();
    const auto& cols = S.col_index();
    const auto& vals = S.values();
    for (Index i = 0; i < S.rows(); ++i) {
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
            out(i, cols[k]) = vals[k];
        }
    }
    return out;
}

}  // namespace svt
