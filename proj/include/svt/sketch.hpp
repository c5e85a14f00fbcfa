#pragma once

#include "svt/dense.hpp"
#include "svt/sampled.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace svt {

// Parameters shared by the randomized partial-SVD engines.
//   t             initial sampling size (adaptive engines)
//   dt            incremental sampling step per extension round
//   np            number of power-iteration passes on fresh sketches
//   eps_threshold target error percentage in (0, 1)
//   seed          master seed; per-round sub-seeds are derived from it
//   p             oversampling count (fixed-rank engine only)
struct SketchParams {
    Index t = 10;
    Index dt = 10;
    int np = 1;
    double eps_threshold = 0.5;
    std::uint64_t seed = 1;
    Index p = 5;
};

// Incrementally built orthonormal basis Q with coefficient block B = Q^T Y.
// norm_b_sq accumulates ||B||_F^2 block by block; together with
// frob_y_sq = ||Y||_F^2 it drives the error-percentage estimate.
struct QBState {
    DenseBlock Q;       // m x r
    DenseBlock B;       // r x n
    double norm_b_sq = 0.0;
    double frob_y_sq = 0.0;
    Index rank = 0;
    bool saturated = false;  // rank has reached min(m, n)
};

struct SketchResult {
    LowRankFactors factors;
    Index rank = 0;
    bool saturated = false;  // threshold unmet even at full rank
    int extension_rounds = 0;
};

// Fraction of Frobenius energy of the target not captured by the basis:
// (||Y||_F^2 - ||B||_F^2) / ||Y||_F^2, clamped to [0, 1].
inline double error_percentage(const QBState& state) {
    if (!(state.frob_y_sq > 0.0)) {
        throw std::domain_error("error_percentage: target has zero Frobenius norm");
    }
    const double eps = (state.frob_y_sq - state.norm_b_sq) / state.frob_y_sq;
    return std::clamp(eps, 0.0, 1.0);
}

namespace detail {

inline void check_sketch_params(const SketchParams& params) {
    if (params.t < 1 || params.dt < 1 || params.np < 0) {
        throw std::invalid_argument("SketchParams: need t >= 1, dt >= 1, np >= 0");
    }
    if (!(params.eps_threshold > 0.0 && params.eps_threshold < 1.0)) {
        throw std::invalid_argument("SketchParams: eps_threshold must lie in (0, 1)");
    }
}

// One power pass is X <- Y * (Y^T * X); for np >= 2 the block is
// re-orthonormalized between passes to prevent floating-point collapse.
inline DenseBlock power_iterate(const SampledMatrix& Y, DenseBlock X, int np) {
    for (int j = 0; j < np; ++j) {
        if (j > 0) {
            X = qr_orthonormal(X);
        }
        X = sp_mult(Y, sp_mult_t(Y, X));
    }
    return X;
}

// B = Q^T Y computed through the sparse kernels.
inline DenseBlock coefficient_block(const SampledMatrix& Y, const DenseBlock& Q) {
    return sp_mult_t(Y, Q).transpose();
}

}  // namespace detail

// Initial QB decomposition of width t from a Gaussian sketch.
inline QBState qb_init(const SampledMatrix& Y, Index t, int np, std::uint64_t seed) {
    const Index min_dim = std::min(Y.rows(), Y.cols());
    if (t < 1 || t > min_dim) {
        throw std::invalid_argument("qb_init: t must satisfy 1 <= t <= min(m, n)");
    }
    const double frob_y_sq = sp_frob_norm_sq(Y);
    if (!(frob_y_sq > 0.0)) {
        throw std::domain_error("qb_init: target matrix is all zero");
    }
    DenseBlock X = sp_mult(Y, gaussian_block(Y.cols(), t, seed));
    X = detail::power_iterate(Y, std::move(X), np);
    QBState state;
    state.Q = qr_orthonormal(X);
    state.B = detail::coefficient_block(Y, state.Q);
    state.norm_b_sq = frob_norm_sq(state.B);
    state.frob_y_sq = frob_y_sq;
    state.rank = t;
    state.saturated = (t == min_dim);
    return state;
}

// Extends the basis by (up to) dt fresh Gaussian directions orthogonal to the
// current Q, appends the new coefficient block, and accumulates its energy.
// The step is truncated when fewer than dt dimensions remain; a state at full
// rank is returned unchanged with the saturated flag set.
inline QBState qb_extend(QBState state, const SampledMatrix& Y, Index dt, int np,
                         std::uint64_t seed) {
    if (dt < 1) {
        throw std::invalid_argument("qb_extend: dt must be >= 1");
    }
    if (state.Q.rows() != Y.rows() || state.B.cols() != Y.cols()) {
        throw std::invalid_argument("qb_extend: state does not match target dimensions");
    }
    const Index min_dim = std::min(Y.rows(), Y.cols());
    const Index width = std::min(dt, min_dim - state.rank);
    if (width < 1) {
        state.saturated = true;
        return state;
    }
    DenseBlock X = sp_mult(Y, gaussian_block(Y.cols(), width, seed));
    X = detail::power_iterate(Y, std::move(X), np);

    // Classical Gram-Schmidt against Q, repeated once if the projection is
    // not yet clean, then QR.
    X -= state.Q * (state.Q.transpose() * X);
    if ((state.Q.transpose() * X).norm() > 1e-8 * X.norm()) {
        X -= state.Q * (state.Q.transpose() * X);
    }
    DenseBlock Qp = qr_orthonormal(X);
    if ((state.Q.transpose() * Qp).cwiseAbs().maxCoeff() > 1e-8) {
        Qp -= state.Q * (state.Q.transpose() * Qp);
        Qp = qr_orthonormal(Qp);
    }

    const DenseBlock Bp = detail::coefficient_block(Y, Qp);

    const Index r0 = state.rank;
    state.Q.conservativeResize(Eigen::NoChange, r0 + width);
    state.Q.rightCols(width) = Qp;
    state.B.conservativeResize(r0 + width, Eigen::NoChange);
    state.B.bottomRows(width) = Bp;
    state.norm_b_sq += frob_norm_sq(Bp);
    state.rank = r0 + width;
    state.saturated = (state.rank == min_dim);
    return state;
}

// SVD of the coefficient block lifted back through Q. The factor rank equals
// the state rank; trailing singular values may be ~0.
inline LowRankFactors finalize(const QBState& state) {
    LowRankFactors f = small_svd(state.B);
    f.U = state.Q * f.U;
    return f;
}

// Fixed-rank randomized SVD with Gaussian sampling and oversampling p.
inline LowRankFactors rsvd(const SampledMatrix& Y, Index k, const SketchParams& params) {
    const Index min_dim = std::min(Y.rows(), Y.cols());
    if (k < 1) {
        throw std::invalid_argument("rsvd: k must be >= 1");
    }
    if (params.p < 0 || k + params.p > min_dim) {
        throw std::invalid_argument("rsvd: k + p must not exceed min(m, n)");
    }
    DenseBlock X = sp_mult(Y, gaussian_block(Y.cols(), k + params.p, derive_seed(params.seed, 0)));
    X = detail::power_iterate(Y, std::move(X), params.np);
    const DenseBlock Q = qr_orthonormal(X);
    LowRankFactors f = small_svd(detail::coefficient_block(Y, Q));
    f.U = Q * f.U;
    f.U = DenseBlock(f.U.leftCols(k));
    f.sigma = RealVector(f.sigma.head(k));
    f.V = DenseBlock(f.V.leftCols(k));
    return f;
}

// Fixed-precision engine: grows the QB decomposition from width t in steps of
// dt until the error percentage drops to eps_threshold. If the threshold is
// still unmet at full rank, the full-space factors are returned with the
// saturated flag set.
inline SketchResult r3svd(const SampledMatrix& Y, const SketchParams& params) {
    detail::check_sketch_params(params);
    QBState state = qb_init(Y, params.t, params.np, derive_seed(params.seed, 0));
    int rounds = 0;
    while (error_percentage(state) > params.eps_threshold) {
        if (state.saturated) {
            return SketchResult{finalize(state), state.rank, true, rounds};
        }
        ++rounds;
        state = qb_extend(std::move(state), Y, params.dt, params.np,
                          derive_seed(params.seed, static_cast<std::uint64_t>(rounds)));
    }
    return SketchResult{finalize(state), state.rank, false, rounds};
}

// Recycling engine: seeds the basis with the previous iterate's left singular
// vectors instead of a fresh sketch. The recycled block takes no power
// iterations; extension blocks use np as in r3svd. An empty U_prev falls back
// to r3svd with t = dt.
inline SketchResult r4svd(const SampledMatrix& Y, const DenseBlock& U_prev,
                          const SketchParams& params) {
    detail::check_sketch_params(params);
    const Index s = U_prev.cols();
    if (s == 0) {
        SketchParams fresh = params;
        fresh.t = params.dt;
        return r3svd(Y, fresh);
    }
    if (U_prev.rows() != Y.rows()) {
        throw std::invalid_argument("r4svd: U_prev row count does not match Y");
    }
    const Index min_dim = std::min(Y.rows(), Y.cols());
    if (s > min_dim) {
        throw std::invalid_argument("r4svd: recycled basis wider than min(m, n)");
    }
    const double frob_y_sq = sp_frob_norm_sq(Y);
    if (!(frob_y_sq > 0.0)) {
        throw std::domain_error("r4svd: target matrix is all zero");
    }

    QBState state;
    state.Q = U_prev;
    const DenseBlock gram = state.Q.transpose() * state.Q;
    if ((gram - DenseBlock::Identity(s, s)).cwiseAbs().maxCoeff() > 1e-8) {
        state.Q = qr_orthonormal(state.Q);
    }
    state.B = detail::coefficient_block(Y, state.Q);
    state.norm_b_sq = frob_norm_sq(state.B);
    state.frob_y_sq = frob_y_sq;
    state.rank = s;
    state.saturated = (s == min_dim);

    int rounds = 0;
    while (error_percentage(state) > params.eps_threshold) {
        if (state.saturated) {
            return SketchResult{finalize(state), state.rank, true, rounds};
        }
        ++rounds;
        state = qb_extend(std::move(state), Y, params.dt, params.np,
                          derive_seed(params.seed, static_cast<std::uint64_t>(rounds)));
    }
    return SketchResult{finalize(state), state.rank, false, rounds};
}

}  // namespace svt
