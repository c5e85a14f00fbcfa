#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace svt {

using Index = Eigen::Index;

// Dense m x k block: sketches, bases, and factor blocks. Column-addressable.
using DenseBlock = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// (U, sigma, V) triple representing U * diag(sigma) * V^T.
// sigma is sorted non-increasing; U and V have orthonormal columns.
struct LowRankFactors {
    DenseBlock U;      // m x r
    RealVector sigma;  // r
    DenseBlock V;      // n x r

    Index rank() const { return sigma.size(); }
};

namespace detail {

// SplitMix64 finalizer (Steele, Lea & Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Derives an independent sub-seed for stream `stream` of a master seed.
// Used wherever one user-facing seed drives a schedule of sketches.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::splitmix64(seed ^ detail::splitmix64(stream));
}

namespace detail {

// std::mt19937_64 raw stream plus an explicit Box-Muller transform, so the
// normal draws are identical on every platform (std::normal_distribution is
// implementation-defined).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform01() {
        // top 53 bits -> [0, 1)
        return static_cast<double>(state_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace detail

// i.i.d. standard normal block, filled column-major. Identical
// (seed, rows, cols) gives a bit-identical block on every platform.
inline DenseBlock gaussian_block(Index rows, Index cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("gaussian_block: dimensions must be >= 1");
    }
    detail::GaussianStream stream(seed);
    DenseBlock block(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            block(i, j) = stream.next();
        }
    }
    return block;
}

// Economy-size orthonormal factor Q of X (m x k, k <= m) via Householder QR.
// All k columns are kept even when X is rank deficient; the extra columns are
// orthonormal fill whose downstream energy contribution is ~0.
inline DenseBlock qr_orthonormal(const DenseBlock& X) {
    if (X.cols() > X.rows()) {
        throw std::invalid_argument("qr_orthonormal: need cols <= rows, got " +
                                    std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
    }
    Eigen::HouseholderQR<DenseBlock> qr(X);
    return qr.householderQ() * DenseBlock::Identity(X.rows(), X.cols());
}

// Thin deterministic SVD of a small block. U * diag(sigma) * V^T reconstructs
// B to ~1e-15 relative; sigma sorted non-increasing.
inline LowRankFactors small_svd(const DenseBlock& B) {
    Eigen::BDCSVD<DenseBlock> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return LowRankFactors{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline double frob_norm_sq(const DenseBlock& X) { return X.squaredNorm(); }

}  // namespace svt
