#pragma once

#include "svt/dense.hpp"
#include "svt/io.hpp"
#include "svt/sampled.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

// Seeded synthetic instances for experiments and benchmarks: exactly low-rank
// matrices, matrices with a prescribed geometric spectrum, smooth low-rank
// test images, and noisy low-rank rating sets.

namespace svt {

// G1 * G2^T / sqrt(rank) with i.i.d. standard normal factors; entries have
// roughly unit variance.
inline DenseBlock make_low_rank(Index m, Index n, Index rank, std::uint64_t seed) {
    if (rank < 1 || rank > std::min(m, n)) {
        throw std::invalid_argument("make_low_rank: rank out of range");
    }
    const DenseBlock G1 = gaussian_block(m, rank, derive_seed(seed, 0));
    const DenseBlock G2 = gaussian_block(n, rank, derive_seed(seed, 1));
    return G1 * G2.transpose() / std::sqrt(static_cast<double>(rank));
}

// U diag(ratio^j) V^T with random orthonormal factors: singular values
// 1, ratio, ratio^2, ... (count of them).
inline DenseBlock make_geometric(Index m, Index n, Index count, double ratio,
                                 std::uint64_t seed) {
    if (count < 1 || count > std::min(m, n)) {
        throw std::invalid_argument("make_geometric: count out of range");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("make_geometric: ratio must lie in (0, 1)");
    }
    const DenseBlock U = qr_orthonormal(gaussian_block(m, count, derive_seed(seed, 0)));
    const DenseBlock V = qr_orthonormal(gaussian_block(n, count, derive_seed(seed, 1)));
    RealVector sigma(count);
    double s = 1.0;
    for (Index j = 0; j < count; ++j, s *= ratio) {
        sigma(j) = s;
    }
    return U * sigma.asDiagonal() * V.transpose();
}

// Fully observed pattern.
inline SampledMatrix to_sampled(const DenseBlock& A) {
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(A.size()));
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            entries.push_back({i, j, A(i, j)});
        }
    }
    return SampledMatrix(A.rows(), A.cols(), std::move(entries));
}

// Uniformly sampled pattern with exactly floor(fraction * m * n) entries.
inline SampledMatrix sample_dense(const DenseBlock& A, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("sample_dense: fraction must lie in (0, 1]");
    }
    const std::uint64_t total =
        static_cast<std::uint64_t>(A.rows()) * static_cast<std::uint64_t>(A.cols());
    const std::uint64_t ns =
        static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
    if (ns < 1) {
        throw std::invalid_argument("sample_dense: fraction selects no entries");
    }
    std::vector<Triplet> entries;
    entries.reserve(ns);
    for (std::uint64_t pos : detail::sample_positions(total, ns, seed)) {
        const Index i = static_cast<Index>(pos / static_cast<std::uint64_t>(A.cols()));
        const Index j = static_cast<Index>(pos % static_cast<std::uint64_t>(A.cols()));
        entries.push_back({i, j, A(i, j)});
    }
    return SampledMatrix(A.rows(), A.cols(), std::move(entries));
}

// Smooth low-rank test image: a sum of `rank` rank-1 outer products of
// low-frequency sine profiles with geometrically decaying weights, rescaled
// to [0, 255] and quantized to 8 bits.
inline GrayImage synthetic_image(Index size, Index rank, std::uint64_t seed) {
    if (size < 2 || rank < 1 || rank > size) {
        throw std::invalid_argument("synthetic_image: bad size/rank");
    }
    detail::GaussianStream stream(derive_seed(seed, 2));
    auto smooth_profile = [&](Index len, int term) {
        RealVector v(len);
        const double freq = 0.5 + 0.35 * static_cast<double>(term) + 0.25 * std::abs(stream.next());
        const double phase = 3.14159265358979323846 * stream.next();
        for (Index i = 0; i < len; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(len - 1);
            v(i) = std::sin(2.0 * 3.14159265358979323846 * freq * x + phase);
        }
        return v;
    };
    DenseBlock M = DenseBlock::Zero(size, size);
    double weight = 1.0;
    for (Index t = 0; t < rank; ++t, weight *= 0.8) {
        M += weight * smooth_profile(size, static_cast<int>(t)) *
             smooth_profile(size, static_cast<int>(t)).transpose();
    }
    const double lo = M.minCoeff();
    const double hi = M.maxCoeff();
    const double span = (hi > lo) ? (hi - lo) : 1.0;
    return quantize_image(255.0 * (M.array() - lo).matrix() / span);
}

// Noisy low-rank preference matrix observed on a uniform subset of cells:
// 3 + U V^T plus Gaussian noise, snapped to half-star steps and clipped to
// [1, 5]. fill is the fraction of cells that carry a rating.
inline RatingsDataset synthetic_ratings(Index users, Index items, Index rank, double fill,
                                        double noise, std::uint64_t seed) {
    if (users < 1 || items < 1 || rank < 1 || rank > std::min(users, items)) {
        throw std::invalid_argument("synthetic_ratings: bad dimensions/rank");
    }
    if (!(fill > 0.0 && fill <= 1.0)) {
        throw std::invalid_argument("synthetic_ratings: fill must lie in (0, 1]");
    }
    const DenseBlock U =
        gaussian_block(users, rank, derive_seed(seed, 0)) / std::sqrt(static_cast<double>(rank));
    const DenseBlock V = gaussian_block(items, rank, derive_seed(seed, 1));
    detail::GaussianStream noise_stream(derive_seed(seed, 2));

    const std::uint64_t total =
        static_cast<std::uint64_t>(users) * static_cast<std::uint64_t>(items);
    const std::uint64_t ns =
        static_cast<std::uint64_t>(std::floor(fill * static_cast<double>(total) + 1e-9));
    if (ns < 2) {
        throw std::invalid_argument("synthetic_ratings: fill selects fewer than 2 cells");
    }
    RatingsDataset ds;
    ds.users = users;
    ds.items = items;
    ds.user_ids.resize(users);
    ds.item_ids.resize(items);
    for (Index u = 0; u < users; ++u) {
        ds.user_ids[u] = u;
    }
    for (Index i = 0; i < items; ++i) {
        ds.item_ids[i] = i;
    }
    ds.triples.reserve(ns);
    for (std::uint64_t pos : detail::sample_positions(total, ns, derive_seed(seed, 3))) {
        const Index u = static_cast<Index>(pos / static_cast<std::uint64_t>(items));
        const Index i = static_cast<Index>(pos % static_cast<std::uint64_t>(items));
        double r = 3.0 + U.row(u).dot(V.row(i)) + noise * noise_stream.next();
        r = std::round(r * 2.0) / 2.0;  // half-star steps
        r = std::clamp(r, 1.0, 5.0);
        ds.triples.push_back({u, i, r});
    }
    ds.provenance = "synthetic";
    return ds;
}

}  // namespace svt
