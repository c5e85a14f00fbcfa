#pragma once

#include "svt/dense.hpp"
#include "svt/sampled.hpp"
#include "svt/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <chrono>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svt {

// Solver parameters.
//   tau             shrinkage threshold (entry units)
//   delta           gradient step size
//   maxit           iteration cap
//   dt, np, t0      sketch schedule (see SketchParams)
//   eps_stop        residual stop tolerance (residual rule only)
//   eps_threshold0  initial sketch error-percentage target
//   beta            annealing factor in (0, 1)
//   seed            master seed for kickstart and per-iteration sketches
struct SvtConfig {
    double tau = 0.0;
    double delta = 0.0;
    int maxit = 500;
    Index dt = 10;
    int np = 1;
    double eps_stop = 1e-3;
    double eps_threshold0 = 0.5;
    double beta = 0.95;
    Index t0 = 10;
    std::uint64_t seed = 1;
};

// One row of the convergence trace. `rank` is the rank revealed by the
// partial SVD of the iterate (min(m, n) for the full-SVD backend);
// `eps_threshold` is the sketch target in effect after this iteration's
// annealing update.
struct IterationRecord {
    int iter = 0;
    Index rank = 0;
    double residual = 0.0;
    double eps_threshold = 0.0;
    double train_mae = 0.0;
    double sketch_ms = 0.0;
    double total_ms = 0.0;
};

struct StopRule {
    enum class Kind { TrainMae, Residual, None };
    Kind kind = Kind::TrainMae;
    double threshold = 0.1;

    static StopRule train_mae(double threshold) { return {Kind::TrainMae, threshold}; }
    static StopRule residual(double threshold) { return {Kind::Residual, threshold}; }
    static StopRule none() { return {Kind::None, 0.0}; }
};

struct Backend {
    enum class Kind { R4Svd, R3Svd, RsvdFixed, FullSvd };
    Kind kind = Kind::R4Svd;
    Index fixed_rank = 0;  // RsvdFixed only

    static Backend r4svd() { return {Kind::R4Svd, 0}; }
    static Backend r3svd() { return {Kind::R3Svd, 0}; }
    static Backend rsvd_fixed(Index rank) { return {Kind::RsvdFixed, rank}; }
    static Backend full_svd() { return {Kind::FullSvd, 0}; }
};

struct SvtResult {
    LowRankFactors factors;
    std::vector<IterationRecord> trace;
    bool converged = false;
};

// Called once per iteration with the trace row and the shrunk factors;
// returning false stops the run (counted as converged).
using IterationObserver = std::function<bool(const IterationRecord&, const LowRankFactors&)>;

inline constexpr int kSpectralNormIters = 20;

// Paper-suggested defaults derived from the observed data:
// tau = ||A|Lambda||_F, delta = sqrt(m n / ns), t0 = floor(0.05 min(m, n)),
// dt = 10, beta = 0.95.
inline SvtConfig default_config(const SampledMatrix& A_samples) {
    SvtConfig cfg;
    cfg.tau = std::sqrt(sp_frob_norm_sq(A_samples));
    cfg.delta = std::sqrt(static_cast<double>(A_samples.rows()) *
                          static_cast<double>(A_samples.cols()) /
                          static_cast<double>(A_samples.nnz()));
    const Index min_dim = std::min(A_samples.rows(), A_samples.cols());
    cfg.t0 = std::max<Index>(1, static_cast<Index>(0.05 * static_cast<double>(min_dim)));
    cfg.dt = 10;
    cfg.beta = 0.95;
    return cfg;
}

// Keeps exactly the singular triplets with sigma > tau, each shifted down by
// tau. Strict comparison: a value equal to tau would carry zero weight.
inline LowRankFactors shrink(const LowRankFactors& F, double tau) {
    Index keep = 0;
    while (keep < F.rank() && F.sigma(keep) > tau) {
        ++keep;
    }
    LowRankFactors out;
    out.U = F.U.leftCols(keep);
    out.sigma = F.sigma.head(keep).array() - tau;
    out.V = F.V.leftCols(keep);
    return out;
}

// Initial iterate k0 * delta * A|Lambda with
// k0 = ceil(tau / (delta * sigma_1_est)), the standard SVT kickstart that
// jumps past the iterations in which the shrinkage would return zero.
inline SampledMatrix kickstart(const SampledMatrix& A_samples, double tau, double delta,
                               std::uint64_t seed) {
    if (!(tau > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("kickstart: tau and delta must be positive");
    }
    const double sigma1 = spectral_norm_est(A_samples, kSpectralNormIters, seed);
    double k0 = 1.0;
    if (sigma1 > 0.0) {
        k0 = std::max(1.0, std::ceil(tau / (delta * sigma1)));
    }
    std::vector<double> vals(A_samples.values());
    for (double& v : vals) {
        v *= k0 * delta;
    }
    return A_samples.with_values(std::move(vals));
}

// Frobenius norm of A - Y on the shared sample set.
inline double residual(const SampledMatrix& A_samples, const SampledMatrix& Y) {
    if (!A_samples.same_pattern(Y)) {
        throw std::invalid_argument("residual: operands must share the identical pattern");
    }
    const auto& a = A_samples.values();
    const auto& y = Y.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - y[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Mean absolute error of the factor product against the stored entries,
// evaluated on the sample pattern without densifying.
inline double train_mae(const SampledMatrix& A_samples, const LowRankFactors& F) {
    const SampledMatrix P = project_low_rank(A_samples, F);
    const auto& a = A_samples.values();
    const auto& p = P.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += std::abs(a[k] - p[k]);
    }
    return acc / static_cast<double>(a.size());
}

namespace detail {

// Process CPU time where the platform exposes it, otherwise monotonic wall
// time.
inline double now_ms() {
#if defined(CLOCK_PROCESS_CPUTIME_ID)
    timespec ts;
    if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) == 0) {
        return static_cast<double>(ts.tv_sec) * 1e3 + static_cast<double>(ts.tv_nsec) * 1e-6;
    }
#endif
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline void check_config(const SvtConfig& cfg) {
    if (!(cfg.tau > 0.0)) {
        throw std::invalid_argument("SvtConfig: tau must be positive");
    }
    if (!(cfg.delta > 0.0)) {
        throw std::invalid_argument("SvtConfig: delta must be positive");
    }
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
        throw std::invalid_argument("SvtConfig: beta must lie in (0, 1)");
    }
    if (!(cfg.eps_threshold0 > 0.0 && cfg.eps_threshold0 < 1.0)) {
        throw std::invalid_argument("SvtConfig: eps_threshold0 must lie in (0, 1)");
    }
    if (cfg.maxit < 1) {
        throw std::invalid_argument("SvtConfig: maxit must be >= 1");
    }
    if (cfg.t0 < 1 || cfg.dt < 1 || cfg.np < 0) {
        throw std::invalid_argument("SvtConfig: need t0 >= 1, dt >= 1, np >= 0");
    }
}

}  // namespace detail

// Bregman iteration driver shared by all partial-SVD backends: per iteration,
// factor the iterate, track the sample-set residual, anneal the sketch
// precision target when the residual stalls, shrink, check the stop rule, and
// take the gradient step on the sample set. Returns the shrunk factors at the
// stop point, or the best-so-far under the stop metric when maxit is reached
// (converged = false).
inline SvtResult svt_run_backend(const SampledMatrix& A_samples, const SvtConfig& cfg,
                                 StopRule stop, Backend backend,
                                 const IterationObserver& observer = {}) {
    detail::check_config(cfg);
    const Index min_dim = std::min(A_samples.rows(), A_samples.cols());
    if (backend.kind == Backend::Kind::RsvdFixed &&
        (backend.fixed_rank < 1 || backend.fixed_rank > min_dim)) {
        throw std::invalid_argument("svt_run_backend: fixed rank out of range");
    }
    if (cfg.t0 > min_dim) {
        throw std::invalid_argument("SvtConfig: t0 exceeds min(m, n)");
    }

    SampledMatrix Y = kickstart(A_samples, cfg.tau, cfg.delta, derive_seed(cfg.seed, 0));
    DenseBlock U_prev(A_samples.rows(), 0);
    double eps_threshold = cfg.eps_threshold0;
    double eps_min = std::numeric_limits<double>::infinity();

    SvtResult result;
    result.factors = LowRankFactors{DenseBlock(A_samples.rows(), 0), RealVector(0),
                                    DenseBlock(A_samples.cols(), 0)};
    double best_metric = std::numeric_limits<double>::infinity();

    const double t_start = detail::now_ms();
    for (int iter = 1; iter <= cfg.maxit; ++iter) {
        const std::uint64_t iter_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(iter));
        SketchParams sp;
        sp.t = cfg.t0;
        sp.dt = cfg.dt;
        sp.np = cfg.np;
        sp.eps_threshold = eps_threshold;
        sp.seed = iter_seed;

        const double t_sketch = detail::now_ms();
        LowRankFactors full_factors;
        Index revealed = 0;
        switch (backend.kind) {
            case Backend::Kind::R4Svd: {
                SketchResult sr = (iter == 1) ? r3svd(Y, sp) : r4svd(Y, U_prev, sp);
                full_factors = std::move(sr.factors);
                revealed = sr.rank;
                break;
            }
            case Backend::Kind::R3Svd: {
                SketchResult sr = r3svd(Y, sp);
                full_factors = std::move(sr.factors);
                revealed = sr.rank;
                break;
            }
            case Backend::Kind::RsvdFixed: {
                SketchParams fixed = sp;
                fixed.p = std::min<Index>(sp.p, min_dim - backend.fixed_rank);
                full_factors = rsvd(Y, backend.fixed_rank, fixed);
                revealed = backend.fixed_rank;
                break;
            }
            case Backend::Kind::FullSvd: {
                full_factors = small_svd(densify(Y));
                revealed = min_dim;
                break;
            }
        }
        const double sketch_ms = detail::now_ms() - t_sketch;

        const double eps_i = residual(A_samples, Y);
        if (eps_i < eps_min) {
            eps_min = eps_i;
        } else {
            eps_threshold *= cfg.beta;  // simulated-annealing style cooling
        }

        LowRankFactors X = shrink(full_factors, cfg.tau);
        const double mae = train_mae(A_samples, X);

        IterationRecord rec;
        rec.iter = iter;
        rec.rank = revealed;
        rec.residual = eps_i;
        rec.eps_threshold = eps_threshold;
        rec.train_mae = mae;
        rec.sketch_ms = sketch_ms;
        rec.total_ms = detail::now_ms() - t_start;
        result.trace.push_back(rec);

        const double metric = (stop.kind == StopRule::Kind::Residual) ? eps_i : mae;
        if (metric < best_metric) {
            best_metric = metric;
            result.factors = X;
        }

        bool stop_hit = false;
        if (stop.kind == StopRule::Kind::TrainMae && mae < stop.threshold) {
            stop_hit = true;
        } else if (stop.kind == StopRule::Kind::Residual && eps_i < stop.threshold) {
            stop_hit = true;
        }
        bool keep_going = true;
        if (observer) {
            keep_going = observer(rec, X);
        }
        if (stop_hit || !keep_going) {
            result.factors = std::move(X);
            result.converged = true;
            return result;
        }

        const SampledMatrix P = project_low_rank(A_samples, X);
        const SampledMatrix D = sp_axpy(A_samples, -1.0, P);
        Y = sp_axpy(Y, cfg.delta, D);
        U_prev = X.U;
    }
    result.converged = false;
    return result;
}

// The recycling-sketch solver: R4SVD partial SVDs with the left singular
// vectors of the previous shrinkage recycled into each sketch (the first
// iteration sketches from scratch at width t0).
inline SvtResult svt_run(const SampledMatrix& A_samples, const SvtConfig& cfg, StopRule stop,
                         const IterationObserver& observer = {}) {
    return svt_run_backend(A_samples, cfg, stop, Backend::r4svd(), observer);
}

// Identical iteration loop with the partial SVD replaced by a full
// deterministic SVD of the densified iterate; baseline and test oracle.
inline SvtResult svt_run_oracle(const SampledMatrix& A_samples, const SvtConfig& cfg,
                                StopRule stop, const IterationObserver& observer = {}) {
    return svt_run_backend(A_samples, cfg, stop, Backend::full_svd(), observer);
}

// --- trace export ---------------------------------------------------------

inline constexpr const char* kTraceSchemaVersion = "svt-trace v1";
inline constexpr const char* kTraceCsvHeader =
    "iter,rank,residual,eps_threshold,train_mae,sketch_ms,total_ms";

inline void write_trace_csv(const std::vector<IterationRecord>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_trace_csv: cannot open " + path);
    }
    out << "# " << kTraceSchemaVersion << "\n" << kTraceCsvHeader << "\n";
    char buf[256];
    for (const IterationRecord& r : trace) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.3f,%.3f\n", r.iter,
                      static_cast<long long>(r.rank), r.residual, r.eps_threshold, r.train_mae,
                      r.sketch_ms, r.total_ms);
        out << buf;
    }
}

// Same rows as the CSV, as a flat JSON document.
inline void write_trace_json(const std::vector<IterationRecord>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_trace_json: cannot open " + path);
    }
    out << "{\n  \"schema\": \"" << kTraceSchemaVersion << "\",\n  \"rows\": [\n";
    char buf[320];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const IterationRecord& r = trace[i];
        std::snprintf(buf, sizeof(buf),
                      "    {\"iter\": %d, \"rank\": %lld, \"residual\": %.17g, "
                      "\"eps_threshold\": %.17g, \"train_mae\": %.17g, "
                      "\"sketch_ms\": %.3f, \"total_ms\": %.3f}%s\n",
                      r.iter, static_cast<long long>(r.rank), r.residual, r.eps_threshold,
                      r.train_mae, r.sketch_ms, r.total_ms,
                      i + 1 < trace.size() ? "," : "");
        out << buf;
    }
    out << "  ]\n}\n";
}

}  // namespace svt
