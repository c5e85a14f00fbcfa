#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <limits>

using svt::Backend;
using svt::DenseBlock;
using svt::Index;
using svt::SampledMatrix;
using svt::StopRule;
using svt::SvtConfig;
using svt::SvtResult;

TEST_CASE("default_config applies the suggested parameter formulas") {
    // 512x512 with 52429 observed entries (20%)
    std::vector<svt::Triplet> ts;
    svt::Index k = 0;
    for (svt::Index i = 0; i < 512 && k < 52429; ++i) {
        for (svt::Index j = 0; j < 512 && k < 52429; ++j, ++k) {
            ts.push_back({i, j, 1.0});
        }
    }
    const SampledMatrix S(512, 512, ts);
    const SvtConfig cfg = svt::default_config(S);
    REQUIRE(cfg.delta == Catch::Approx(2.236).margin(1e-3));
    REQUIRE(cfg.t0 == 25);
    REQUIRE(cfg.dt == 10);
    REQUIRE(cfg.beta == 0.95);
}

TEST_CASE("default_config tau is the sample-set Frobenius norm") {
    const SampledMatrix S(2, 2, {{0, 0, 3.0}, {1, 1, 4.0}});
    REQUIRE(svt::default_config(S).tau == Catch::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("shrink keeps values strictly above the threshold") {
    svt::LowRankFactors F;
    F.U = svt::qr_orthonormal(svt::gaussian_block(6, 3, 1));
    F.V = svt::qr_orthonormal(svt::gaussian_block(5, 3, 2));
    F.sigma = Eigen::Vector3d(5.0, 3.0, 1.0);

    const svt::LowRankFactors S2 = svt::shrink(F, 2.0);
    REQUIRE(S2.rank() == 2);
    REQUIRE(S2.sigma(0) == 3.0);
    REQUIRE(S2.sigma(1) == 1.0);

    REQUIRE(svt::shrink(F, 5.0).rank() == 0);  // boundary value drops too
    REQUIRE(svt::shrink(F, 7.0).rank() == 0);

    const svt::LowRankFactors S0 = svt::shrink(F, 0.0);
    REQUIRE(S0.sigma == F.sigma);
    REQUIRE(S0.U == F.U);
    REQUIRE(S0.V == F.V);
}

TEST_CASE("kickstart scales the samples by ceil(tau / (delta sigma1))") {
    const SampledMatrix S(3, 3, {{0, 0, 3.0}});  // sigma1 = 3 exactly
    const SampledMatrix Y = svt::kickstart(S, 10.0, 1.0, 5);
    REQUIRE(Y.same_pattern(S));
    REQUIRE(Y.values()[0] == Catch::Approx(12.0).epsilon(1e-9));  // k0 = 4

    // tau <= delta * sigma1 leaves k0 = 1, so Y is delta * A
    const SampledMatrix Y1 = svt::kickstart(S, 2.0, 1.0, 5);
    REQUIRE(Y1.values()[0] == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("kickstart keeps the sample pattern") {
    const SampledMatrix S = oracle::random_sampled(30, 20, 0.2, 6);
    const SampledMatrix Y = svt::kickstart(S, 5.0, 1.5, 7);
    REQUIRE(Y.same_pattern(S));
}

TEST_CASE("residual basics") {
    const SampledMatrix A(2, 2, {{0, 0, 3.0}});
    REQUIRE(svt::residual(A, A) == 0.0);
    const SampledMatrix Z = A.with_values({0.0});
    REQUIRE(svt::residual(A, Z) == 3.0);
}

TEST_CASE("residual matches the densify oracle") {
    const SampledMatrix A = oracle::random_sampled(15, 12, 0.4, 8);
    const SampledMatrix Y = A.with_values([&] {
        std::vector<double> v = A.values();
        for (double& x : v) {
            x += 0.25;
        }
        return v;
    }());
    const double expected = (oracle::dense_of(A) - oracle::dense_of(Y)).norm();
    REQUIRE(svt::residual(A, Y) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("train_mae basics and oracle agreement") {
    svt::LowRankFactors F;
    F.U = svt::qr_orthonormal(svt::gaussian_block(10, 2, 9));
    F.sigma = Eigen::Vector2d(4.0, 2.0);
    F.V = svt::qr_orthonormal(svt::gaussian_block(8, 2, 10));

    const DenseBlock full = oracle::product(F);
    const SampledMatrix onA = svt::project_low_rank(oracle::random_sampled(10, 8, 0.5, 11), F);
    REQUIRE(svt::train_mae(onA, F) <= 1e-13);  // factors reproduce their own projection

    const SampledMatrix one(10, 8, {{3, 4, full(3, 4) + 2.0}});
    REQUIRE(svt::train_mae(one, F) == Catch::Approx(2.0).margin(1e-12));

    const SampledMatrix S = oracle::random_sampled(10, 8, 0.4, 12);
    double acc = 0.0;
    for (const svt::Triplet& t : S.triplets()) {
        acc += std::abs(t.value - full(t.row, t.col));
    }
    REQUIRE(svt::train_mae(S, F) == Catch::Approx(acc / S.nnz()).epsilon(1e-12));
}

TEST_CASE("the Bregman step moves the iterate by exactly delta times the mismatch") {
    const SampledMatrix A = oracle::random_sampled(20, 18, 0.3, 13);
    svt::LowRankFactors X;
    X.U = svt::qr_orthonormal(svt::gaussian_block(20, 3, 14));
    X.sigma = Eigen::Vector3d(2.0, 1.0, 0.5);
    X.V = svt::qr_orthonormal(svt::gaussian_block(18, 3, 15));

    const SampledMatrix Y = svt::kickstart(A, 3.0, 1.2, 16);
    const SampledMatrix P = svt::project_low_rank(A, X);
    const SampledMatrix D = svt::sp_axpy(A, -1.0, P);
    const SampledMatrix Ynext = svt::sp_axpy(Y, 1.2, D);

    const double moved = std::sqrt(svt::sp_frob_norm_sq(svt::sp_axpy(Ynext, -1.0, Y)));
    const double bound = 1.2 * std::sqrt(svt::sp_frob_norm_sq(D));
    REQUIRE(moved <= bound * (1.0 + 1e-14));
    REQUIRE(moved == Catch::Approx(bound).epsilon(1e-12));
}

TEST_CASE("svt_run completes a fully observed rank-1 matrix") {
    DenseBlock A = svt::gaussian_block(20, 1, 17) * svt::gaussian_block(15, 1, 18).transpose();
    const SampledMatrix S = svt::to_sampled(A);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 500;
    cfg.seed = 19;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::train_mae(1e-4));
    REQUIRE(r.converged);
    REQUIRE(r.factors.rank() == 1);
    REQUIRE(r.trace.back().train_mae < 1e-4);
}

TEST_CASE("svt_run recovers a synthetic low-rank matrix from 40% samples") {
    const DenseBlock A = svt::make_low_rank(200, 200, 10, 20);
    const SampledMatrix S = svt::sample_dense(A, 0.4, 21);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 300;
    cfg.seed = 22;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::train_mae(1e-3));
    REQUIRE(r.converged);
    const double rel = (oracle::product(r.factors) - A).norm() / A.norm();
    REQUIRE(rel <= 1e-2);
}

TEST_CASE("cooling multiplies the threshold by beta exactly when the residual stalls") {
    const DenseBlock A = svt::make_low_rank(60, 50, 4, 23);
    const SampledMatrix S = svt::sample_dense(A, 0.5, 24);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 60;
    cfg.seed = 25;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::none());
    REQUIRE(r.trace.size() == 60);

    double eps_min = std::numeric_limits<double>::infinity();
    double expected = cfg.eps_threshold0;
    int cooled = 0;
    for (const svt::IterationRecord& rec : r.trace) {
        if (rec.residual < eps_min) {
            eps_min = rec.residual;
        } else {
            expected *= cfg.beta;
            ++cooled;
        }
        REQUIRE(rec.eps_threshold == expected);  // bit-exact replay
    }
    REQUIRE(cooled > 0);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        REQUIRE(r.trace[i].eps_threshold <= r.trace[i - 1].eps_threshold);
    }
}

TEST_CASE("svt_run flags non-convergence at maxit and returns the best iterate") {
    const DenseBlock A = svt::make_low_rank(40, 40, 3, 26);
    const SampledMatrix S = svt::sample_dense(A, 0.5, 27);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 5;
    cfg.seed = 28;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::train_mae(1e-12));
    REQUIRE(!r.converged);
    REQUIRE(r.trace.size() == 5);
    // returned factors realize the best train MAE seen in the trace
    double best = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.trace) {
        best = std::min(best, rec.train_mae);
    }
    REQUIRE(svt::train_mae(S, r.factors) == Catch::Approx(best).epsilon(1e-12));
}

TEST_CASE("rank-0 shrinkage in early iterations is survivable") {
    // huge tau relative to the data so the first shrinkages return rank 0
    const DenseBlock A = svt::make_low_rank(30, 30, 2, 29);
    const SampledMatrix S = svt::sample_dense(A, 0.6, 30);
    SvtConfig cfg = svt::default_config(S);
    cfg.tau = 40.0 * cfg.tau;
    cfg.maxit = 8;
    cfg.seed = 31;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::none());
    REQUIRE(r.trace.size() == 8);  // no crash, full trace
}

TEST_CASE("svt_run_oracle agrees with svt_run on a fully observed rank-1 matrix") {
    DenseBlock A = svt::gaussian_block(18, 1, 32) * svt::gaussian_block(14, 1, 33).transpose();
    const SampledMatrix S = svt::to_sampled(A);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 500;
    cfg.seed = 34;
    const SvtResult a = svt::svt_run(S, cfg, StopRule::train_mae(1e-5));
    const SvtResult b = svt::svt_run_oracle(S, cfg, StopRule::train_mae(1e-5));
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    REQUIRE((oracle::product(a.factors) - oracle::product(b.factors)).cwiseAbs().maxCoeff() <=
            1e-8);
}

TEST_CASE("final ranks of the sketching and oracle backends stay close") {
    const DenseBlock A = svt::make_low_rank(100, 100, 5, 35);
    const SampledMatrix S = svt::sample_dense(A, 0.4, 36);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 300;
    cfg.seed = 37;
    const SvtResult a = svt::svt_run(S, cfg, StopRule::train_mae(5e-3));
    const SvtResult b = svt::svt_run_oracle(S, cfg, StopRule::train_mae(5e-3));
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    REQUIRE(std::abs(a.factors.rank() - b.factors.rank()) <= 2);
}

TEST_CASE("backend traces stay within 5e-2 train MAE of each other") {
    const DenseBlock A = svt::make_low_rank(100, 100, 5, 38);
    const SampledMatrix S = svt::sample_dense(A, 0.4, 39);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 50;
    cfg.seed = 40;
    const SvtResult a = svt::svt_run(S, cfg, StopRule::none());
    const SvtResult b = svt::svt_run_oracle(S, cfg, StopRule::none());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        REQUIRE(std::abs(a.trace[i].train_mae - b.trace[i].train_mae) <= 5e-2);
    }
}

TEST_CASE("the residual trace from the dual iterate rises to a plateau") {
    // The dual iterate starts past the data (kickstart overshoot) and moves
    // further away on the sample set while the primal matures, so the
    // recorded residual is non-decreasing. This is what drives the frequent
    // annealing events.
    const DenseBlock A = svt::make_low_rank(80, 70, 4, 41);
    const SampledMatrix S = svt::sample_dense(A, 0.5, 42);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 80;
    cfg.seed = 43;
    const SvtResult r = svt::svt_run_oracle(S, cfg, StopRule::none());
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        REQUIRE(r.trace[i].residual >= r.trace[i - 1].residual - 1e-9);
    }
}

TEST_CASE("every iterate keeps the sample pattern") {
    const SampledMatrix S = oracle::random_sampled(25, 20, 0.3, 44);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 10;
    cfg.seed = 45;
    // the observer sees shrunk factors whose projection always lives on the
    // pattern; pattern preservation of Y itself is structural (sp_axpy
    // rejects mismatches), so a full run without throwing is the check
    const SvtResult r = svt::svt_run(S, cfg, StopRule::none());
    REQUIRE(r.trace.size() == 10);
}

TEST_CASE("observer can stop the run early") {
    const DenseBlock A = svt::make_low_rank(40, 40, 3, 46);
    const SampledMatrix S = svt::sample_dense(A, 0.5, 47);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 100;
    cfg.seed = 48;
    int seen = 0;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::none(),
                                     [&](const svt::IterationRecord&, const svt::LowRankFactors&) {
                                         return ++seen < 7;
                                     });
    REQUIRE(r.trace.size() == 7);
    REQUIRE(r.converged);
}

TEST_CASE("svt_run validates its configuration") {
    const SampledMatrix S(2, 2, {{0, 0, 1.0}});
    SvtConfig cfg;  // tau = delta = 0
    REQUIRE_THROWS_AS(svt::svt_run(S, cfg, StopRule::none()), std::invalid_argument);
    cfg = svt::default_config(S);
    cfg.beta = 1.5;
    REQUIRE_THROWS_AS(svt::svt_run(S, cfg, StopRule::none()), std::invalid_argument);
}

TEST_CASE("trace export round-trips through CSV") {
    const DenseBlock A = svt::make_low_rank(30, 30, 2, 49);
    const SampledMatrix S = svt::sample_dense(A, 0.5, 50);
    SvtConfig cfg = svt::default_config(S);
    cfg.maxit = 6;
    cfg.seed = 51;
    const SvtResult r = svt::svt_run(S, cfg, StopRule::none());

    const std::string path = "trace_test.csv";
    svt::write_trace_csv(r.trace, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == std::string("# ") + svt::kTraceSchemaVersion);
    std::getline(in, line);
    REQUIRE(line == svt::kTraceCsvHeader);
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            ++rows;
        }
    }
    REQUIRE(rows == 6);
    std::remove(path.c_str());
}
