// Command-line front end: matrix completion runs, image and ratings
// experiments, and backend benchmarks. Every run writes a manifest JSON that
// reproduces it bit-for-bit (deterministic columns) via `svt --manifest`.
//
// Exit codes: 0 success, 2 input error, 3 stop rule not reached within maxit.

#include "svt/svt.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;

namespace {

// --- logging (SVT_LOG = off|error|info|debug) -------------------------------

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("SVT_LOG");
        if (!env) {
            return 2;
        }
        const std::string v(env);
        if (v == "off" || v == "0") return 0;
        if (v == "error") return 1;
        if (v == "debug") return 3;
        return 2;
    }();
    return level;
}

template <typename... Args>
void log_at(int level, const char* fmt, Args... args) {
    if (log_level() >= level) {
        std::fprintf(stderr, "[svt] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

#define LOG_ERROR(...) log_at(1, __VA_ARGS__)
#define LOG_INFO(...) log_at(2, __VA_ARGS__)
#define LOG_DEBUG(...) log_at(3, __VA_ARGS__)

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Seed streams hanging off the user-facing --seed.
constexpr std::uint64_t kStreamImage = 901;
constexpr std::uint64_t kStreamSampling = 902;
constexpr std::uint64_t kStreamRatings = 903;
constexpr std::uint64_t kStreamSplit = 904;
constexpr std::uint64_t kStreamBench = 905;

// --- flag plumbing ----------------------------------------------------------

struct SolverFlags {
    std::string backend = "r4svd";
    long long fixed_rank = 0;
    double tau = 0.0;
    double delta = 0.0;
    long long dt = 0;
    long long t0 = 0;
    int np = -1;
    double beta = 0.0;
    double eps_threshold0 = 0.0;
    double stop_mae = std::numeric_limits<double>::quiet_NaN();
    double stop_residual = std::numeric_limits<double>::quiet_NaN();
    long long maxit = 0;
    unsigned long long seed = 1;
    int threads = 1;
    std::string out_prefix = "svt_out";
    std::string trace_out;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
    cmd->add_option("--backend", f.backend, "Partial SVD backend")
        ->check(CLI::IsMember({"r4svd", "r3svd", "rsvd-fixed", "full-oracle"}))
        ->capture_default_str();
    cmd->add_option("--rank", f.fixed_rank, "Fixed rank for --backend rsvd-fixed");
    cmd->add_option("--tau", f.tau, "Shrinkage threshold (default ||A|Lambda||_F)");
    cmd->add_option("--delta", f.delta, "Step size (default sqrt(m n / ns))");
    cmd->add_option("--dt", f.dt, "Sampling increment per extension round (default 10)");
    cmd->add_option("--t0", f.t0, "Initial sampling size (default floor(0.05 min(m,n)))");
    cmd->add_option("--np", f.np, "Power iteration passes (default 1)");
    cmd->add_option("--beta", f.beta, "Annealing factor (default 0.95)");
    cmd->add_option("--eps-threshold0", f.eps_threshold0,
                    "Initial sketch error-percentage target (default 0.5)");
    cmd->add_option("--stop-mae", f.stop_mae, "Stop when train MAE drops below this");
    cmd->add_option("--stop-residual", f.stop_residual,
                    "Stop when the sample-set residual drops below this");
    cmd->add_option("--maxit", f.maxit, "Iteration cap (default 500)");
    cmd->add_option("--seed", f.seed, "Master seed")->capture_default_str();
    cmd->add_option("--threads", f.threads, "Kernel thread cap; 1 is bit-reproducible")
        ->capture_default_str();
    cmd->add_option("--out-prefix", f.out_prefix, "Artifact path prefix")->capture_default_str();
    cmd->add_option("--trace-out", f.trace_out, "Trace CSV path (default <prefix>.trace.csv)");
}

// Resolves config defaults from the data, then applies explicit overrides.
svt::SvtConfig resolve_config(const svt::SampledMatrix& A, const SolverFlags& f) {
    svt::SvtConfig cfg = svt::default_config(A);
    cfg.maxit = 500;
    if (f.tau > 0.0) cfg.tau = f.tau;
    if (f.delta > 0.0) cfg.delta = f.delta;
    if (f.dt > 0) cfg.dt = static_cast<svt::Index>(f.dt);
    if (f.t0 > 0) cfg.t0 = static_cast<svt::Index>(f.t0);
    if (f.np >= 0) cfg.np = f.np;
    if (f.beta > 0.0) cfg.beta = f.beta;
    if (f.eps_threshold0 > 0.0) cfg.eps_threshold0 = f.eps_threshold0;
    if (f.maxit > 0) cfg.maxit = static_cast<int>(f.maxit);
    cfg.seed = f.seed;
    if (!std::isnan(f.stop_residual)) {
        cfg.eps_stop = f.stop_residual;
    }
    return cfg;
}

json config_to_json(const svt::SvtConfig& cfg) {
    return json{{"tau", cfg.tau},
                {"delta", cfg.delta},
                {"maxit", cfg.maxit},
                {"dt", cfg.dt},
                {"np", cfg.np},
                {"eps_stop", cfg.eps_stop},
                {"eps_threshold0", cfg.eps_threshold0},
                {"beta", cfg.beta},
                {"t0", cfg.t0},
                {"seed", cfg.seed}};
}

svt::SvtConfig config_from_json(const json& j) {
    svt::SvtConfig cfg;
    cfg.tau = j.at("tau").get<double>();
    cfg.delta = j.at("delta").get<double>();
    cfg.maxit = j.at("maxit").get<int>();
    cfg.dt = j.at("dt").get<svt::Index>();
    cfg.np = j.at("np").get<int>();
    cfg.eps_stop = j.at("eps_stop").get<double>();
    cfg.eps_threshold0 = j.at("eps_threshold0").get<double>();
    cfg.beta = j.at("beta").get<double>();
    cfg.t0 = j.at("t0").get<svt::Index>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

// Picks the stop rule: explicit flags win, otherwise the command default.
json resolve_stop(const SolverFlags& f, double default_mae) {
    if (!std::isnan(f.stop_mae) && !std::isnan(f.stop_residual)) {
        throw InputError("choose one of --stop-mae / --stop-residual");
    }
    if (!std::isnan(f.stop_residual)) {
        return json{{"rule", "residual"}, {"threshold", f.stop_residual}};
    }
    const double mae = std::isnan(f.stop_mae) ? default_mae : f.stop_mae;
    return json{{"rule", "train_mae"}, {"threshold", mae}};
}

svt::StopRule stop_from_json(const json& j) {
    const std::string rule = j.at("rule").get<std::string>();
    const double threshold = j.at("threshold").get<double>();
    if (rule == "residual") {
        return svt::StopRule::residual(threshold);
    }
    if (rule == "train_mae") {
        return svt::StopRule::train_mae(threshold);
    }
    if (rule == "none") {
        return svt::StopRule::none();
    }
    throw InputError("unknown stop rule '" + rule + "'");
}

svt::Backend backend_from_json(const json& man) {
    const std::string name = man.at("backend").get<std::string>();
    if (name == "r4svd") return svt::Backend::r4svd();
    if (name == "r3svd") return svt::Backend::r3svd();
    if (name == "full-oracle") return svt::Backend::full_svd();
    if (name == "rsvd-fixed") {
        const auto rank = man.at("fixed_rank").get<svt::Index>();
        if (rank < 1) {
            throw InputError("--backend rsvd-fixed requires --rank >= 1");
        }
        return svt::Backend::rsvd_fixed(rank);
    }
    throw InputError("unknown backend '" + name + "'");
}

// --- manifest execution ------------------------------------------------------

std::string trace_csv_path(const json& man) {
    const json& out = man.at("outputs");
    if (out.contains("trace_csv") && !out.at("trace_csv").get<std::string>().empty()) {
        return out.at("trace_csv").get<std::string>();
    }
    return out.at("prefix").get<std::string>() + ".trace.csv";
}

void write_manifest(const json& man) {
    const std::string path = man.at("outputs").at("prefix").get<std::string>() + ".manifest.json";
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write manifest " + path);
    }
    out << man.dump(2) << "\n";
}

void write_factors(const svt::LowRankFactors& F, const std::string& prefix) {
    svt::write_matrix_market_array(F.U, prefix + ".U.mtx");
    svt::write_matrix_market_array(F.sigma, prefix + ".sigma.mtx");
    svt::write_matrix_market_array(F.V, prefix + ".V.mtx");
}

void write_metrics(const json& metrics, const std::string& prefix) {
    std::ofstream out(prefix + ".metrics.json");
    out << metrics.dump(2) << "\n";
}

svt::IterationObserver debug_observer() {
    if (log_level() < 3) {
        return {};
    }
    return [](const svt::IterationRecord& rec, const svt::LowRankFactors& X) {
        LOG_DEBUG("it=%d rank=%lld shrunk=%lld residual=%.6g thr=%.6g mae=%.6g", rec.iter,
                  static_cast<long long>(rec.rank), static_cast<long long>(X.rank()),
                  rec.residual, rec.eps_threshold, rec.train_mae);
        return true;
    };
}

int finish_run(const json& man, const svt::SvtResult& result, json extra_metrics = {}) {
    const std::string prefix = man.at("outputs").at("prefix").get<std::string>();
    write_factors(result.factors, prefix);
    svt::write_trace_csv(result.trace, trace_csv_path(man));
    svt::write_trace_json(result.trace, prefix + ".trace.json");
    write_manifest(man);

    json metrics{{"iterations", result.trace.size()},
                 {"converged", result.converged},
                 {"final_rank", result.factors.rank()},
                 {"final_train_mae",
                  result.trace.empty() ? 0.0 : result.trace.back().train_mae}};
    if (!extra_metrics.is_null()) {
        metrics.update(extra_metrics);
    }
    write_metrics(metrics, prefix);

    LOG_INFO("%s: %zu iterations, final rank %lld, train MAE %.6g, %s",
             man.at("command").get<std::string>().c_str(), result.trace.size(),
             static_cast<long long>(result.factors.rank()),
             result.trace.empty() ? 0.0 : result.trace.back().train_mae,
             result.converged ? "converged" : "stopped at maxit");
    if (!result.converged) {
        LOG_ERROR("stop rule not reached within maxit; artifacts hold the best iterate");
        return kExitNotConverged;
    }
    return kExitOk;
}

int run_complete(const json& man) {
    const svt::SampledMatrix A = svt::read_matrix_market(man.at("input").at("path"));
    const svt::SvtResult result =
        svt::svt_run_backend(A, config_from_json(man.at("config")),
                             stop_from_json(man.at("stop")), backend_from_json(man),
                             debug_observer());
    return finish_run(man, result);
}

int run_image(const json& man) {
    const json& input = man.at("input");
    const std::uint64_t seed = man.at("config").at("seed").get<std::uint64_t>();

    svt::GrayImage original;
    if (input.at("kind") == "synthetic") {
        original = svt::synthetic_image(input.at("size").get<svt::Index>(),
                                        input.at("rank").get<svt::Index>(),
                                        svt::derive_seed(seed, kStreamImage));
    } else {
        original = svt::read_pgm(input.at("path").get<std::string>());
    }
    const double fraction = input.at("fraction").get<double>();
    const svt::SampledMatrix A =
        svt::sample_image(original, fraction, svt::derive_seed(seed, kStreamSampling));

    const svt::SvtResult result =
        svt::svt_run_backend(A, config_from_json(man.at("config")),
                             stop_from_json(man.at("stop")), backend_from_json(man),
                             debug_observer());

    // full-image MAE against the (always available) ground truth
    const svt::DenseBlock recon =
        result.factors.U * result.factors.sigma.asDiagonal() * result.factors.V.transpose();
    double mae = 0.0;
    for (svt::Index r = 0; r < original.height; ++r) {
        for (svt::Index c = 0; c < original.width; ++c) {
            mae += std::abs(static_cast<double>(original.at(r, c)) - recon(r, c));
        }
    }
    mae /= static_cast<double>(original.width) * static_cast<double>(original.height);

    const std::string prefix = man.at("outputs").at("prefix").get<std::string>();
    svt::write_pgm(svt::quantize_image(recon), prefix + ".recovered.pgm");
    if (input.at("kind") == "synthetic") {
        svt::write_pgm(original, prefix + ".original.pgm");
    }
    LOG_INFO("full-image MAE %.6g over %lldx%lld pixels", mae,
             static_cast<long long>(original.height), static_cast<long long>(original.width));
    return finish_run(man, result, json{{"full_image_mae", mae}});
}

int run_ratings(const json& man) {
    const json& input = man.at("input");
    const std::uint64_t seed = man.at("config").at("seed").get<std::uint64_t>();

    svt::RatingsDataset ds;
    if (input.at("kind") == "synthetic") {
        ds = svt::synthetic_ratings(input.at("users").get<svt::Index>(),
                                    input.at("items").get<svt::Index>(),
                                    input.at("rank").get<svt::Index>(),
                                    input.at("fill").get<double>(),
                                    input.at("noise").get<double>(),
                                    svt::derive_seed(seed, kStreamRatings));
    } else {
        ds = svt::read_ratings(input.at("path").get<std::string>(),
                               input.at("separator").get<std::string>());
    }
    const double train_fraction = input.at("train_fraction").get<double>();
    const auto [train, test] =
        svt::split_ratings(ds, train_fraction, svt::derive_seed(seed, kStreamSplit));
    LOG_INFO("%s", ds.provenance.c_str());
    LOG_INFO("split: %lld train / %lld test over %lld x %lld",
             static_cast<long long>(train.nnz()), static_cast<long long>(test.nnz()),
             static_cast<long long>(ds.users), static_cast<long long>(ds.items));

    const long long patience = man.at("extras").value("early_stop_patience", 0LL);
    std::vector<double> test_maes;
    double best_test = std::numeric_limits<double>::infinity();
    int best_iter = 0;
    const svt::IterationObserver observer = [&](const svt::IterationRecord& rec,
                                                const svt::LowRankFactors& X) {
        const double test_mae = svt::train_mae(test, X);
        test_maes.push_back(test_mae);
        if (test_mae < best_test) {
            best_test = test_mae;
            best_iter = rec.iter;
        }
        LOG_DEBUG("it=%d train=%.6g test=%.6g", rec.iter, rec.train_mae, test_mae);
        if (patience > 0 && rec.iter - best_iter >= patience) {
            LOG_INFO("early stop: test MAE has not improved for %lld iterations", patience);
            return false;
        }
        return true;
    };

    const svt::SvtResult result =
        svt::svt_run_backend(train, config_from_json(man.at("config")),
                             stop_from_json(man.at("stop")), backend_from_json(man), observer);

    const std::string prefix = man.at("outputs").at("prefix").get<std::string>();
    {
        std::ofstream out(prefix + ".test_mae.csv");
        out << "iter,train_mae,test_mae\n";
        char buf[96];
        for (std::size_t i = 0; i < result.trace.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", result.trace[i].iter,
                          result.trace[i].train_mae, test_maes[i]);
            out << buf;
        }
    }
    if (input.at("kind") != "synthetic") {
        std::ofstream users(prefix + ".users.tsv");
        for (std::size_t k = 0; k < ds.user_ids.size(); ++k) {
            users << k << "\t" << ds.user_ids[k] << "\n";
        }
        std::ofstream items(prefix + ".items.tsv");
        for (std::size_t k = 0; k < ds.item_ids.size(); ++k) {
            items << k << "\t" << ds.item_ids[k] << "\n";
        }
    }
    LOG_INFO("best test MAE %.6g at iteration %d", best_test, best_iter);
    return finish_run(man, result,
                      json{{"best_test_mae", best_test},
                           {"best_test_iter", best_iter},
                           {"final_test_mae", test_maes.empty() ? 0.0 : test_maes.back()}});
}

int run_bench(const json& man) {
    const json& extras = man.at("extras");
    const std::uint64_t seed = man.at("config").at("seed").get<std::uint64_t>();
    const std::string prefix = man.at("outputs").at("prefix").get<std::string>();
    const double fill = extras.at("fill").get<double>();
    const svt::Index rank = extras.at("rank").get<svt::Index>();

    // validate every backend name before any artifact is created
    for (const auto& be_j : extras.at("backends")) {
        json one = man;
        one["backend"] = be_j.get<std::string>();
        backend_from_json(one);
    }

    for (const auto& size_j : extras.at("sizes")) {
        const svt::Index size = size_j.get<svt::Index>();
        const svt::DenseBlock A =
            svt::make_low_rank(size, size, rank, svt::derive_seed(seed, kStreamBench + size));
        const svt::SampledMatrix S =
            svt::sample_dense(A, fill, svt::derive_seed(seed, kStreamBench + size + 1));

        svt::SvtConfig cfg = config_from_json(man.at("config"));
        svt::SvtConfig local = svt::default_config(S);  // data-dependent values per size
        local.maxit = cfg.maxit;
        local.np = cfg.np;
        local.eps_threshold0 = cfg.eps_threshold0;
        local.beta = cfg.beta;
        local.seed = cfg.seed;

        const std::string path = prefix + ".bench" + std::to_string(size) + ".csv";
        std::ofstream out(path);
        out << "iter,backend,svd_ms,rank\n";
        char buf[128];
        for (const auto& be_j : extras.at("backends")) {
            const std::string name = be_j.get<std::string>();
            json one = man;
            one["backend"] = name;
            const svt::SvtResult r = svt::svt_run_backend(
                S, local, stop_from_json(man.at("stop")), backend_from_json(one), {});
            for (const svt::IterationRecord& rec : r.trace) {
                std::snprintf(buf, sizeof(buf), "%d,%s,%.3f,%lld\n", rec.iter, name.c_str(),
                              rec.sketch_ms, static_cast<long long>(rec.rank));
                out << buf;
            }
            LOG_INFO("bench size=%lld backend=%s iters=%zu", static_cast<long long>(size),
                     name.c_str(), r.trace.size());
        }
    }
    write_manifest(man);
    return kExitOk;
}

int execute_manifest(const json& man) {
    const std::string command = man.at("command").get<std::string>();
    if (command == "complete") return run_complete(man);
    if (command == "image") return run_image(man);
    if (command == "ratings") return run_ratings(man);
    if (command == "bench") return run_bench(man);
    throw InputError("unknown command '" + command + "' in manifest");
}

json manifest_skeleton(const std::string& command, const SolverFlags& f) {
    json man;
    man["schema"] = "svt-run v1";
    man["command"] = command;
    man["backend"] = f.backend;
    man["fixed_rank"] = f.fixed_rank;
    man["threads"] = f.threads;
    man["outputs"] = json{{"prefix", f.out_prefix}};
    if (!f.trace_out.empty()) {
        man["outputs"]["trace_csv"] = f.trace_out;
    }
    man["extras"] = json::object();
    return man;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank matrix completion via singular value thresholding with "
                 "adaptive randomized partial SVD"};
    app.require_subcommand(0, 1);

    std::string manifest_path;
    app.add_option("--manifest", manifest_path,
                   "Re-execute a previously written run manifest");

    // complete
    SolverFlags complete_flags;
    std::string matrix_path;
    CLI::App* complete = app.add_subcommand("complete", "Complete a MatrixMarket matrix");
    complete->add_option("matrix", matrix_path, "MatrixMarket coordinate file")->required();
    add_solver_flags(complete, complete_flags);

    // image
    SolverFlags image_flags;
    std::string image_path;
    bool image_synthetic = false;
    long long image_size = 256, image_rank = 20;
    double image_fraction = 0.2;
    CLI::App* image = app.add_subcommand("image", "Recover an image from pixel samples");
    image->add_option("image", image_path, "PGM image (P5 or P2, maxval 255)");
    image->add_flag("--synthetic", image_synthetic, "Use a seeded synthetic low-rank image");
    image->add_option("--size", image_size, "Synthetic image size")->capture_default_str();
    image->add_option("--synthetic-rank", image_rank, "Synthetic image rank")
        ->capture_default_str();
    image->add_option("--fraction", image_fraction, "Observed pixel fraction")
        ->capture_default_str();
    add_solver_flags(image, image_flags);

    // ratings
    SolverFlags ratings_flags;
    std::string ratings_path, separator = "::";
    bool ratings_synthetic = false;
    long long users = 500, items = 400, ratings_rank = 5;
    double fill = 0.3, noise = 0.25, train_fraction = 0.8;
    long long patience = 0;
    CLI::App* ratings = app.add_subcommand("ratings", "Train/test a rating matrix completion");
    ratings->add_option("ratings", ratings_path, "Delimited rating triples file");
    ratings->add_option("--separator", separator, "Field separator")->capture_default_str();
    ratings->add_flag("--synthetic", ratings_synthetic, "Use seeded synthetic ratings");
    ratings->add_option("--users", users, "Synthetic user count")->capture_default_str();
    ratings->add_option("--items", items, "Synthetic item count")->capture_default_str();
    ratings->add_option("--synthetic-rank", ratings_rank, "Synthetic preference rank")
        ->capture_default_str();
    ratings->add_option("--fill", fill, "Synthetic observed-cell fraction")
        ->capture_default_str();
    ratings->add_option("--noise", noise, "Synthetic rating noise sigma")->capture_default_str();
    ratings->add_option("--train-fraction", train_fraction, "Training split fraction")
        ->capture_default_str();
    ratings->add_option("--early-stop-patience", patience,
                        "Stop when test MAE has not improved for this many iterations");
    add_solver_flags(ratings, ratings_flags);

    // bench
    SolverFlags bench_flags;
    std::vector<long long> sizes{256};
    std::vector<std::string> backends{"r4svd", "full-oracle"};
    double bench_fill = 0.2;
    long long bench_rank = 20;
    CLI::App* bench = app.add_subcommand("bench", "Per-iteration SVD timing comparison");
    bench->add_option("--sizes", sizes, "Square instance sizes")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--backends", backends, "Backends to time")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--fill", bench_fill, "Observed fraction")->capture_default_str();
    bench->add_option("--instance-rank", bench_rank, "True rank of the synthetic instance")
        ->capture_default_str();
    add_solver_flags(bench, bench_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!manifest_path.empty()) {
            std::ifstream in(manifest_path);
            if (!in) {
                throw InputError("cannot open manifest " + manifest_path);
            }
            json man = json::parse(in);
            return execute_manifest(man);
        }

        if (complete->parsed()) {
            // input first: a reader failure must not leave partial artifacts
            const svt::SampledMatrix A = svt::read_matrix_market(matrix_path);
            json man = manifest_skeleton("complete", complete_flags);
            man["input"] = json{{"kind", "file"}, {"path", matrix_path}};
            man["config"] = config_to_json(resolve_config(A, complete_flags));
            man["stop"] = resolve_stop(complete_flags, 0.1);
            return execute_manifest(man);
        }
        if (image->parsed()) {
            if (!image_synthetic && image_path.empty()) {
                throw InputError("image: give a PGM path or --synthetic");
            }
            if (image_synthetic && !image_path.empty()) {
                throw InputError("image: --synthetic and a PGM path are mutually exclusive");
            }
            json man = manifest_skeleton("image", image_flags);
            svt::GrayImage img;
            if (image_synthetic) {
                img = svt::synthetic_image(image_size, image_rank,
                                           svt::derive_seed(image_flags.seed, kStreamImage));
                man["input"] = json{{"kind", "synthetic"},
                                    {"size", image_size},
                                    {"rank", image_rank},
                                    {"fraction", image_fraction}};
            } else {
                img = svt::read_pgm(image_path);
                man["input"] =
                    json{{"kind", "file"}, {"path", image_path}, {"fraction", image_fraction}};
            }
            const svt::SampledMatrix A = svt::sample_image(
                img, image_fraction, svt::derive_seed(image_flags.seed, kStreamSampling));
            man["config"] = config_to_json(resolve_config(A, image_flags));
            man["stop"] = resolve_stop(image_flags, 1.0);
            return execute_manifest(man);
        }
        if (ratings->parsed()) {
            if (!ratings_synthetic && ratings_path.empty()) {
                throw InputError("ratings: give a triples path or --synthetic");
            }
            json man = manifest_skeleton("ratings", ratings_flags);
            svt::RatingsDataset ds;
            if (ratings_synthetic) {
                ds = svt::synthetic_ratings(users, items, ratings_rank, fill, noise,
                                            svt::derive_seed(ratings_flags.seed, kStreamRatings));
                man["input"] = json{{"kind", "synthetic"}, {"users", users},
                                    {"items", items},     {"rank", ratings_rank},
                                    {"fill", fill},       {"noise", noise},
                                    {"train_fraction", train_fraction}};
            } else {
                ds = svt::read_ratings(ratings_path, separator);
                man["input"] = json{{"kind", "file"},
                                    {"path", ratings_path},
                                    {"separator", separator},
                                    {"train_fraction", train_fraction}};
            }
            const auto [train, test] = svt::split_ratings(
                ds, train_fraction, svt::derive_seed(ratings_flags.seed, kStreamSplit));
            man["config"] = config_to_json(resolve_config(train, ratings_flags));
            man["stop"] = resolve_stop(ratings_flags, 0.1);
            man["extras"]["early_stop_patience"] = patience;
            return execute_manifest(man);
        }
        if (bench->parsed()) {
            json man = manifest_skeleton("bench", bench_flags);
            man["input"] = json{{"kind", "synthetic"}};
            svt::SvtConfig cfg;  // placeholders; per-size values resolved in run_bench
            cfg.tau = 1.0;
            cfg.delta = 1.0;
            cfg.maxit = bench_flags.maxit > 0 ? static_cast<int>(bench_flags.maxit) : 25;
            if (bench_flags.np >= 0) cfg.np = bench_flags.np;
            if (bench_flags.eps_threshold0 > 0.0) cfg.eps_threshold0 = bench_flags.eps_threshold0;
            if (bench_flags.beta > 0.0) cfg.beta = bench_flags.beta;
            cfg.seed = bench_flags.seed;
            man["config"] = config_to_json(cfg);
            man["stop"] = json{{"rule", "none"}, {"threshold", 0.0}};
            man["extras"] = json{{"sizes", sizes},
                                 {"backends", backends},
                                 {"fill", bench_fill},
                                 {"rank", bench_rank}};
            return execute_manifest(man);
        }

        std::fprintf(stderr, "%s", app.help().c_str());
        return kExitInput;
    } catch (const std::exception& e) {
        LOG_ERROR("%s", e.what());
        return kExitInput;
    }
}
