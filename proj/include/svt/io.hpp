#pragma once

#include "svt/dense.hpp"
#include "svt/sampled.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

// File formats: MatrixMarket coordinate (sparse) and array (dense), PGM
// images (P5/P2, maxval 255), and delimiter-separated rating triples.
// Byte-level examples live in FORMATS.md. Readers reject malformed input
// rather than repairing it; writers emit what the readers accept.

namespace svt {

// 8-bit grayscale image; pixel (r, c) = pixels[r * width + c].
struct GrayImage {
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(Index r, Index c) const {
        return pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(c)];
    }
};

// Rating triples with user/item ids remapped to dense [0, count) indices;
// user_ids/item_ids recover the original id of each dense index.
struct RatingsDataset {
    Index users = 0;
    Index items = 0;
    std::vector<Triplet> triples;  // (user index, item index, rating)
    std::vector<long long> user_ids;
    std::vector<long long> item_ids;
    std::string provenance;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_real(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": expected a number, got '" + token + "'");
    }
    if (pos != token.size()) {
        throw std::runtime_error(context + ": trailing characters in '" + token + "'");
    }
    if (!std::isfinite(v)) {
        throw std::runtime_error(context + ": non-finite value '" + token + "'");
    }
    return v;
}

inline long long parse_int(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(token, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": expected an integer, got '" + token + "'");
    }
    if (pos != token.size()) {
        throw std::runtime_error(context + ": trailing characters in '" + token + "'");
    }
    return v;
}

// Unbiased bounded draw via 128-bit multiply-shift; explicit so sample
// patterns reproduce across platforms (std::uniform_int_distribution is
// implementation-defined).
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n)) >> 64);
}

// First ns entries of a seeded partial Fisher-Yates shuffle of 0..total-1:
// uniform sample without replacement.
inline std::vector<std::uint64_t> sample_positions(std::uint64_t total, std::uint64_t ns,
                                                   std::uint64_t seed) {
    std::vector<std::uint64_t> idx(total);
    for (std::uint64_t i = 0; i < total; ++i) {
        idx[i] = i;
    }
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < ns; ++i) {
        const std::uint64_t j = i + bounded(rng, total - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(ns);
    return idx;
}

}  // namespace detail

// --- MatrixMarket ----------------------------------------------------------

// Reads a MatrixMarket `coordinate real general` file (1-based indices).
inline SampledMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_matrix_market: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_matrix_market: empty file " + path);
    }
    std::istringstream banner(detail::lower(line));
    std::string magic, object, format, field, symmetry;
    banner >> magic >> object >> format >> field >> symmetry;
    if (magic != "%%matrixmarket" || object != "matrix") {
        throw std::runtime_error("read_matrix_market: not a MatrixMarket matrix file: " + path);
    }
    if (format != "coordinate" || field != "real" || symmetry != "general") {
        throw std::runtime_error(
            "read_matrix_market: only 'coordinate real general' is supported, got '" + format +
            " " + field + " " + symmetry + "'");
    }
    // skip comments
    do {
        if (!std::getline(in, line)) {
            throw std::runtime_error("read_matrix_market: missing size line in " + path);
        }
    } while (!line.empty() && line[0] == '%');

    std::istringstream size_line(line);
    long long m = 0, n = 0, ns = 0;
    if (!(size_line >> m >> n >> ns) || m < 1 || n < 1 || ns < 1) {
        throw std::runtime_error("read_matrix_market: malformed size line '" + line + "'");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(ns));
    for (long long k = 0; k < ns; ++k) {
        std::string si, sj, sv;
        if (!(in >> si >> sj >> sv)) {
            throw std::runtime_error("read_matrix_market: expected " + std::to_string(ns) +
                                     " entries, file ended after " + std::to_string(k));
        }
        const std::string ctx = path + " entry " + std::to_string(k + 1);
        const long long i = detail::parse_int(si, ctx);
        const long long j = detail::parse_int(sj, ctx);
        const double v = detail::parse_real(sv, ctx);
        if (i < 1 || i > m || j < 1 || j > n) {
            throw std::runtime_error(ctx + ": index (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ") outside " + std::to_string(m) + "x" +
                                     std::to_string(n));
        }
        entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    }
    // duplicate detection is in the SampledMatrix constructor
    return SampledMatrix(static_cast<Index>(m), static_cast<Index>(n), std::move(entries));
}

// Writes coordinate real general, 1-based, values with 17 significant digits
// so a round trip is exact.
inline void write_matrix_market(const SampledMatrix& S, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_matrix_market: cannot open " + path);
    }
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << S.rows() << " " << S.cols() << " " << S.nnz() << "\n";
    char buf[64];
    const auto& offsets = S.row_offsets();
    const auto& cols = S.col_index();
    const auto& vals = S.values();
    for (Index i = 0; i < S.rows(); ++i) {
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", vals[k]);
            out << (i + 1) << " " << (cols[k] + 1) << " " << buf << "\n";
        }
    }
}

// Dense `array real general` companion, column-major per the format.
inline DenseBlock read_matrix_market_array(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_matrix_market_array: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_matrix_market_array: empty file " + path);
    }
    std::istringstream banner(detail::lower(line));
    std::string magic, object, format, field, symmetry;
    banner >> magic >> object >> format >> field >> symmetry;
    if (magic != "%%matrixmarket" || object != "matrix" || format != "array" ||
        field != "real" || symmetry != "general") {
        throw std::runtime_error("read_matrix_market_array: expected 'array real general' in " +
                                 path);
    }
    do {
        if (!std::getline(in, line)) {
            throw std::runtime_error("read_matrix_market_array: missing size line in " + path);
        }
    } while (!line.empty() && line[0] == '%');
    std::istringstream size_line(line);
    long long m = 0, n = 0;
    if (!(size_line >> m >> n) || m < 0 || n < 0) {
        throw std::runtime_error("read_matrix_market_array: malformed size line '" + line + "'");
    }
    DenseBlock X(m, n);
    for (long long j = 0; j < n; ++j) {
        for (long long i = 0; i < m; ++i) {
            std::string sv;
            if (!(in >> sv)) {
                throw std::runtime_error("read_matrix_market_array: file ended early in " + path);
            }
            X(i, j) = detail::parse_real(sv, path);
        }
    }
    return X;
}

inline void write_matrix_market_array(const DenseBlock& X, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_matrix_market_array: cannot open " + path);
    }
    out << "%%MatrixMarket matrix array real general\n";
    out << X.rows() << " " << X.cols() << "\n";
    char buf[64];
    for (Index j = 0; j < X.cols(); ++j) {
        for (Index i = 0; i < X.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
            out << buf << "\n";
        }
    }
}

// --- PGM images -------------------------------------------------------------

namespace detail {

// next token in a PGM header, skipping whitespace and '#' comments
inline std::string pgm_token(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') {
                c = in.get();
            }
        }
        c = in.get();
    }
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

}  // namespace detail

// Reads binary (P5) or ASCII (P2) PGM with maxval 255.
inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("read_pgm: cannot open " + path);
    }
    const std::string magic = detail::pgm_token(in);
    if (magic == "P6" || magic == "P3") {
        throw std::runtime_error("read_pgm: " + path +
                                 " is a color PPM; convert to 8-bit grayscale PGM first");
    }
    if (magic != "P5" && magic != "P2") {
        throw std::runtime_error("read_pgm: unsupported magic '" + magic + "' in " + path);
    }
    const long long w = detail::parse_int(detail::pgm_token(in), path + " width");
    const long long h = detail::parse_int(detail::pgm_token(in), path + " height");
    const long long maxval = detail::parse_int(detail::pgm_token(in), path + " maxval");
    if (w < 1 || h < 1) {
        throw std::runtime_error("read_pgm: bad dimensions in " + path);
    }
    if (maxval != 255) {
        throw std::runtime_error("read_pgm: only maxval 255 is supported, got " +
                                 std::to_string(maxval));
    }
    GrayImage img;
    img.width = static_cast<Index>(w);
    img.height = static_cast<Index>(h);
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    img.pixels.resize(count);
    if (magic == "P5") {
        // exactly one whitespace byte separates the header from the raster
        in.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) {
            throw std::runtime_error("read_pgm: truncated raster in " + path);
        }
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            const long long v = detail::parse_int(detail::pgm_token(in), path + " pixel");
            if (v < 0 || v > 255) {
                throw std::runtime_error("read_pgm: pixel value out of range in " + path);
            }
            img.pixels[k] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

// Writes binary P5, maxval 255.
inline void write_pgm(const GrayImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) *
                                 static_cast<std::size_t>(img.height)) {
        throw std::invalid_argument("write_pgm: malformed image");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_pgm: cannot open " + path);
    }
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

// Uniform sample of exactly floor(fraction * w * h) distinct pixels, drawn
// without replacement. The image maps to a height x width matrix.
inline SampledMatrix sample_image(const GrayImage& img, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("sample_image: fraction must lie in (0, 1]");
    }
    const std::uint64_t total =
        static_cast<std::uint64_t>(img.width) * static_cast<std::uint64_t>(img.height);
    // epsilon guards the floor against 0.2 * N style binary round-down
    const std::uint64_t ns =
        static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
    if (ns < 1) {
        throw std::invalid_argument("sample_image: fraction selects no pixels");
    }
    std::vector<Triplet> entries;
    entries.reserve(ns);
    for (std::uint64_t pos : detail::sample_positions(total, ns, seed)) {
        const Index r = static_cast<Index>(pos / static_cast<std::uint64_t>(img.width));
        const Index c = static_cast<Index>(pos % static_cast<std::uint64_t>(img.width));
        entries.push_back({r, c, static_cast<double>(img.at(r, c))});
    }
    return SampledMatrix(img.height, img.width, std::move(entries));
}

// Rounds and clamps a dense reconstruction back into an 8-bit image.
inline GrayImage quantize_image(const DenseBlock& X) {
    GrayImage img;
    img.height = X.rows();
    img.width = X.cols();
    img.pixels.resize(static_cast<std::size_t>(X.size()));
    for (Index r = 0; r < X.rows(); ++r) {
        for (Index c = 0; c < X.cols(); ++c) {
            const double v = std::round(X(r, c));
            img.pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(img.width) +
                       static_cast<std::size_t>(c)] =
                static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return img;
}

// --- ratings ----------------------------------------------------------------

// Reads "user SEP item SEP rating[ SEP timestamp]" lines; timestamps are
// ignored. User and item ids are remapped to dense indices in order of first
// appearance; the mapping is kept in the dataset.
inline RatingsDataset read_ratings(const std::string& path, const std::string& separator = "::") {
    if (separator.empty()) {
        throw std::invalid_argument("read_ratings: separator must be non-empty");
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_ratings: cannot open " + path);
    }
    RatingsDataset ds;
    std::unordered_map<long long, Index> user_index;
    std::unordered_map<long long, Index> item_index;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t at = line.find(separator, start);
            if (at == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, at - start));
            start = at + separator.size();
        }
        if (fields.size() < 3) {
            throw std::runtime_error("read_ratings: line " + std::to_string(line_no) +
                                     " has fewer than 3 fields");
        }
        const std::string ctx = path + " line " + std::to_string(line_no);
        const long long user = detail::parse_int(fields[0], ctx);
        const long long item = detail::parse_int(fields[1], ctx);
        const double rating = detail::parse_real(fields[2], ctx);

        auto [uit, unew] = user_index.try_emplace(user, static_cast<Index>(ds.user_ids.size()));
        if (unew) {
            ds.user_ids.push_back(user);
        }
        auto [iit, inew] = item_index.try_emplace(item, static_cast<Index>(ds.item_ids.size()));
        if (inew) {
            ds.item_ids.push_back(item);
        }
        ds.triples.push_back({uit->second, iit->second, rating});
        lo = std::min(lo, rating);
        hi = std::max(hi, rating);
    }
    if (ds.triples.empty()) {
        throw std::runtime_error("read_ratings: no ratings in " + path);
    }
    ds.users = static_cast<Index>(ds.user_ids.size());
    ds.items = static_cast<Index>(ds.item_ids.size());
    // duplicate (user, item) pairs are rejected; rating range is recorded,
    // not enforced
    {
        std::vector<std::pair<Index, Index>> seen;
        seen.reserve(ds.triples.size());
        for (const Triplet& t : ds.triples) {
            seen.emplace_back(t.row, t.col);
        }
        std::sort(seen.begin(), seen.end());
        const auto dup = std::adjacent_find(seen.begin(), seen.end());
        if (dup != seen.end()) {
            throw std::runtime_error("read_ratings: duplicate rating for user id " +
                                     std::to_string(ds.user_ids[dup->first]) + ", item id " +
                                     std::to_string(ds.item_ids[dup->second]));
        }
    }
    char note[160];
    std::snprintf(note, sizeof(note), "%s: %zu ratings, %lld users, %lld items, range [%g, %g]",
                  path.c_str(), ds.triples.size(), static_cast<long long>(ds.users),
                  static_cast<long long>(ds.items), lo, hi);
    ds.provenance = note;
    return ds;
}

// Disjoint uniform split of the triples into train/test within the same
// m x n frame; train gets floor(train_fraction * ns) triples.
inline std::pair<SampledMatrix, SampledMatrix> split_ratings(const RatingsDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split_ratings: train_fraction must lie in (0, 1)");
    }
    const std::uint64_t ns = ds.triples.size();
    const std::uint64_t n_train = static_cast<std::uint64_t>(
        std::floor(train_fraction * static_cast<double>(ns) + 1e-9));
    if (n_train < 1 || n_train >= ns) {
        throw std::invalid_argument("split_ratings: split leaves an empty side");
    }
    std::vector<std::uint64_t> order = detail::sample_positions(ns, ns, seed);
    std::vector<Triplet> train, test;
    train.reserve(n_train);
    test.reserve(ns - n_train);
    for (std::uint64_t k = 0; k < ns; ++k) {
        (k < n_train ? train : test).push_back(ds.triples[order[k]]);
    }
    return {SampledMatrix(ds.users, ds.items, std::move(train)),
            SampledMatrix(ds.users, ds.items, std::move(test))};
}

}  // namespace svt
