#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/dataset.hpp"
#include "sdae/fileio.hpp"
#include "sdae/network.hpp"
#include "sdae/pgm.hpp"
#include "sdae/sgd.hpp"

namespace sdae {

// ---------------------------------------------------------------------------
// Tiled image grids (filter and reconstruction visualization)
// ---------------------------------------------------------------------------

// Min-max normalization of one tile to [0,255]; a constant tile maps to
// mid-gray 128.
inline std::vector<std::uint8_t> normalize_tile(const double* src, std::size_t len) {
    double lo = src[0], hi = src[0];
    for (std::size_t i = 1; i < len; ++i) {
        lo = std::min(lo, src[i]);
        hi = std::max(hi, src[i]);
    }
    std::vector<std::uint8_t> out(len);
    if (hi == lo) {
        std::fill(out.begin(), out.end(), std::uint8_t(128));
        return out;
    }
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < len; ++i)
        out[i] = static_cast<std::uint8_t>(std::lround((src[i] - lo) * scale));
    return out;
}

// Tiles laid out row-major with 1-pixel black separators; empty cells stay
// black. Output is (rows*(h+1)+1) x (cols*(w+1)+1).
inline PgmImage render_grid(const std::vector<std::vector<std::uint8_t>>& tiles,
                            std::size_t tile_w, std::size_t tile_h, std::size_t grid_rows,
                            std::size_t grid_cols) {
    require(tiles.size() <= grid_rows * grid_cols, "render_grid: too many tiles");
    PgmImage img;
    img.width = grid_cols * (tile_w + 1) + 1;
    img.height = grid_rows * (tile_h + 1) + 1;
    img.pixels.assign(img.width * img.height, 0);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        require(tiles[t].size() == tile_w * tile_h, "render_grid: tile size mismatch");
        const std::size_t gr = t / grid_cols;
        const std::size_t gc = t % grid_cols;
        const std::size_t y0 = gr * (tile_h + 1) + 1;
        const std::size_t x0 = gc * (tile_w + 1) + 1;
        for (std::size_t r = 0; r < tile_h; ++r)
            std::copy(tiles[t].begin() + std::ptrdiff_t(r * tile_w),
                      tiles[t].begin() + std::ptrdiff_t((r + 1) * tile_w),
                      img.pixels.begin() + std::ptrdiff_t((y0 + r) * img.width + x0));
    }
    return img;
}

// Resolves the tile shape for a layer whose rows are rendered as images.
inline std::pair<std::size_t, std::size_t> filter_tile_shape(std::size_t input_count,
                                                             std::size_t width_hint,
                                                             std::size_t height_hint) {
    if (width_hint && height_hint) {
        require(width_hint * height_hint == input_count,
                "filter shape does not match input dimension");
        return {width_hint, height_hint};
    }
    const std::size_t side = std::size_t(std::lround(std::sqrt(double(input_count))));
    if (side * side != input_count)
        throw DataError("input dimension " + std::to_string(input_count) +
                        " is not square; pass an explicit filter width/height");
    return {side, side};
}

// First `count` rows of W, each min-max normalized independently, tiled
// into a near-square PGM grid.
inline void export_filters(const DenseTiedLayer& layer, std::size_t count,
                           const std::string& path, std::size_t width_hint = 0,
                           std::size_t height_hint = 0) {
    require(count >= 1 && count <= layer.hidden_count(),
            "export_filters: count exceeds hidden units");
    const auto [tw, th] = filter_tile_shape(layer.input_count(), width_hint, height_hint);
    const std::size_t grid_cols = std::size_t(std::ceil(std::sqrt(double(count))));
    const std::size_t grid_rows = (count + grid_cols - 1) / grid_cols;
    std::vector<std::vector<std::uint8_t>> tiles;
    tiles.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        tiles.push_back(normalize_tile(layer.W.data.data() + i * layer.input_count(),
                                       layer.input_count()));
    write_pgm(render_grid(tiles, tw, th, grid_rows, grid_cols), path);
}

// Three grid rows per example block: original, corrupted, reconstruction.
inline void export_reconstructions(const StackedAutoencoder& net,
                                   const std::vector<Vector>& examples,
                                   std::size_t width, std::size_t height,
                                   const CorruptionSpec& corruption, std::uint64_t seed,
                                   const std::string& path, ThreadPool& pool) {
    require(!net.layers.empty(), "export_reconstructions: model has no layers");
    require(!examples.empty(), "export_reconstructions: no examples");
    require(width * height == net.layers.front().input_count(),
            "export_reconstructions: image shape does not match model input");
    const std::size_t cols = examples.size();
    std::vector<std::vector<std::uint8_t>> tiles(3 * cols);
    for (std::size_t i = 0; i < cols; ++i) {
        RandomStream rng(derive_key(seed, StreamTag::reconstruct, i));
        const Vector corrupted = corrupt(examples[i], corruption, rng);
        const Vector recon = net.reconstruct(corrupted, pool);
        tiles[i] = normalize_tile(examples[i].data(), examples[i].size());
        tiles[cols + i] = normalize_tile(corrupted.data(), corrupted.size());
        tiles[2 * cols + i] = normalize_tile(recon.data(), recon.size());
    }
    write_pgm(render_grid(tiles, width, height, 3, cols), path);
}

// ---------------------------------------------------------------------------
// Sparse feature export (the format the external classifiers of the paper
// consume): one line per example, `<label> <index>:<value> ...`, 1-based
// indices, entries with |value| <= 1e-6 dropped, 6 significant digits.
// ---------------------------------------------------------------------------

inline void export_encoded(const StackedAutoencoder& net, const ImageDataset& ds,
                           const std::string& path, ThreadPool& pool) {
    require(!net.layers.empty(), "export_encoded: model has no layers");
    atomic_write(path, [&](std::ostream& out) {
        char buf[64];
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Vector f = net.encode(ds.images[i], pool);
            out << ds.labels[i];
            for (std::size_t j = 0; j < f.size(); ++j) {
                if (std::fabs(f[j]) <= 1e-6) continue;
                std::snprintf(buf, sizeof buf, " %zu:%.6g", j + 1, f[j]);
                out << buf;
            }
            out << '\n';
        }
    });
}

struct SparseFeatures {
    std::vector<Vector> features;
    std::vector<int> labels;
};

inline SparseFeatures parse_sparse_features(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    SparseFeatures out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int label;
        if (!(ss >> label)) throw DataError("malformed feature line in " + path);
        Vector f(dim, 0.0);
        std::string tok;
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw DataError("malformed feature entry in " + path);
            const std::size_t idx = std::stoul(tok.substr(0, colon));
            if (idx < 1 || idx > dim) throw DataError("feature index out of range in " + path);
            f[idx - 1] = std::stod(tok.substr(colon + 1));
        }
        out.features.push_back(std::move(f));
        out.labels.push_back(label);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in softmax-regression evaluator (per-example SGD, delta = z - t)
// ---------------------------------------------------------------------------

inline double softmax_regression_eval(const std::vector<Vector>& train_x,
                                      const std::vector<int>& train_y,
                                      const std::vector<Vector>& test_x,
                                      const std::vector<int>& test_y, int epochs,
                                      double eta, std::size_t classes = 10) {
    require(!train_x.empty() && !test_x.empty(), "softmax_regression_eval: empty data");
    require(train_x.size() == train_y.size() && test_x.size() == test_y.size(),
            "softmax_regression_eval: feature/label count mismatch");
    const std::size_t dim = train_x.front().size();

    Matrix W(classes, dim, 0.0);
    Vector b(classes, 0.0);
    Vector net(classes), delta(classes);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = 0; i < train_x.size(); ++i) {
            const Vector& x = train_x[i];
            require(x.size() == dim, "softmax_regression_eval: inconsistent dimensions");
            for (std::size_t c = 0; c < classes; ++c) {
                const double* row = W.data.data() + c * dim;
                double acc = b[c];
                for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[j];
                net[c] = acc;
            }
            const Vector z = softmax_vec(net);
            for (std::size_t c = 0; c < classes; ++c)
                delta[c] = z[c] - (std::size_t(train_y[i]) == c ? 1.0 : 0.0);
            for (std::size_t c = 0; c < classes; ++c) {
                double* row = W.data.data() + c * dim;
                const double step = eta * delta[c];
                for (std::size_t j = 0; j < dim; ++j) row[j] -= step * x[j];
                b[c] -= step;
            }
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_x.size(); ++i) {
        const Vector& x = test_x[i];
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes; ++c) {
            const double* row = W.data.data() + c * dim;
            double acc = b[c];
            for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[j];
            if (acc > best_score) {
                best_score = acc;
                best = c;
            }
        }
        if (int(best) == test_y[i]) ++correct;
    }
    return double(correct) / double(test_x.size());
}

// Fraction of examples the classifier head gets right.
inline double accuracy(const StackedAutoencoder& net, const ImageDataset& ds,
                       ThreadPool& pool) {
    require(net.has_head(), "accuracy: classifier head missing");
    require(!ds.images.empty(), "accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (classify(net, ds.images[i], pool) == ds.labels[i]) ++correct;
    return double(correct) / double(ds.size());
}

}  // namespace sdae
