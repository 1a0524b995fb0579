#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/fileio.hpp"
#include "sdae/linalg.hpp"
#include "sdae/rng.hpp"
#include "sdae/thread_pool.hpp"

namespace sdae {

// Tied autoencoder layer: encode y = s(Wx + b), decode z = s(W^T y + b').
// W is hidden_count x input_count; the decode stage reuses W through
// transposed indexing and is never stored separately.
struct DenseTiedLayer {
    Matrix W;        // n x m
    Vector b;        // n, encode bias
    Vector b_prime;  // m, decode bias

    DenseTiedLayer() = default;
    DenseTiedLayer(std::size_t m, std::size_t n)
        : W(n, m), b(n, 0.0), b_prime(m, 0.0) {}

    std::size_t input_count() const { return W.cols; }
    std::size_t hidden_count() const { return W.rows; }
    std::size_t param_count() const { return W.rows * W.cols + W.rows + W.cols; }
};

// Non-owning view over tied-layer parameters laid out in flatten order
// (W row-major, then b, then b'). Lets the GA run gradient steps directly
// on genome storage without copying.
template <typename T>
struct BasicLayerView {
    T* w;
    T* b;
    T* b_prime;
    std::size_t m;
    std::size_t n;

    operator BasicLayerView<const T>() const { return {w, b, b_prime, m, n}; }
};

using LayerView = BasicLayerView<double>;
using ConstLayerView = BasicLayerView<const double>;

inline LayerView view_of(DenseTiedLayer& L) {
    return {L.W.data.data(), L.b.data(), L.b_prime.data(), L.input_count(), L.hidden_count()};
}

inline ConstLayerView view_of(const DenseTiedLayer& L) {
    return {L.W.data.data(), L.b.data(), L.b_prime.data(), L.input_count(), L.hidden_count()};
}

inline std::size_t genome_length(std::size_t m, std::size_t n) { return n * m + n + m; }

// Views a flat genome (flatten_params layout) as a layer.
inline LayerView genome_view(Vector& genome, std::size_t m, std::size_t n) {
    require(genome.size() == genome_length(m, n), "genome length mismatch");
    return {genome.data(), genome.data() + n * m, genome.data() + n * m + n, m, n};
}

inline ConstLayerView genome_view(const Vector& genome, std::size_t m, std::size_t n) {
    require(genome.size() == genome_length(m, n), "genome length mismatch");
    return {genome.data(), genome.data() + n * m, genome.data() + n * m + n, m, n};
}

// Weights and biases uniform in [-1/sqrt(FANIN), 1/sqrt(FANIN)], FANIN = m.
inline DenseTiedLayer init_layer(std::size_t m, std::size_t n, RandomStream& rng) {
    require(m >= 1 && n >= 1, "init_layer: counts must be >= 1");
    DenseTiedLayer L(m, n);
    const double r = 1.0 / std::sqrt(double(m));
    for (double& v : L.W.data) v = rng.next_symmetric(r);
    for (double& v : L.b) v = rng.next_symmetric(r);
    for (double& v : L.b_prime) v = rng.next_symmetric(r);
    return L;
}

inline Vector flatten_params(const DenseTiedLayer& L) {
    Vector g;
    g.reserve(L.param_count());
    g.insert(g.end(), L.W.data.begin(), L.W.data.end());
    g.insert(g.end(), L.b.begin(), L.b.end());
    g.insert(g.end(), L.b_prime.begin(), L.b_prime.end());
    return g;
}

inline void unflatten_params(DenseTiedLayer& L, const Vector& genome) {
    require(genome.size() == L.param_count(), "unflatten_params: genome length mismatch");
    const std::size_t nm = L.W.rows * L.W.cols;
    std::copy(genome.begin(), genome.begin() + nm, L.W.data.begin());
    std::copy(genome.begin() + nm, genome.begin() + nm + L.b.size(), L.b.begin());
    std::copy(genome.begin() + nm + L.b.size(), genome.end(), L.b_prime.begin());
}

// Scratch buffers for forward/backward passes; shapes follow the layer.
struct GradientWorkspace {
    Vector y;        // hidden activations
    Vector z;        // reconstruction
    Vector delta_o;  // output-layer deltas
    Vector delta_h;  // hidden-layer deltas

    void ensure(std::size_t m, std::size_t n) {
        y.resize(n);
        z.resize(m);
        delta_o.resize(m);
        delta_h.resize(n);
    }
};

inline void encode(ConstLayerView L, const double* x, double* y, ThreadPool& pool) {
    kernels::matvec(L.w, L.n, L.m, x, y, pool);
    for (std::size_t k = 0; k < L.n; ++k) y[k] = sigmoid(y[k] + L.b[k]);
}

inline void decode(ConstLayerView L, const double* y, double* z, ThreadPool& pool) {
    kernels::matvec_transposed(L.w, L.n, L.m, y, z, pool);
    for (std::size_t j = 0; j < L.m; ++j) z[j] = sigmoid(z[j] + L.b_prime[j]);
}

inline Vector encode(const DenseTiedLayer& L, const Vector& x, ThreadPool& pool) {
    require(x.size() == L.input_count(), "encode: input length mismatch");
    Vector y(L.hidden_count());
    encode(view_of(L), x.data(), y.data(), pool);
    return y;
}

inline Vector decode(const DenseTiedLayer& L, const Vector& y, ThreadPool& pool) {
    require(y.size() == L.hidden_count(), "decode: hidden length mismatch");
    Vector z(L.input_count());
    decode(view_of(L), y.data(), z.data(), pool);
    return z;
}

inline double squared_loss(const Vector& t, const Vector& z) {
    require(t.size() == z.size(), "squared_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = t[i] - z[i];
        acc += d * d;
    }
    return 0.5 * acc;
}

inline double cross_entropy_loss(const Vector& t, const Vector& z) {
    require(t.size() == z.size(), "cross_entropy_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double zi = std::clamp(z[i], 1e-12, 1.0 - 1e-12);
        acc -= t[i] * std::log(zi) + (1.0 - t[i]) * std::log(1.0 - zi);
    }
    return acc;
}

enum class UpdateMode {
    // Output update applied to the tied weights before the hidden deltas are
    // computed, so delta_H sees the already-updated W (the paper's loop
    // order). The default everywhere.
    sequential,
    // Both delta sets computed from the pre-update W; the applied step is
    // then the exact gradient of the fixed reconstruction objective, which
    // is what finite differences can check.
    simultaneous,
};

// One denoising gradient step on a tied layer: forward on x_corr, squared
// loss against the clean target t, then the output-side and hidden-side
// updates. Returns the loss measured before the update.
inline double tied_gradient_step(LayerView L, const Vector& x_corr, const Vector& t,
                                 double eta, GradientWorkspace& ws, ThreadPool& pool,
                                 UpdateMode mode = UpdateMode::sequential) {
    require(x_corr.size() == L.m && t.size() == L.m, "tied_gradient_step: length mismatch");
    ws.ensure(L.m, L.n);

    encode(L, x_corr.data(), ws.y.data(), pool);
    decode(L, ws.y.data(), ws.z.data(), pool);

    double loss = 0.0;
    for (std::size_t j = 0; j < L.m; ++j) {
        const double d = t[j] - ws.z[j];
        loss += d * d;
        ws.delta_o[j] = (ws.z[j] - t[j]) * ws.z[j] * (1.0 - ws.z[j]);
    }
    loss *= 0.5;

    auto compute_delta_h = [&] {
        // delta_H_k = (sum_j delta_O_j * W_kj) * y_k * (1 - y_k)
        kernels::matvec(L.w, L.n, L.m, ws.delta_o.data(), ws.delta_h.data(), pool);
        for (std::size_t k = 0; k < L.n; ++k)
            ws.delta_h[k] *= ws.y[k] * (1.0 - ws.y[k]);
    };

    if (mode == UpdateMode::simultaneous) compute_delta_h();

    // Output-side update, through transposed indices on the tied store:
    // W_kj -= eta * delta_O_j * y_k, plus the decode bias.
    kernels::rank1_update(L.w, L.n, L.m, -eta, ws.delta_o.data(), ws.y.data(),
                          /*transposed=*/true, pool);
    for (std::size_t j = 0; j < L.m; ++j) L.b_prime[j] -= eta * ws.delta_o[j];

    if (mode == UpdateMode::sequential) compute_delta_h();

    // Hidden-side update: W_kj -= eta * delta_H_k * x_j, plus encode bias.
    kernels::rank1_update(L.w, L.n, L.m, -eta, ws.delta_h.data(), x_corr.data(),
                          /*transposed=*/false, pool);
    for (std::size_t k = 0; k < L.n; ++k) L.b[k] -= eta * ws.delta_h[k];

    return loss;
}

inline double tied_gradient_step(DenseTiedLayer& L, const Vector& x_corr, const Vector& t,
                                 double eta, GradientWorkspace& ws, ThreadPool& pool,
                                 UpdateMode mode = UpdateMode::sequential) {
    return tied_gradient_step(view_of(L), x_corr, t, eta, ws, pool, mode);
}

// Analytic gradient of squared_loss(t, decode(encode(x_corr))) with respect
// to every parameter, in flatten order. Also returns the loss.
inline double tied_gradient(ConstLayerView L, const Vector& x_corr, const Vector& t,
                            Vector& grad, GradientWorkspace& ws, ThreadPool& pool) {
    require(x_corr.size() == L.m && t.size() == L.m, "tied_gradient: length mismatch");
    ws.ensure(L.m, L.n);
    grad.assign(genome_length(L.m, L.n), 0.0);

    encode(L, x_corr.data(), ws.y.data(), pool);
    decode(L, ws.y.data(), ws.z.data(), pool);

    double loss = 0.0;
    for (std::size_t j = 0; j < L.m; ++j) {
        const double d = t[j] - ws.z[j];
        loss += d * d;
        ws.delta_o[j] = (ws.z[j] - t[j]) * ws.z[j] * (1.0 - ws.z[j]);
    }
    loss *= 0.5;

    kernels::matvec(L.w, L.n, L.m, ws.delta_o.data(), ws.delta_h.data(), pool);
    for (std::size_t k = 0; k < L.n; ++k) ws.delta_h[k] *= ws.y[k] * (1.0 - ws.y[k]);

    LayerView g = genome_view(grad, L.m, L.n);
    kernels::rank1_update(g.w, L.n, L.m, 1.0, ws.delta_o.data(), ws.y.data(), true, pool);
    kernels::rank1_update(g.w, L.n, L.m, 1.0, ws.delta_h.data(), x_corr.data(), false, pool);
    for (std::size_t k = 0; k < L.n; ++k) g.b[k] = ws.delta_h[k];
    for (std::size_t j = 0; j < L.m; ++j) g.b_prime[j] = ws.delta_o[j];
    return loss;
}

// ---------------------------------------------------------------------------
// Stacked network with optional classifier head
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix W;  // out x in
    Vector b;  // out
};

inline DenseLayer init_dense_layer(std::size_t in, std::size_t out, RandomStream& rng) {
    DenseLayer L{Matrix(out, in), Vector(out, 0.0)};
    const double r = 1.0 / std::sqrt(double(in));
    for (double& v : L.W.data) v = rng.next_symmetric(r);
    for (double& v : L.b) v = rng.next_symmetric(r);
    return L;
}

enum class HeadKind : std::uint32_t {
    squared_sigmoid = 0,
    crossentropy_softmax = 1,
};

struct StackedAutoencoder {
    std::vector<DenseTiedLayer> layers;
    std::vector<DenseLayer> head;
    HeadKind head_kind = HeadKind::squared_sigmoid;

    bool has_head() const { return !head.empty(); }

    // Uncorrupted encoding through every tied layer.
    Vector encode(const Vector& x, ThreadPool& pool) const {
        Vector a = x;
        for (const DenseTiedLayer& L : layers) a = sdae::encode(L, a, pool);
        return a;
    }

    // Encode through the stack, decode back through it in reverse.
    Vector reconstruct(const Vector& x, ThreadPool& pool) const {
        Vector a = encode(x, pool);
        for (auto it = layers.rbegin(); it != layers.rend(); ++it)
            a = sdae::decode(*it, a, pool);
        return a;
    }

    // Class scores: stack encodings fed through the head. The last head
    // layer is softmax under crossentropy_softmax, sigmoid otherwise.
    Vector forward_full(const Vector& x, ThreadPool& pool) const {
        require(has_head(), "forward_full: classifier head missing");
        Vector a = encode(x, pool);
        for (std::size_t i = 0; i < head.size(); ++i) {
            Vector net = matvec(head[i].W, a, pool);
            for (std::size_t k = 0; k < net.size(); ++k) net[k] += head[i].b[k];
            const bool last = (i + 1 == head.size());
            if (last && head_kind == HeadKind::crossentropy_softmax)
                a = softmax_vec(net);
            else
                a = sigmoid_vec(std::move(net));
        }
        return a;
    }
};

// ---------------------------------------------------------------------------
// Model persistence: "SDAE" magic, u32 header fields, then little-endian
// f64 parameter blocks in flatten order.
// ---------------------------------------------------------------------------

constexpr char kModelMagic[4] = {'S', 'D', 'A', 'E'};
constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const StackedAutoencoder& net, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) {
        out.write(kModelMagic, 4);
        detail::put_u32_le(out, kModelVersion);
        detail::put_u32_le(out, static_cast<std::uint32_t>(net.layers.size()));
        for (const DenseTiedLayer& L : net.layers) {
            detail::put_u32_le(out, static_cast<std::uint32_t>(L.input_count()));
            detail::put_u32_le(out, static_cast<std::uint32_t>(L.hidden_count()));
        }
        detail::put_u32_le(out, static_cast<std::uint32_t>(net.head.size()));
        for (const DenseLayer& L : net.head) {
            detail::put_u32_le(out, static_cast<std::uint32_t>(L.W.cols));
            detail::put_u32_le(out, static_cast<std::uint32_t>(L.W.rows));
        }
        detail::put_u32_le(out, static_cast<std::uint32_t>(net.head_kind));
        for (const DenseTiedLayer& L : net.layers) {
            for (double v : L.W.data) detail::put_f64_le(out, v);
            for (double v : L.b) detail::put_f64_le(out, v);
            for (double v : L.b_prime) detail::put_f64_le(out, v);
        }
        for (const DenseLayer& L : net.head) {
            for (double v : L.W.data) detail::put_f64_le(out, v);
            for (double v : L.b) detail::put_f64_le(out, v);
        }
    });
}

inline StackedAutoencoder load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kModelMagic, 4))
        throw DataError("bad model magic in " + path);
    const std::uint32_t version = detail::get_u32_le(in, "model version");
    if (version != kModelVersion)
        throw DataError("unsupported model version in " + path);

    StackedAutoencoder net;
    const std::uint32_t n_layers = detail::get_u32_le(in, "layer count");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const std::uint32_t m = detail::get_u32_le(in, "layer m");
        const std::uint32_t n = detail::get_u32_le(in, "layer n");
        dims.emplace_back(m, n);
    }
    const std::uint32_t n_head = detail::get_u32_le(in, "head count");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> head_dims;
    for (std::uint32_t i = 0; i < n_head; ++i) {
        const std::uint32_t hin = detail::get_u32_le(in, "head in");
        const std::uint32_t hout = detail::get_u32_le(in, "head out");
        head_dims.emplace_back(hin, hout);
    }
    const std::uint32_t kind = detail::get_u32_le(in, "head kind");
    if (kind > 1) throw DataError("bad head kind in " + path);
    net.head_kind = static_cast<HeadKind>(kind);

    for (auto [m, n] : dims) {
        DenseTiedLayer L(m, n);
        for (double& v : L.W.data) v = detail::get_f64_le(in, "layer weights");
        for (double& v : L.b) v = detail::get_f64_le(in, "layer bias");
        for (double& v : L.b_prime) v = detail::get_f64_le(in, "layer decode bias");
        net.layers.push_back(std::move(L));
    }
    for (auto [hin, hout] : head_dims) {
        DenseLayer L{Matrix(hout, hin), Vector(hout, 0.0)};
        for (double& v : L.W.data) v = detail::get_f64_le(in, "head weights");
        for (double& v : L.b) v = detail::get_f64_le(in, "head bias");
        net.head.push_back(std::move(L));
    }
    return net;
}

}  // namespace sdae
