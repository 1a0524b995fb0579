#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/dataset.hpp"
#include "sdae/fileio.hpp"
#include "sdae/network.hpp"
#include "sdae/rng.hpp"
#include "sdae/thread_pool.hpp"

namespace sdae {

struct SgdConfig {
    double learning_rate = 0.001;
    int epochs = 15;
    CorruptionSpec corruption{CorruptionKind::masking, 0.25};
    unsigned threads = 0;  // 0 = machine logical cores
    std::uint64_t seed = 1;
    bool shuffle = true;
};

inline unsigned effective_threads(unsigned requested) {
    return requested ? requested : ThreadPool::hardware_threads();
}

// Per-epoch (epoch, cumulative wall seconds, summed reconstruction error).
struct RunRecord {
    struct Row {
        int epoch;
        double seconds;
        double error;
    };
    std::vector<Row> rows;

    double final_error() const { return rows.empty() ? 0.0 : rows.back().error; }

    void write_csv(const std::string& path) const {
        atomic_write(path, [&](std::ostream& out) {
            out << "epoch,seconds,error\n";
            char buf[96];
            for (const Row& r : rows) {
                std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g\n", r.epoch, r.seconds, r.error);
                out << buf;
            }
        });
    }
};

// Fisher-Yates permutation of [0, n) drawn from one keyed stream.
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                                  int epoch, bool shuffle) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!shuffle) return order;
    RandomStream rng(derive_key(seed, StreamTag::shuffle, std::uint64_t(epoch)));
    for (std::size_t k = n; k > 1; --k)
        std::swap(order[k - 1], order[rng.next_below(k)]);
    return order;
}

// Corruption stream for one (epoch, example) visit. Keyed by the example's
// original index so the mask is independent of shuffle order, and shared
// with the GA trainers so hybrid runs see identical corruption.
inline RandomStream corruption_stream(std::uint64_t seed, int epoch, std::size_t example) {
    return RandomStream(derive_key(seed, StreamTag::corrupt, std::uint64_t(epoch), example));
}

// Test hook: called once per visited example with the corrupted input and
// the layer state *before* the update.
using StepObserver = std::function<void(int epoch, std::size_t example, const Vector& x_corr,
                                        const DenseTiedLayer& layer, double loss)>;

// Algorithm-1 denoising pretraining of a single tied layer. Every epoch
// visits every example (freshly permuted when shuffling), corrupts it, and
// takes one tied gradient step toward the clean example.
inline RunRecord train_layer_sgd(DenseTiedLayer& layer, const std::vector<Vector>& data,
                                 const SgdConfig& cfg, const StepObserver* observer = nullptr) {
    require(cfg.epochs >= 1, "train_layer_sgd: epochs must be >= 1");
    if (!data.empty())
        require(data.front().size() == layer.input_count(),
                "train_layer_sgd: feature dimension mismatch");

    ThreadPool pool(effective_threads(cfg.threads));
    GradientWorkspace ws;
    RunRecord rec;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = epoch_permutation(data.size(), cfg.seed, epoch, cfg.shuffle);
        double epoch_error = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t i = order[k];
            RandomStream rng = corruption_stream(cfg.seed, epoch, i);
            const Vector x_corr = corrupt(data[i], cfg.corruption, rng);
            if (observer) (*observer)(epoch, i, x_corr, layer, 0.0);
            const double loss =
                tied_gradient_step(layer, x_corr, data[i], cfg.learning_rate, ws, pool);
            epoch_error += loss;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.rows.push_back({epoch, secs, epoch_error});
    }
    return rec;
}

struct PretrainLayerSpec {
    std::size_t hidden_count;
    double corruption_probability;
    SgdConfig cfg;
};

// Greedy layer-wise pretraining: layer k trains on the uncorrupted
// encodings of the data through layers 1..k-1; corruption of that encoding
// happens inside layer k's own loop with the clean encoding as target.
inline StackedAutoencoder pretrain_stack(const std::vector<PretrainLayerSpec>& specs,
                                         const std::vector<Vector>& data,
                                         std::vector<RunRecord>* records = nullptr) {
    require(!specs.empty(), "pretrain_stack: no layer specs");
    require(!data.empty(), "pretrain_stack: empty dataset");

    StackedAutoencoder net;
    std::vector<Vector> inputs = data;
    ThreadPool encode_pool(effective_threads(specs.front().cfg.threads));

    for (std::size_t k = 0; k < specs.size(); ++k) {
        const PretrainLayerSpec& spec = specs[k];
        SgdConfig cfg = spec.cfg;
        cfg.corruption.probability = spec.corruption_probability;

        RandomStream init(derive_key(cfg.seed, StreamTag::layer_init, k));
        DenseTiedLayer layer = init_layer(inputs.front().size(), spec.hidden_count, init);
        RunRecord rec = train_layer_sgd(layer, inputs, cfg);
        if (records) records->push_back(std::move(rec));

        if (k + 1 < specs.size()) {
            std::vector<Vector> next;
            next.reserve(inputs.size());
            for (const Vector& x : inputs) next.push_back(encode(layer, x, encode_pool));
            inputs = std::move(next);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

inline Vector one_hot(int label, std::size_t classes = 10) {
    Vector t(classes, 0.0);
    require(label >= 0 && std::size_t(label) < classes, "one_hot: label out of range");
    t[std::size_t(label)] = 1.0;
    return t;
}

enum class FineTuneLoss {
    squared_sigmoid,
    crossentropy_softmax,
};

namespace detail {

// Backpropagates one labeled example through head and encode stages,
// updating as it goes (the paper's sequential order: a layer's weights are
// updated before its deltas are pushed down). Tied layers update W and b
// only; decode biases stay frozen. Returns the example's loss.
inline double supervised_step(StackedAutoencoder& net, const Vector& x, const Vector& target,
                              double eta, FineTuneLoss loss_kind, ThreadPool& pool) {
    const std::size_t n_enc = net.layers.size();
    // forward, keeping every activation; acts[0] = x
    std::vector<Vector> acts;
    acts.reserve(n_enc + net.head.size() + 1);
    acts.push_back(x);
    for (const DenseTiedLayer& L : net.layers) acts.push_back(encode(L, acts.back(), pool));
    for (std::size_t i = 0; i < net.head.size(); ++i) {
        Vector net_in = matvec(net.head[i].W, acts.back(), pool);
        for (std::size_t k = 0; k < net_in.size(); ++k) net_in[k] += net.head[i].b[k];
        const bool last = (i + 1 == net.head.size());
        if (last && loss_kind == FineTuneLoss::crossentropy_softmax)
            acts.push_back(softmax_vec(net_in));
        else
            acts.push_back(sigmoid_vec(std::move(net_in)));
    }

    const Vector& z = acts.back();
    double loss = (loss_kind == FineTuneLoss::crossentropy_softmax)
                      ? cross_entropy_loss(target, z)
                      : squared_loss(target, z);

    // output deltas
    Vector delta(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        delta[j] = (loss_kind == FineTuneLoss::crossentropy_softmax)
                       ? z[j] - target[j]
                       : (z[j] - target[j]) * z[j] * (1.0 - z[j]);
    }

    // head layers, last to first
    for (std::size_t i = net.head.size(); i-- > 0;) {
        DenseLayer& L = net.head[i];
        const Vector& input = acts[n_enc + i];
        rank1_update(L.W, -eta, delta, input, /*transposed=*/false, pool);
        for (std::size_t k = 0; k < delta.size(); ++k) L.b[k] -= eta * delta[k];
        if (i == 0 && n_enc == 0) break;
        Vector prev = matvec_transposed(L.W, delta, pool);
        for (std::size_t j = 0; j < prev.size(); ++j)
            prev[j] *= input[j] * (1.0 - input[j]);
        delta = std::move(prev);
    }

    // encode stages, last to first; b_prime untouched
    for (std::size_t i = n_enc; i-- > 0;) {
        DenseTiedLayer& L = net.layers[i];
        const Vector& input = acts[i];
        rank1_update(L.W, -eta, delta, input, /*transposed=*/false, pool);
        for (std::size_t k = 0; k < delta.size(); ++k) L.b[k] -= eta * delta[k];
        if (i == 0) break;
        Vector prev = matvec_transposed(L.W, delta, pool);
        for (std::size_t j = 0; j < prev.size(); ++j)
            prev[j] *= input[j] * (1.0 - input[j]);
        delta = std::move(prev);
    }
    return loss;
}

}  // namespace detail

// Supervised fine-tuning of the whole network against one-hot targets.
// head_spec lists head layer output sizes and must end in 10; the head is
// built (fan-in uniform init) if the network does not already have one.
// No corruption is applied during fine-tuning.
inline RunRecord fine_tune(StackedAutoencoder& net, const ImageDataset& data,
                           const std::vector<std::size_t>& head_spec, const SgdConfig& cfg,
                           FineTuneLoss loss_kind = FineTuneLoss::squared_sigmoid) {
    require(!data.images.empty(), "fine_tune: empty dataset");
    require(data.images.size() == data.labels.size(), "fine_tune: missing labels");

    if (net.head.empty()) {
        require(!head_spec.empty() && head_spec.back() == 10,
                "fine_tune: head spec must end in 10 outputs");
        std::size_t in = net.layers.empty() ? data.dim() : net.layers.back().hidden_count();
        RandomStream init(derive_key(cfg.seed, StreamTag::layer_init, std::uint64_t(0xFFFF)));
        for (std::size_t out : head_spec) {
            net.head.push_back(init_dense_layer(in, out, init));
            in = out;
        }
    }
    net.head_kind = (loss_kind == FineTuneLoss::crossentropy_softmax)
                        ? HeadKind::crossentropy_softmax
                        : HeadKind::squared_sigmoid;

    ThreadPool pool(effective_threads(cfg.threads));
    RunRecord rec;
    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = epoch_permutation(data.images.size(), cfg.seed, epoch, cfg.shuffle);
        double epoch_error = 0.0;
        for (std::size_t i : order) {
            const Vector target = one_hot(data.labels[i]);
            epoch_error += detail::supervised_step(net, data.images[i], target,
                                                   cfg.learning_rate, loss_kind, pool);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.rows.push_back({epoch, secs, epoch_error});
    }
    return rec;
}

// Argmax over forward_full scores; ties break to the lowest index.
inline int classify(const StackedAutoencoder& net, const Vector& x, ThreadPool& pool) {
    const Vector scores = net.forward_full(x, pool);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return int(best);
}

}  // namespace sdae
