#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/dataset.hpp"
#include "sdae/network.hpp"
#include "sdae/rng.hpp"
#include "sdae/sgd.hpp"
#include "sdae/thread_pool.hpp"

namespace sdae {

// Flattened layer parameters plus the last measured fitness (1/E). A zero
// fitness marks an individual that has not been evaluated since creation.
struct Individual {
    Vector genome;
    double fitness = 0.0;
    double scaled_fitness = 0.0;
};

struct GaConfig {
    std::size_t population = 2;        // N
    double mutation_rate = 0.0001;     // mr
    double mutation_amount = 0.0;      // ma (Cauchy scale)
    double crossover_rate = 0.5;       // cr
    double replacement_fraction = 0.5; // alpha
    double power_gamma = 1.0;          // gamma
    double init_range = 0.0;           // r
    double backprop_fraction = 0.5;    // beta (HGA only)
    double learning_rate = 0.001;      // eta (HGA only)
    int epochs = 15;
    CorruptionSpec corruption{CorruptionKind::masking, 0.25};
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// Paper-default hyperparameters; r and ma derive from the input dimension.
inline GaConfig default_ga_config(std::size_t m) {
    require(m >= 1, "default_ga_config: input dimension must be >= 1");
    GaConfig cfg;
    const double r = 1.0 / std::sqrt(double(m));
    cfg.population = 2;
    cfg.mutation_rate = 0.0001;
    cfg.mutation_amount = 0.1 * r;
    cfg.crossover_rate = 0.5;
    cfg.replacement_fraction = 0.5;
    cfg.power_gamma = 1.0;
    cfg.init_range = r;
    cfg.backprop_fraction = 0.5;
    cfg.learning_rate = 0.001;
    return cfg;
}

// Unflattens the genome over a layer view, runs the corrupted example
// forward, and stores fitness = 1 / squared_loss(t, z). The genome is never
// modified.
inline double evaluate(Individual& ind, std::size_t m, std::size_t n, const Vector& x_corr,
                       const Vector& t, GradientWorkspace& ws, ThreadPool& pool) {
    ConstLayerView L = genome_view(ind.genome, m, n);
    ws.ensure(m, n);
    encode(L, x_corr.data(), ws.y.data(), pool);
    decode(L, ws.y.data(), ws.z.data(), pool);
    const double loss = squared_loss(t, ws.z);
    ind.fitness = 1.0 / loss;
    return ind.fitness;
}

// Rank-based power scaling: individuals sorted ascending by fitness (ties
// keep original order), the individual at rank position R gets R^gamma,
// with R = N for the fittest.
inline void power_scale(std::vector<Individual>& pop, double gamma) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (const Individual& ind : pop)
        if (!(ind.fitness > 0.0)) throw DataError("power_scale: unevaluated individual");
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].fitness < pop[b].fitness;
    });
    for (std::size_t pos = 0; pos < idx.size(); ++pos)
        pop[idx[pos]].scaled_fitness = std::pow(double(pos + 1), gamma);
}

// Fitness-proportionate selection over scaled fitness.
inline std::size_t roulette_select(const std::vector<Individual>& pop, RandomStream& rng) {
    double total = 0.0;
    for (const Individual& ind : pop) total += ind.scaled_fitness;
    if (!(total > 0.0)) throw DataError("roulette_select: all-zero scaled fitness");
    const double u = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        acc += pop[i].scaled_fitness;
        if (u < acc) return i;
    }
    return pop.size() - 1;
}

// Per element: with probability mr, add a Cauchy(0, ma) perturbation
// (ma * tan(pi*(u - 1/2))). Draws are keyed per element so chunked parallel
// application cannot change the result.
inline void cauchy_mutate(Vector& genome, double mr, double ma, std::uint64_t key,
                          ThreadPool& pool) {
    parallel_chunks(pool, genome.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (uniform_at(key, i, 0) < mr) {
                const double u = uniform_open_at(key, i, 1);
                genome[i] += ma * std::tan(M_PI * (u - 0.5));
            }
        }
    });
}

// Per element: swap a_i and b_i with probability cr.
inline void uniform_crossover(Vector& a, Vector& b, double cr, std::uint64_t key,
                              ThreadPool& pool) {
    require(a.size() == b.size(), "uniform_crossover: length mismatch");
    parallel_chunks(pool, a.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            if (uniform_at(key, i, 0) < cr) std::swap(a[i], b[i]);
    });
}

struct GaRunResult {
    DenseTiedLayer best;
    RunRecord record;
};

namespace detail {

// Shared CGA/HGA engine. Per epoch and per training example: corrupt,
// evaluate every individual against the clean example, power-scale,
// (HGA) backprop the top beta-fraction, then breed ceil(alpha*N) offspring
// via roulette selection, mutation and crossover, and replace the worst.
inline GaRunResult run_ga(std::size_t m, std::size_t n, const std::vector<Vector>& data,
                          const GaConfig& cfg, bool hybrid) {
    require(cfg.population >= 2, "ga: population must be >= 2");
    require(cfg.epochs >= 1, "ga: epochs must be >= 1");
    require(!data.empty(), "ga: empty dataset");
    require(data.front().size() == m, "ga: feature dimension mismatch");
    require(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0 &&
                cfg.crossover_rate >= 0.0 && cfg.crossover_rate <= 1.0,
            "ga: rates must lie in [0,1]");
    require(cfg.replacement_fraction > 0.0 && cfg.replacement_fraction < 1.0,
            "ga: replacement fraction must lie in (0,1)");

    const std::size_t N = cfg.population;
    const std::size_t glen = genome_length(m, n);
    // ceil(alpha*N), capped so replace-worst can never evict the best
    const std::size_t n_replace =
        std::min<std::size_t>(std::size_t(std::ceil(cfg.replacement_fraction * double(N))),
                              N - 1);
    const std::size_t n_backprop =
        hybrid ? std::min<std::size_t>(
                     std::size_t(std::ceil(cfg.backprop_fraction * double(N))), N)
               : 0;
    const std::size_t n_pairs = (n_replace + 1) / 2;

    ThreadPool pool(effective_threads(cfg.threads));
    GradientWorkspace ws;

    std::vector<Individual> pop(N);
    for (std::size_t i = 0; i < N; ++i) {
        RandomStream rng(derive_key(cfg.seed, StreamTag::ga_init, i));
        pop[i].genome.resize(glen);
        for (double& v : pop[i].genome) v = rng.next_symmetric(cfg.init_range);
    }

    std::vector<Vector> offspring(2 * n_pairs, Vector(glen));
    std::vector<std::size_t> rank(N);
    RunRecord rec;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = epoch_permutation(data.size(), cfg.seed, epoch, true);
        double epoch_error = 0.0;

        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t i = order[k];
            RandomStream crng = corruption_stream(cfg.seed, epoch, i);
            const Vector x_corr = corrupt(data[i], cfg.corruption, crng);
            const Vector& target = data[i];

            double best_fitness = 0.0;
            for (Individual& ind : pop)
                best_fitness = std::max(best_fitness, evaluate(ind, m, n, x_corr, target, ws, pool));
            epoch_error += 1.0 / best_fitness;

            power_scale(pop, cfg.power_gamma);

            if (n_backprop > 0) {
                std::iota(rank.begin(), rank.end(), std::size_t{0});
                std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
                    return pop[a].fitness > pop[b].fitness;
                });
                for (std::size_t r = 0; r < n_backprop; ++r) {
                    LayerView L = genome_view(pop[rank[r]].genome, m, n);
                    tied_gradient_step(L, x_corr, target, cfg.learning_rate, ws, pool);
                }
            }

            RandomStream sel(derive_key(cfg.seed, StreamTag::ga_select, std::uint64_t(epoch), i));
            for (std::size_t p = 0; p < n_pairs; ++p) {
                const std::size_t ia = roulette_select(pop, sel);
                const std::size_t ib = roulette_select(pop, sel);
                offspring[2 * p] = pop[ia].genome;
                offspring[2 * p + 1] = pop[ib].genome;
                cauchy_mutate(offspring[2 * p], cfg.mutation_rate, cfg.mutation_amount,
                              derive_key(cfg.seed, StreamTag::ga_mutate, std::uint64_t(epoch), i,
                                         2 * p),
                              pool);
                cauchy_mutate(offspring[2 * p + 1], cfg.mutation_rate, cfg.mutation_amount,
                              derive_key(cfg.seed, StreamTag::ga_mutate, std::uint64_t(epoch), i,
                                         2 * p + 1),
                              pool);
                uniform_crossover(offspring[2 * p], offspring[2 * p + 1], cfg.crossover_rate,
                                  derive_key(cfg.seed, StreamTag::ga_crossover,
                                             std::uint64_t(epoch), i, p),
                                  pool);
            }

            std::iota(rank.begin(), rank.end(), std::size_t{0});
            std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
                return pop[a].fitness < pop[b].fitness;
            });
            for (std::size_t q = 0; q < n_replace; ++q) {
                Individual& victim = pop[rank[q]];
                std::swap(victim.genome, offspring[q]);
                victim.fitness = 0.0;
                victim.scaled_fitness = 0.0;
            }
        }

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.rows.push_back({epoch, secs, epoch_error});
    }

    // Best evaluated individual at termination. Freshly inserted offspring
    // carry fitness 0 and at least one evaluated survivor always exists.
    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < N; ++i)
        if (pop[i].fitness > pop[best_idx].fitness) best_idx = i;

    GaRunResult result;
    result.best = DenseTiedLayer(m, n);
    unflatten_params(result.best, pop[best_idx].genome);
    result.record = std::move(rec);
    return result;
}

}  // namespace detail

inline GaRunResult run_cga(std::size_t m, std::size_t n, const std::vector<Vector>& data,
                           const GaConfig& cfg) {
    return detail::run_ga(m, n, data, cfg, /*hybrid=*/false);
}

inline GaRunResult run_hga(std::size_t m, std::size_t n, const std::vector<Vector>& data,
                           const GaConfig& cfg) {
    return detail::run_ga(m, n, data, cfg, /*hybrid=*/true);
}

}  // namespace sdae
