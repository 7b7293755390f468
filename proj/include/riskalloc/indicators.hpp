#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "riskalloc/errors.hpp"
#include "riskalloc/joint_models.hpp"
#include "riskalloc/rng.hpp"

namespace riskalloc {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A point of the simplex U_u^d: nonnegative capitals summing to the group
/// capital. The total is derived from the capitals, so the full-allocation
/// invariant holds by construction.
struct Allocation {
    std::vector<double> capitals;
    double total;

    explicit Allocation(std::vector<double> capitals_) : capitals(std::move(capitals_)) {
        total = 0.0;
        for (double c : capitals) {
            if (!(c >= 0.0)) throw DomainError("Allocation: capitals must be nonnegative");
            total += c;
        }
    }

    static Allocation from_fractions(std::span<const double> fractions, double u) {
        if (!(u >= 0.0)) throw DomainError("Allocation: total capital must be nonnegative");
        double s = 0.0;
        for (double f : fractions) s += f;
        if (std::fabs(s - 1.0) > 1e-9)
            throw DomainError("Allocation: fractions must sum to 1");
        std::vector<double> caps(fractions.size());
        for (std::size_t i = 0; i < fractions.size(); ++i) caps[i] = fractions[i] * u;
        return Allocation(std::move(caps));
    }

    std::size_t dim() const { return capitals.size(); }

    double fraction(std::size_t i) const { return total > 0.0 ? capitals[i] / total : 0.0; }
};

/// Local ruin cost g on the negative half-line: g(0) = 0, g >= 0, convex.
/// Checked on a sample grid at construction.
struct Penalty {
    std::function<double(double)> g;
    std::function<double(double)> g_prime;
    bool is_absolute = false;

    Penalty(std::function<double(double)> g_, std::function<double(double)> g_prime_)
        : g(std::move(g_)), g_prime(std::move(g_prime_)) {
        if (std::fabs(g(0.0)) > 1e-12) throw DomainError("Penalty: g(0) must be 0");
        static constexpr double grid[] = {-16.0, -8.0, -4.0, -2.0, -1.0, -0.5, -0.25, -0.125};
        for (double x : grid) {
            if (!(g(x) >= 0.0)) throw DomainError("Penalty: g must be nonnegative on negatives");
        }
        for (std::size_t i = 0; i + 1 < std::size(grid); ++i) {
            const double a = grid[i], b = grid[i + 1];
            const double mid = 0.5 * (a + b);
            if (g(mid) > 0.5 * (g(a) + g(b)) + 1e-9 * (1.0 + g(a) + g(b)))
                throw DomainError("Penalty: g must be convex");
        }
    }

    /// Ruin severity g(x) = |x|, the default penalty.
    static Penalty absolute() {
        Penalty p([](double x) { return std::fabs(x); },
                  [](double x) { return x < 0.0 ? -1.0 : 1.0; });
        p.is_absolute = true;
        return p;
    }
};

struct IndicatorEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

enum class IndicatorKind { I, J, I_loc };
enum class ConditionSide { lower, upper };

// ---------------------------------------------------------------------------
// Deterministic chunked Monte Carlo
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kChunkSamples = std::uint64_t{1} << 16;

/// Worker cap from RISKALLOC_THREADS; affects speed only, never results.
inline unsigned worker_count() {
    if (const char* env = std::getenv("RISKALLOC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace detail {

struct ChunkMoments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// Chunk c draws from Stream(seed, stream_offset + c); chunks may run on any
// worker but are reduced in index order, so results are bitwise reproducible.
template <class PerSample>
inline ChunkMoments reduce_chunks(const JointModel& model, std::uint64_t n, std::uint64_t seed,
                                  std::uint64_t stream_offset, PerSample&& per_sample) {
    const std::size_t d = static_cast<std::size_t>(dimension(model));
    const std::uint64_t chunks = (n + kChunkSamples - 1) / kChunkSamples;
    std::vector<ChunkMoments> partial(chunks);

    auto run_chunk = [&](std::uint64_t c, std::vector<double>& losses) {
        Stream stream(seed, stream_offset + c);
        const std::uint64_t begin = c * kChunkSamples;
        const std::uint64_t count = std::min(kChunkSamples, n - begin);
        ChunkMoments m;
        for (std::uint64_t k = 0; k < count; ++k) {
            sample_vector(model, stream, losses);
            const double v = per_sample(std::span<const double>(losses));
            m.sum += v;
            m.sum_sq += v * v;
        }
        partial[c] = m;
    };

    const unsigned workers = std::min<std::uint64_t>(worker_count(), chunks);
    if (workers <= 1) {
        std::vector<double> losses(d);
        for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c, losses);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                std::vector<double> losses(d);
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= chunks) break;
                    run_chunk(c, losses);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    ChunkMoments out;
    for (const auto& m : partial) {
        out.sum += m.sum;
        out.sum_sq += m.sum_sq;
    }
    return out;
}

template <class PerSample>
inline IndicatorEstimate estimate_mean(const JointModel& model, std::uint64_t n,
                                       std::uint64_t seed, PerSample&& per_sample) {
    if (n < 1) throw DomainError("estimate: need n >= 1");
    const ChunkMoments m =
        reduce_chunks(model, n, seed, 0, std::forward<PerSample>(per_sample));
    IndicatorEstimate est;
    est.n = n;
    est.seed = seed;
    est.value = m.sum / static_cast<double>(n);
    if (n > 1) {
        const double nn = static_cast<double>(n);
        const double var = std::max(0.0, (m.sum_sq - m.sum * m.sum / nn) / (nn - 1.0));
        est.std_error = std::sqrt(var / nn);
    }
    return est;
}

inline void check_estimation_inputs(const JointModel& model, const Allocation& alloc) {
    if (alloc.dim() != static_cast<std::size_t>(dimension(model)))
        throw DomainError("estimate: allocation dimension does not match model");
}

inline void check_finite_means(const JointModel& model) {
    if (!has_finite_means(model))
        throw DomainError("estimate: model has an infinite-mean marginal (Pareto shape <= 1)");
}

// Per-sample ruin cost sum_k g(u_k - X_k) 1{X_k > u_k}; the absolute penalty
// short-circuits to (X_k - u_k)^+ to keep buffers hot in mirror descent.
inline double ruin_cost(std::span<const double> losses, std::span<const double> capitals,
                        const Penalty& penalty) {
    double cost = 0.0;
    if (penalty.is_absolute) {
        for (std::size_t k = 0; k < losses.size(); ++k)
            if (losses[k] > capitals[k]) cost += losses[k] - capitals[k];
    } else {
        for (std::size_t k = 0; k < losses.size(); ++k)
            if (losses[k] > capitals[k]) cost += penalty.g(capitals[k] - losses[k]);
    }
    return cost;
}

}  // namespace detail

/// Sequential visit of the deterministic sample stream; f receives each loss
/// vector in chunk order. Shared-stream identities in tests build on this.
template <class F>
inline void for_each_sample(const JointModel& model, std::uint64_t n, std::uint64_t seed, F&& f) {
    const std::size_t d = static_cast<std::size_t>(dimension(model));
    std::vector<double> losses(d);
    const std::uint64_t chunks = (n + kChunkSamples - 1) / kChunkSamples;
    for (std::uint64_t c = 0; c < chunks; ++c) {
        Stream stream(seed, c);
        const std::uint64_t count = std::min(kChunkSamples, n - c * kChunkSamples);
        for (std::uint64_t k = 0; k < count; ++k) {
            sample_vector(model, stream, losses);
            f(std::span<const double>(losses));
        }
    }
}

/// Fills a flat n-by-d buffer with the stream of loss vectors, in parallel.
/// Stream ids start at stream_offset so disjoint batches can be derived from
/// one seed (mirror descent uses one offset per iteration).
inline void fill_samples(const JointModel& model, std::uint64_t n, std::uint64_t seed,
                         std::uint64_t stream_offset, std::vector<double>& flat) {
    const std::size_t d = static_cast<std::size_t>(dimension(model));
    flat.resize(static_cast<std::size_t>(n) * d);
    const std::uint64_t chunks = (n + kChunkSamples - 1) / kChunkSamples;
    auto run_chunk = [&](std::uint64_t c) {
        Stream stream(seed, stream_offset + c);
        const std::uint64_t begin = c * kChunkSamples;
        const std::uint64_t count = std::min(kChunkSamples, n - begin);
        for (std::uint64_t k = 0; k < count; ++k)
            sample_vector(model, stream,
                          std::span<double>(flat.data() + (begin + k) * d, d));
    };
    const unsigned workers = std::min<std::uint64_t>(worker_count(), chunks);
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= chunks) break;
                    run_chunk(c);
                }
            });
        for (auto& t : pool) t.join();
    }
}

// ---------------------------------------------------------------------------
// Indicator estimators
// ---------------------------------------------------------------------------

/// I = sum_k E[ g(u_k - X_k) 1{X_k > u_k} 1{S <= u} ].
inline IndicatorEstimate estimate_I(const JointModel& model, const Allocation& alloc,
                                    const Penalty& penalty, std::uint64_t n, std::uint64_t seed) {
    detail::check_estimation_inputs(model, alloc);
    detail::check_finite_means(model);
    const std::span<const double> caps(alloc.capitals);
    const double u = alloc.total;
    return detail::estimate_mean(model, n, seed, [&](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) s += xi;
        return s <= u ? detail::ruin_cost(x, caps, penalty) : 0.0;
    });
}

/// J = sum_k E[ g(u_k - X_k) 1{X_k > u_k} 1{S >= u} ].
inline IndicatorEstimate estimate_J(const JointModel& model, const Allocation& alloc,
                                    const Penalty& penalty, std::uint64_t n, std::uint64_t seed) {
    detail::check_estimation_inputs(model, alloc);
    detail::check_finite_means(model);
    const std::span<const double> caps(alloc.capitals);
    const double u = alloc.total;
    return detail::estimate_mean(model, n, seed, [&](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) s += xi;
        return s >= u ? detail::ruin_cost(x, caps, penalty) : 0.0;
    });
}

/// I_loc = sum_k E[ g(u_k - X_k) 1{X_k > u_k} ]; no aggregate conditioning.
inline IndicatorEstimate estimate_I_loc(const JointModel& model, const Allocation& alloc,
                                        const Penalty& penalty, std::uint64_t n,
                                        std::uint64_t seed) {
    detail::check_estimation_inputs(model, alloc);
    detail::check_finite_means(model);
    const std::span<const double> caps(alloc.capitals);
    return detail::estimate_mean(model, n, seed, [&](std::span<const double> x) {
        return detail::ruin_cost(x, caps, penalty);
    });
}

/// Bernoulli estimate of the optimality-condition probability
/// P(X_i > u_i, S <= u) (lower) or P(X_i > u_i, S >= u) (upper).
inline IndicatorEstimate estimate_condition(const JointModel& model, std::size_t i,
                                            const Allocation& alloc, ConditionSide side,
                                            std::uint64_t n, std::uint64_t seed) {
    detail::check_estimation_inputs(model, alloc);
    if (i >= alloc.dim()) throw DomainError("estimate_condition: index out of range");
    const double u_i = alloc.capitals[i];
    const double u = alloc.total;
    return detail::estimate_mean(model, n, seed, [&, i](std::span<const double> x) {
        if (!(x[i] > u_i)) return 0.0;
        double s = 0.0;
        for (double xi : x) s += xi;
        return (side == ConditionSide::lower ? s <= u : s >= u) ? 1.0 : 0.0;
    });
}

}  // namespace riskalloc
