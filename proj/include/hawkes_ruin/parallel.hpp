#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "hawkes_ruin/rng.hpp"
#include "hawkes_ruin/stats.hpp"

namespace hawkes_ruin {

/// Seed and worker count for a replicated Monte Carlo run. Replication i
/// always draws from Philox stream (seed, i), and partial sums are combined in
/// fixed block order, so results are bit-identical for any worker count.
struct RunOptions {
    std::uint64_t seed = 20240229;
    unsigned workers = 1;
};

inline constexpr std::size_t kReplicationBlock = 1024;

/// Options for the k-th of several independent estimates sharing one seed.
inline RunOptions substream(const RunOptions& opts, std::uint64_t k) {
    std::uint64_t z = opts.seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return {z ^ (z >> 31), opts.workers};
}

/// Runs `n` replications of `kernel(Philox4x32&, index)` and folds every
/// result into an accumulator of type Acc via `acc.add(result)`.
/// Acc must provide add() and merge(const Acc&); every block starts from a
/// copy of `prototype`.
template <class Acc, class Kernel>
Acc replicate(std::size_t n, const RunOptions& opts, Kernel&& kernel, const Acc& prototype = Acc{}) {
    const std::size_t blocks = (n + kReplicationBlock - 1) / kReplicationBlock;
    std::vector<Acc> partial(blocks, prototype);

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kReplicationBlock;
        const std::size_t end = std::min(n, begin + kReplicationBlock);
        Acc acc = prototype;
        for (std::size_t i = begin; i < end; ++i) {
            Philox4x32 rng(opts.seed, i);
            acc.add(kernel(rng, i));
        }
        partial[b] = std::move(acc);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(blocks)));
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < blocks; b = next++) {
                    try {
                        run_block(b);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = blocks;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    Acc total = prototype;
    for (const auto& p : partial) total.merge(p);
    return total;
}

/// Mean of a scalar kernel with its standard error.
template <class Kernel>
EstimateCI replicate_mean(std::size_t n, const RunOptions& opts, Kernel&& kernel, double level = 0.99) {
    return replicate<MeanAccumulator>(n, opts, std::forward<Kernel>(kernel)).estimate(level);
}

/// Collects per-replication values in index order.
template <class T>
struct Collector {
    std::vector<T> values;
    void add(T v) { values.push_back(std::move(v)); }
    void merge(const Collector& other) { values.insert(values.end(), other.values.begin(), other.values.end()); }
};

template <class T, class Kernel>
std::vector<T> replicate_collect(std::size_t n, const RunOptions& opts, Kernel&& kernel) {
    return replicate<Collector<T>>(n, opts, std::forward<Kernel>(kernel)).values;
}

}  // namespace hawkes_ruin
