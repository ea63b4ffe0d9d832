// Copyright 2026 The gaplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "gaplab/rng.hpp"

namespace gaplab {

/// Samples per chunk. Each chunk owns one RNG stream, so results do not
/// depend on how chunks are distributed over workers.
inline constexpr std::size_t kChunkSize = 4096;

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls fn(chunk_index, begin, end, stream) for every chunk of [0, n), where
/// stream = Stream(seed, key, chunk_index). Chunks run on up to `workers`
/// threads; fn must only write to per-index or per-chunk storage.
template <class Fn>
void for_each_chunk(std::size_t n, std::uint64_t seed, std::uint64_t key, unsigned workers, Fn&& fn,
                    std::size_t chunk_size = kChunkSize) {
    const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
    if (chunks == 0) return;
    auto run_chunk = [&](std::size_t c) {
        Stream rng(seed, key, c);
        const std::size_t begin = c * chunk_size;
        fn(c, begin, std::min(n, begin + chunk_size), rng);
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), chunks));
    if (threads == 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= chunks) return;
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = chunks;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Fills out[i] = fn(i, stream) for i in [0, n) with chunked streams.
template <class T, class Fn>
std::vector<T> generate_chunked(std::size_t n, std::uint64_t seed, std::uint64_t key, unsigned workers, Fn&& fn,
                                std::size_t chunk_size = kChunkSize) {
    std::vector<T> out(n);
    for_each_chunk(
        n, seed, key, workers,
        [&](std::size_t, std::size_t begin, std::size_t end, Stream& rng) {
            for (std::size_t i = begin; i < end; ++i) out[i] = fn(i, rng);
        },
        chunk_size);
    return out;
}

}  // namespace gaplab
