// Copyright 2026 The Affinity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace affinity {

/// Worker count for a `--threads` style setting: 0 means hardware
/// concurrency, anything else is used as given.
inline std::size_t ResolveThreads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls `fn(begin, end, chunk)` over `n` items split into `chunks` fixed,
/// contiguous ranges, using up to `threads` workers. Chunk boundaries depend
/// only on `n` and `chunks`, so callers that combine per-chunk results in
/// chunk order get thread-count independent output. The first exception
/// thrown by any chunk is rethrown after all workers join.
inline void ParallelChunks(std::size_t n, std::size_t chunks, std::size_t threads,
                           const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  auto range = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>(n * c / chunks, n * (c + 1) / chunks);
  };
  threads = std::min(ResolveThreads(threads), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = range(c);
      fn(b, e, c);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += threads) {
        try {
          auto [b, e] = range(c);
          fn(b, e, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Calls `fn(i)` for every i in [0, n).
inline void ParallelFor(std::size_t n, std::size_t threads,
                        const std::function<void(std::size_t)>& fn) {
  ParallelChunks(n, ResolveThreads(threads), threads,
                 [&](std::size_t b, std::size_t e, std::size_t) {
                   for (std::size_t i = b; i < e; ++i) fn(i);
                 });
}

}  // namespace affinity
