// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace glosskit {

/// Runs body(chunk) for chunk in [0, chunks) on up to `threads` workers.
/// Work is split by chunk, never by thread, so callers that keep per-chunk
/// outputs and reduce them in chunk order get results independent of the
/// thread count.
template <class F>
void parallel_chunks(int chunks, int threads, F&& body) {
  threads = std::clamp(threads, 1, std::max(chunks, 1));
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int c = next++; c < chunks; c = next++) {
      if (failed) return;
      try {
        body(c);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace glosskit
