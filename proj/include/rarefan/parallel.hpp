#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace rarefan {

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs fn(i) for i in [0, n) on a small pool; results land in index order so the
// outcome does not depend on scheduling.
template <class T>
std::vector<T> run_indexed(std::size_t n, const std::function<T(std::size_t)>& fn,
                           unsigned threads = 0) {
  std::vector<T> out(n);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Outcome of one replica: either a value or the error that stopped it.
template <class T>
struct ReplicaResult {
  bool ok = false;
  T value{};
  std::string error;
};

template <class T>
std::vector<ReplicaResult<T>> run_replicas(std::size_t n, const std::function<T(std::size_t)>& fn,
                                           unsigned threads = 0) {
  return run_indexed<ReplicaResult<T>>(
      n,
      [&](std::size_t i) {
        ReplicaResult<T> r;
        try {
          r.value = fn(i);
          r.ok = true;
        } catch (const std::exception& e) {
          r.error = e.what();
        }
        return r;
      },
      threads);
}

}  // namespace rarefan
