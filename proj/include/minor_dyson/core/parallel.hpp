#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

/// Worker count: explicit flag, else MINOR_DYSON_WORKERS, else hardware threads.
inline unsigned resolve_workers(std::optional<unsigned> requested = std::nullopt) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("MINOR_DYSON_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw InvalidInput("MINOR_DYSON_WORKERS must be a positive integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for every i in [0, count). Work is handed out in fixed-size
/// blocks; callers write results by index, so output never depends on the
/// schedule. The exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body,
                  std::size_t block = 256) {
  if (count == 0) return;
  workers = std::max(1u, workers);
  const std::size_t blocks = (count + block - 1) / block;
  if (workers == 1 || blocks == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = count;

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      const std::size_t lo = b * block;
      const std::size_t hi = std::min(count, lo + block);
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
          break;
        }
      }
    }
  };

  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  std::vector<std::thread> pool;
  pool.reserve(spawn - 1);
  for (unsigned w = 1; w < spawn; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (tree) reduction in index order.
template <class T, class Op>
T tree_reduce(std::span<const T> values, T identity, Op op) {
  if (values.empty()) return identity;
  if (values.size() == 1) return values.front();
  const std::size_t half = values.size() / 2;
  return op(tree_reduce(values.subspan(0, half), identity, op),
            tree_reduce(values.subspan(half), identity, op));
}

inline double pairwise_sum(std::span<const double> values) {
  return tree_reduce(values, 0.0, std::plus<>{});
}

}  // namespace minor_dyson
