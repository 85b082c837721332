#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace apm {

inline unsigned default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs produce(i) for i in [0, count) on up to `workers` threads, in waves,
// and hands each result to consume(i, result) strictly in ascending i. Any
// reduction done in consume is therefore independent of the worker count.
template <class Produce, class Consume>
void ordered_parallel(std::size_t count, unsigned workers, Produce&& produce, Consume&& consume) {
  using Result = decltype(produce(std::size_t{0}));
  workers = std::max(1u, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) consume(i, produce(i));
    return;
  }
  for (std::size_t wave = 0; wave < count; wave += workers) {
    const std::size_t n = std::min<std::size_t>(workers, count - wave);
    std::vector<std::optional<Result>> results(n);
    std::vector<std::exception_ptr> errors(n);
    {
      std::vector<std::jthread> threads;
      threads.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        threads.emplace_back([&, j] {
          try {
            results[j].emplace(produce(wave + j));
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (errors[j]) std::rethrow_exception(errors[j]);
      consume(wave + j, std::move(*results[j]));
    }
  }
}

}  // namespace apm
