#ifndef DAGPOST_PARALLEL_HPP
#define DAGPOST_PARALLEL_HPP

#include <cstddef>
#include <future>
#include <thread>
#include <type_traits>
#include <vector>

namespace dagpost {

/// Applies fn(i) for i in [0, count) and returns the results in index order.
/// fn must be safe to call from multiple threads (results are merged by
/// index, so output is deterministic regardless of scheduling).
template <typename F>
auto parallel_map(std::size_t count, F&& fn)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out;
  out.reserve(count);
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (count < 2 || hw < 2) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
    return out;
  }
  const std::size_t workers = std::min(hw, count);
  std::vector<std::future<std::vector<R>>> futures;
  futures.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&fn, w, workers, count]() {
      std::vector<R> part;
      for (std::size_t i = w; i < count; i += workers) part.push_back(fn(i));
      return part;
    }));
  }
  std::vector<std::vector<R>> parts;
  parts.reserve(workers);
  for (auto& f : futures) parts.push_back(f.get());
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::move(parts[i % workers][i / workers]));
  return out;
}

}  // namespace dagpost

#endif  // DAGPOST_PARALLEL_HPP
