#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "phasewave/core/grid.hpp"
#include "phasewave/detail/parallel.hpp"

namespace phasewave {

using cd = std::complex<double>;

namespace detail {

inline constexpr int kForward = FFTW_FORWARD;
inline constexpr int kBackward = FFTW_BACKWARD;

/// In-place batched 1D plans, cached for the process lifetime. Planning is
/// serialized; fftw_execute_dft on a cached plan is thread-safe.
/// FFTW_ESTIMATE keeps the algorithm choice deterministic across runs.
class PlanCache {
 public:
  static fftw_plan get(int n, int howmany, std::ptrdiff_t stride, std::ptrdiff_t dist, int sign) {
    static PlanCache cache;
    return cache.lookup(n, howmany, stride, dist, sign);
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  using Key = std::tuple<int, int, std::ptrdiff_t, std::ptrdiff_t, int>;

  fftw_plan lookup(int n, int howmany, std::ptrdiff_t stride, std::ptrdiff_t dist, int sign) {
    std::lock_guard lock(mutex_);
    const Key key{n, howmany, stride, dist, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t extent =
        static_cast<std::size_t>((howmany - 1) * dist + (n - 1) * stride + 1);
    std::vector<cd> scratch(extent);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int dims[1] = {n};
    fftw_plan plan = fftw_plan_many_dft(1, dims, howmany, buf, nullptr, static_cast<int>(stride),
                                        static_cast<int>(dist), buf, nullptr,
                                        static_cast<int>(stride), static_cast<int>(dist), sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

/// Unnormalized in-place DFT of `lines` interleaved lines of length n.
/// Line l starts at data + l*dist, consecutive samples are `stride` apart.
inline void fft_lines(cd* data, int n, std::size_t lines, std::ptrdiff_t stride,
                      std::ptrdiff_t dist, int sign, std::size_t grain = 16) {
  parallel_chunks(lines, grain, [&](std::size_t begin, std::size_t end) {
    const int howmany = static_cast<int>(end - begin);
    fftw_plan plan = PlanCache::get(n, howmany, stride, dist, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data + begin * dist);
    fftw_execute_dft(plan, ptr, ptr);
  });
}

inline void fft_1d(std::span<cd> data, int sign) {
  fftw_plan plan = PlanCache::get(static_cast<int>(data.size()), 1, 1, 1, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

/// Transform along x for every p sample (x outer layout: stride np).
inline void fft_x(std::span<cd> data, const PhaseGrid& grid, int sign) {
  fft_lines(data.data(), grid.nx(), static_cast<std::size_t>(grid.np()), grid.np(), 1, sign);
}

/// Transform along p for every x sample (contiguous lines).
inline void fft_p(std::span<cd> data, const PhaseGrid& grid, int sign) {
  fft_lines(data.data(), grid.np(), static_cast<std::size_t>(grid.nx()), 1, grid.np(), sign);
}

}  // namespace detail
}  // namespace phasewave
