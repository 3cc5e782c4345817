#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

namespace afc::fft {

using cplx = std::complex<double>;

namespace detail {

// fftw planning is not thread safe; execution on a plan owned by one thread is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct plan_entry {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
};

class plan_cache {
 public:
  ~plan_cache() {
    std::lock_guard lock(planner_mutex());
    for (auto& [key, e] : plans_) {
      fftw_destroy_plan(e.plan);
      fftw_free(e.buf);
    }
  }

  plan_entry& get(std::size_t n, int sign) {
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::lock_guard lock(planner_mutex());
    plan_entry e;
    e.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    e.plan = fftw_plan_dft_1d(static_cast<int>(n), e.buf, e.buf, sign, FFTW_ESTIMATE);
    return plans_.emplace(key, e).first->second;
  }

 private:
  std::map<std::pair<std::size_t, int>, plan_entry> plans_;
};

inline void run(std::vector<cplx>& x, int sign) {
  thread_local plan_cache cache;
  auto& e = cache.get(x.size(), sign);
  std::memcpy(e.buf, x.data(), sizeof(cplx) * x.size());
  fftw_execute(e.plan);
  std::memcpy(static_cast<void*>(x.data()), e.buf, sizeof(cplx) * x.size());
}

}  // namespace detail

/// X[k] = sum_n x[n] exp(-2 pi i k n / N), unnormalized.
inline void forward(std::vector<cplx>& x) { detail::run(x, FFTW_FORWARD); }

/// Inverse of forward(), including the 1/N factor.
inline void inverse(std::vector<cplx>& x) {
  detail::run(x, FFTW_BACKWARD);
  const double s = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= s;
}

// Grid arrays are stored with the zero offset at index N/2; FFT order puts it at 0.
template <class T>
std::vector<T> to_fft_order(const std::vector<T>& centered) {
  const std::size_t n = centered.size(), h = n / 2;
  std::vector<T> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = centered[(j + h) % n];
  return out;
}

template <class T>
std::vector<T> from_fft_order(const std::vector<T>& ordered) {
  const std::size_t n = ordered.size(), h = n / 2;
  std::vector<T> out(n);
  for (std::size_t j = 0; j < n; ++j) out[(j + h) % n] = ordered[j];
  return out;
}

}  // namespace afc::fft
