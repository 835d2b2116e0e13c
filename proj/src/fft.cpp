#include "ddlf/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace ddlf::fft {
namespace {

// fftw planning is not thread safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int length, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(length, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<size_t>(length));
    auto* out = fftw_alloc_complex(static_cast<size_t>(length));
    fftw_plan plan = fftw_plan_dft_1d(length, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

CVector run(const CVector& x, int sign) {
  const auto n = static_cast<int>(x.size());
  CVector in = x;
  CVector out(n);
  if (n == 0) return out;
  fftw_plan plan = cache().get(n, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

CVector forward(const CVector& x) { return run(x, FFTW_FORWARD); }

CVector backward(const CVector& x) { return run(x, FFTW_BACKWARD); }

CVector delay_spectrum(const CVector& spectrum, double shift, long first_bin) {
  const long L = spectrum.size();
  CVector shifted(L);
  for (long i = 0; i < L; ++i) {
    // bin i stands for the integer frequency k with k = i (mod L) in the window
    long k = first_bin + (((i - first_bin) % L) + L) % L;
    shifted[i] = spectrum[i] * expj(-kTwoPi * static_cast<double>(k) * shift / static_cast<double>(L));
  }
  CVector out = backward(shifted);
  out /= static_cast<double>(L);
  return out;
}

CVector delay(const CVector& x, double shift, long first_bin) {
  const long L = x.size();
  if (L == 0) return x;
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) < 1e-12) {
    const long s = ((static_cast<long>(rounded) % L) + L) % L;
    CVector out(L);
    for (long t = 0; t < L; ++t) out[(t + s) % L] = x[t];
    return out;
  }
  return delay_spectrum(forward(x), shift, first_bin);
}

}  // namespace ddlf::fft
