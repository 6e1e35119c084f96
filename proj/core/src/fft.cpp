#include "effortlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "effortlab/error.hpp"

namespace effortlab::signal {

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// The FFTW planner is not thread-safe; execution on distinct arrays is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

PlanPair GetPlans(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(PlannerMutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  double* real = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair plans{fftw_plan_dft_r2c_1d(n, real, spec, flags),
                 fftw_plan_dft_c2r_1d(n, spec, real, flags | FFTW_DESTROY_INPUT)};
  fftw_free(real);
  fftw_free(spec);
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

Fft::Fft(int size) : size_(size) {
  if (size <= 0) throw Error(ErrorCode::kInvalidArgument, "FFT size must be positive");
  const PlanPair plans = GetPlans(size);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void Fft::Forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != size_ || static_cast<int>(out.size()) != bins()) {
    throw Error(ErrorCode::kInvalidArgument, "FFT buffer size mismatch");
  }
  // r2c does not modify its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void Fft::Inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (static_cast<int>(in.size()) != bins() || static_cast<int>(out.size()) != size_) {
    throw Error(ErrorCode::kInvalidArgument, "inverse FFT buffer size mismatch");
  }
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / size_;
  for (double& v : out) v *= scale;
}

std::vector<std::complex<double>> Fft::Forward(std::span<const double> in) const {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(bins()));
  Forward(in, out);
  return out;
}

std::vector<double> Fft::Inverse(std::span<const std::complex<double>> in) const {
  std::vector<double> out(static_cast<std::size_t>(size_));
  Inverse(in, out);
  return out;
}

}  // namespace effortlab::signal
