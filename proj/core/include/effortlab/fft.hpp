#pragma once

#include <complex>
#include <span>
#include <vector>

namespace effortlab::signal {

// Real-input FFT of arbitrary length. Plans are cached per size and shared
// across threads; execution is reentrant.
class Fft {
 public:
  explicit Fft(int size);

  int size() const noexcept { return size_; }
  int bins() const noexcept { return size_ / 2 + 1; }

  // in.size() == size(); out gets bins() values. Unnormalized.
  void Forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // in.size() == bins(); out gets size() values scaled by 1/size().
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  std::vector<std::complex<double>> Forward(std::span<const double> in) const;
  std::vector<double> Inverse(std::span<const std::complex<double>> in) const;

 private:
  int size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace effortlab::signal
