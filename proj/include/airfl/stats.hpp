#pragma once

#include <cmath>
#include <complex>
#include <cstddef>

namespace airfl {

/// Welford running mean/variance accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Running complex mean and scatter E|z - mean|^2.
class RunningComplexStats {
 public:
  void add(std::complex<double> z) {
    ++n_;
    const std::complex<double> delta = z - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += std::real(std::conj(delta) * (z - mean_));
  }

  std::size_t count() const { return n_; }
  std::complex<double> mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::size_t n_ = 0;
  std::complex<double> mean_{0.0, 0.0};
  double m2_ = 0.0;
};

}  // namespace airfl
