#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "airfl/channel.hpp"
#include "airfl/config.hpp"
#include "airfl/linalg.hpp"
#include "airfl/rng.hpp"

namespace airfl {

namespace detail {
inline std::int64_t elapsed_ns(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}
}  // namespace detail

/// Ground truth handed to the receivers for diagnostics only: the true
/// channel matrix and the transmitted symbol vector of the slot.
struct TrueChannelView {
  const CMatrix& channel;      // M x K
  const Eigen::VectorXd& symbols;  // length K
};

/// Sum-channel projection estimate of one aggregated parameter, with the
/// optional signal / interference / noise split of the projection.
struct AggregateEstimate {
  double value = 0.0;  // Re(h_s_est^H y) / sqrt(P)
  bool has_diagnostics = false;
  std::complex<double> signal_part{0.0, 0.0};
  std::complex<double> interference_part{0.0, 0.0};
  std::complex<double> noise_part{0.0, 0.0};
  std::int64_t decode_time_ns = 0;

  std::complex<double> parts_sum() const {
    return signal_part + interference_part + noise_part;
  }
};

/// Aggregated-parameter estimate via projection onto the estimated sum
/// channel. The projection is the raw inner product; channel hardening makes
/// the implicit gain ~ 1, so no norm correction is applied. When `truth` is
/// supplied the three additive parts of the projection are reported
/// (computed from the true channel; they sum to h_s_est^H y only when the
/// pilot estimate is exact).
inline AggregateEstimate ro_aggregate(const ReceivedSymbol& rx, const CVector& h_s_est,
                                      double power = 1.0,
                                      const TrueChannelView* truth = nullptr) {
  if (h_s_est.size() != rx.y.size())
    throw std::invalid_argument("ro_aggregate: projection vector length mismatch");
  AggregateEstimate out;

  const auto start = std::chrono::steady_clock::now();
  const std::complex<double> projection = h_s_est.dot(rx.y);  // h^H y
  out.value = projection.real() / std::sqrt(power);
  out.decode_time_ns = detail::elapsed_ns(start);

  if (truth != nullptr) {
    const CMatrix& h = truth->channel;
    if (h.rows() != rx.y.size() || h.cols() != truth->symbols.size())
      throw std::invalid_argument("ro_aggregate: diagnostic channel dimension mismatch");
    const CVector h_s = h.rowwise().sum();
    const double sqrt_p = std::sqrt(power);
    std::complex<double> signal{0.0, 0.0};
    std::complex<double> total_gain{0.0, 0.0};
    for (int k = 0; k < h.cols(); ++k) {
      const std::complex<double> self_gain = h.col(k).squaredNorm();
      signal += sqrt_p * self_gain * truth->symbols[k];
    }
    total_gain = h_s.dot(h * truth->symbols.cast<std::complex<double>>());
    out.signal_part = signal;
    out.interference_part = sqrt_p * total_gain - signal;
    out.noise_part = projection - sqrt_p * total_gain;
    out.has_diagnostics = true;
  }
  return out;
}

/// Per-user linear MMSE under a unit-power signal prior, plus the summed
/// estimate. Requires full receiver CSI. The K x K regularized Gram system
/// is solved by Cholesky; a non-positive-definite system (sigma^2 = 0 with
/// rank-deficient H) fails loudly rather than falling back to a pseudo-inverse.
struct MmseResult {
  Eigen::VectorXd per_user;  // length K
  double sum = 0.0;
  std::int64_t decode_time_ns = 0;
};

inline MmseResult mmse_aggregate(const ReceivedSymbol& rx, const CMatrix& channel,
                                 double snr_linear, double power = 1.0) {
  if (channel.rows() != rx.y.size())
    throw std::invalid_argument("mmse_aggregate: channel row count mismatch");
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mmse_aggregate: snr must be > 0");
  const double sigma2 = power / snr_linear;
  MmseResult out;

  const auto start = std::chrono::steady_clock::now();
  CMatrix gram = channel.adjoint() * channel;
  gram.diagonal().array() += sigma2;
  Eigen::LLT<CMatrix> llt(gram);
  detail::require_well_conditioned(llt, "mmse_aggregate");
  const CVector matched = channel.adjoint() * rx.y;
  const CVector solved = llt.solve(matched);
  out.per_user = solved.real() / std::sqrt(power);
  out.sum = out.per_user.sum();
  out.decode_time_ns = detail::elapsed_ns(start);
  return out;
}

/// Reusable MMSE filter for a fixed realization: factor once, apply per slot.
class MmseFilter {
 public:
  MmseFilter(const CMatrix& channel, double snr_linear, double power = 1.0)
      : channel_(channel), inv_sqrt_power_(1.0 / std::sqrt(power)) {
    if (!(snr_linear > 0.0)) throw std::invalid_argument("MmseFilter: snr must be > 0");
    CMatrix gram = channel.adjoint() * channel;
    gram.diagonal().array() += power / snr_linear;
    llt_.compute(gram);
    detail::require_well_conditioned(llt_, "MmseFilter");
  }

  Eigen::VectorXd apply(const CVector& y) const {
    return (llt_.solve(channel_.adjoint() * y)).real() * inv_sqrt_power_;
  }

 private:
  CMatrix channel_;
  Eigen::LLT<CMatrix> llt_;
  double inv_sqrt_power_;
};

/// Approximate post-projection SINR, M / (K - 1 + 1/SNR). Implemented
/// verbatim; the measured ratio from sinr_empirical is reported separately
/// and the two are intentionally not reconciled.
inline double sinr_analytic(int antennas, int clients, double snr_linear) {
  if (antennas < 1 || clients < 1)
    throw std::invalid_argument("sinr_analytic: antennas and clients must be >= 1");
  if (!(snr_linear > 0.0)) throw std::invalid_argument("sinr_analytic: snr must be > 0");
  return static_cast<double>(antennas) /
         (static_cast<double>(clients - 1) + 1.0 / snr_linear);
}

struct SinrReport {
  double analytic = 0.0;  // linear scale
  double empirical = 0.0; // mean |signal|^2 / mean |interference + noise|^2
  long trials = 0;
  bool denominator_degenerate = false;  // K = 1 and sigma^2 = 0
};

/// Measures the signal-to-(interference+noise) power ratio of the projection
/// over `trials` fresh channels with i.i.d. zero-mean unit-power symbols.
inline SinrReport sinr_empirical(const SystemConfig& cfg, long trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("sinr_empirical: trials must be >= 1");
  cfg.validate();
  SinrReport report;
  report.analytic = sinr_analytic(cfg.antennas, cfg.clients, cfg.snr_linear());
  report.trials = trials;
  double signal_power = 0.0;
  double disturbance_power = 0.0;
  Eigen::VectorXd symbols(cfg.clients);
  for (long t = 0; t < trials; ++t) {
    ChannelRealization channel = draw_channel(cfg, rng);
    for (int k = 0; k < cfg.clients; ++k) symbols[k] = rng.gaussian();
    ReceivedSymbol rx = transmit(channel, symbols, cfg, rng);
    TrueChannelView truth{channel.per_user, symbols};
    AggregateEstimate est = ro_aggregate(rx, channel.sum_estimate, cfg.power, &truth);
    signal_power += std::norm(est.signal_part);
    disturbance_power += std::norm(est.interference_part + est.noise_part);
  }
  signal_power /= static_cast<double>(trials);
  disturbance_power /= static_cast<double>(trials);
  // rounding residue of the parts split is ~eps^2 * signal, not exactly zero
  if (disturbance_power <= 1e-300 || disturbance_power <= signal_power * 1e-20) {
    report.denominator_degenerate = true;
    report.empirical = std::numeric_limits<double>::infinity();
  } else {
    report.empirical = signal_power / disturbance_power;
  }
  return report;
}

}  // namespace airfl
