#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "airfl/config.hpp"
#include "airfl/rng.hpp"

namespace airfl {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// One coherence block: the K per-user channel vectors (columns of a M x K
/// matrix), their sum, and the receiver's estimate of the sum. Held constant
/// for a whole round (pilot phase + d data slots); redrawn per round.
struct ChannelRealization {
  CMatrix per_user;      // M x K, column k = h_k
  CVector sum;           // h_s = sum_k h_k
  CVector sum_estimate;  // pilot-based estimate; equals sum when pilot is perfect

  int antennas() const { return static_cast<int>(per_user.rows()); }
  int clients() const { return static_cast<int>(per_user.cols()); }
};

/// Received uplink vector for one parameter slot.
struct ReceivedSymbol {
  CVector y;           // length M
  int slot_index = 1;  // in [1, d]
};

/// ML sum-channel estimate from `pilot_repetitions` unit pilots: the
/// average of the received pilot vectors, i.e. h_s plus averaged noise.
inline CVector estimate_sum_channel(const ChannelRealization& realization,
                                    const SystemConfig& cfg, Rng& rng) {
  if (cfg.pilot_repetitions < 1)
    throw std::invalid_argument("estimate_sum_channel: pilot_repetitions must be >= 1");
  const int m = realization.antennas();
  const double sigma2 = cfg.noise_variance();
  CVector averaged_noise = CVector::Zero(m);
  for (int rep = 0; rep < cfg.pilot_repetitions; ++rep)
    for (int i = 0; i < m; ++i) averaged_noise[i] += rng.cgaussian(sigma2);
  averaged_noise /= static_cast<double>(cfg.pilot_repetitions);
  return realization.sum + averaged_noise;
}

/// Draws an i.i.d. Rayleigh block-fading realization, h_k ~ CN(0, I/M).
/// With pilot_repetitions > 0 and a pilot stream supplied, sum_estimate is
/// the noisy pilot estimate; otherwise it is the exact sum.
inline ChannelRealization draw_channel(const SystemConfig& cfg, Rng& rng,
                                       Rng* pilot_rng = nullptr) {
  cfg.validate();
  ChannelRealization out;
  const int m = cfg.antennas;
  const int k = cfg.clients;
  out.per_user.resize(m, k);
  const double per_element_var = 1.0 / static_cast<double>(m);
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < m; ++r) out.per_user(r, c) = rng.cgaussian(per_element_var);
  out.sum = out.per_user.rowwise().sum();
  if (cfg.pilot_repetitions > 0 && pilot_rng != nullptr)
    out.sum_estimate = estimate_sum_channel(out, cfg, *pilot_rng);
  else
    out.sum_estimate = out.sum;
  return out;
}

/// One uplink slot: y = sqrt(P) * H * x + n with n ~ CN(0, sigma^2 I).
inline ReceivedSymbol transmit(const ChannelRealization& realization,
                               const Eigen::VectorXd& x, const SystemConfig& cfg,
                               Rng& rng, int slot_index = 1) {
  if (x.size() != realization.clients())
    throw std::invalid_argument("transmit: symbol vector length must equal client count");
  const int m = realization.antennas();
  const double sigma2 = cfg.noise_variance();
  ReceivedSymbol out;
  out.slot_index = slot_index;
  out.y = std::sqrt(cfg.power) * (realization.per_user * x.cast<std::complex<double>>());
  if (sigma2 > 0.0)
    for (int i = 0; i < m; ++i) out.y[i] += rng.cgaussian(sigma2);
  return out;
}

}  // namespace airfl
