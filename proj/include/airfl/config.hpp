#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace airfl {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// One simulated uplink system: M BS antennas, K single-antenna clients,
/// d parameters per round, SNR = P / sigma^2.
struct SystemConfig {
  int antennas = 256;          // M
  int clients = 8;             // K
  int model_dim = 1;           // d
  double snr_db = 10.0;        // SNR in dB; converted once at the boundary
  double power = 1.0;          // P, per-client transmit power
  int pilot_repetitions = 0;   // 0 = perfect sum-channel knowledge
  std::uint64_t master_seed = 1;

  double snr_linear() const { return db_to_linear(snr_db); }
  double noise_variance() const { return power / snr_linear(); }

  void validate() const {
    if (antennas < 1) throw std::invalid_argument("SystemConfig: antennas must be >= 1");
    if (clients < 1) throw std::invalid_argument("SystemConfig: clients must be >= 1");
    if (model_dim < 1) throw std::invalid_argument("SystemConfig: model_dim must be >= 1");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("SystemConfig: snr_db must be finite");
    if (!(power > 0.0)) throw std::invalid_argument("SystemConfig: power must be > 0");
    if (pilot_repetitions < 0)
      throw std::invalid_argument("SystemConfig: pilot_repetitions must be >= 0");
  }
};

}  // namespace airfl
