#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "airfl/channel.hpp"
#include "airfl/linalg.hpp"

namespace airfl {

/// Fisher information and the resulting estimation floor for one channel
/// realization. `mse_floor` (trace of the inverse FIM) lower-bounds the MSE
/// of any unbiased per-user estimate; `sum_floor` (1^T C 1) lower-bounds the
/// variance of any unbiased estimate of the symbol sum. Both are reported
/// because the reference curves are ambiguous about which one they plot.
struct CrlbResult {
  Eigen::MatrixXd fim;   // K x K, 2 * SNR * Re(H^H H)
  Eigen::MatrixXd crlb;  // fim^{-1}
  double mse_floor = 0.0;
  double sum_floor = 0.0;
};

inline CrlbResult crlb(const CMatrix& channel, double snr_linear) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("crlb: snr must be > 0");
  CrlbResult out;
  out.fim = 2.0 * snr_linear * (channel.adjoint() * channel).real();
  Eigen::LLT<Eigen::MatrixXd> llt(out.fim);
  detail::require_well_conditioned(llt, "crlb");
  const long k = out.fim.rows();
  out.crlb = llt.solve(Eigen::MatrixXd::Identity(k, k));
  out.mse_floor = out.crlb.trace();
  out.sum_floor = out.crlb.sum();
  return out;
}

/// Constants feeding the one-step and T-round convergence evaluators.
struct BoundParams {
  double mu = 1.0;          // strong convexity
  double lip = 1.0;         // smoothness, >= mu
  double grad_bound = 1.0;  // H, uniform second-moment bound on SGD gradients
  int clients = 1;          // K
  int antennas = 1;         // M
  double snr = 1.0;         // linear
  double gamma = 0.0;       // learning-rate schedule offset
  double w0_dist_sq = 0.0;  // ||w_0 - w*||^2

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("BoundParams: mu must be > 0");
    if (!(lip >= mu)) throw std::invalid_argument("BoundParams: lip must be >= mu");
    if (grad_bound < 0.0) throw std::invalid_argument("BoundParams: grad_bound must be >= 0");
    if (clients < 1 || antennas < 1)
      throw std::invalid_argument("BoundParams: clients and antennas must be >= 1");
    if (!(snr > 0.0)) throw std::invalid_argument("BoundParams: snr must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("BoundParams: gamma must be >= 0");
    if (w0_dist_sq < 0.0) throw std::invalid_argument("BoundParams: w0_dist_sq must be >= 0");
  }
};

/// B = [1 + (K + 1/SNR)/M] * H^2 / K, the joint variance-reduction /
/// channel-interference constant of the convergence bound.
inline double b_factor(int clients, int antennas, double snr_linear, double grad_bound) {
  if (clients < 1 || antennas < 1)
    throw std::invalid_argument("b_factor: clients and antennas must be >= 1");
  if (!(snr_linear > 0.0)) throw std::invalid_argument("b_factor: snr must be > 0");
  if (grad_bound < 0.0) throw std::invalid_argument("b_factor: grad_bound must be >= 0");
  const double k = static_cast<double>(clients);
  const double m = static_cast<double>(antennas);
  return (1.0 + (k + 1.0 / snr_linear) / m) * grad_bound * grad_bound / k;
}

inline double b_factor(const BoundParams& p) {
  return b_factor(p.clients, p.antennas, p.snr, p.grad_bound);
}

/// One-step recursion bound: (1 - 2*mu*eta) * prev + eta^2 * B.
/// Only valid for eta <= 1/(2*mu); larger steps are rejected.
inline double lemma1_rhs(double prev_err_sq, double eta, const BoundParams& p) {
  p.validate();
  if (prev_err_sq < 0.0) throw std::invalid_argument("lemma1_rhs: prev_err_sq must be >= 0");
  if (eta > 1.0 / (2.0 * p.mu) + 1e-15)
    throw std::invalid_argument("lemma1_rhs: eta exceeds 1/(2*mu)");
  return (1.0 - 2.0 * p.mu * eta) * prev_err_sq + eta * eta * b_factor(p);
}

/// O(1/t) optimality-gap bound under the eta_t = 2/(mu*(t+gamma)) schedule:
/// L / (2(t+gamma)) * [4B/mu^2 + (1+gamma) * ||w_0 - w*||^2].
inline double theorem1_bound(long round, const BoundParams& p) {
  p.validate();
  if (round < 1) throw std::invalid_argument("theorem1_bound: round must be >= 1");
  const double b = b_factor(p);
  const double t_shift = static_cast<double>(round) + p.gamma;
  return p.lip / (2.0 * t_shift) *
         (4.0 * b / (p.mu * p.mu) + (1.0 + p.gamma) * p.w0_dist_sq);
}

/// Learning-rate schedule eta_t = 2/(mu*(t+gamma)). The value is returned
/// as-is; `satisfies_lemma1` flags rounds where it exceeds 1/(2*mu)
/// (equivalently t + gamma < 4) instead of clamping.
struct LearningRate {
  double eta = 0.0;
  bool satisfies_lemma1 = true;
};

inline LearningRate learning_rate(long round, double mu, double gamma) {
  if (round < 1) throw std::invalid_argument("learning_rate: round must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("learning_rate: mu must be > 0");
  if (gamma < 0.0) throw std::invalid_argument("learning_rate: gamma must be >= 0");
  LearningRate out;
  const double t_shift = static_cast<double>(round) + gamma;
  out.eta = 2.0 / (mu * t_shift);
  out.satisfies_lemma1 = t_shift >= 4.0 - 1e-12;
  return out;
}

}  // namespace airfl
