#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "airfl/channel.hpp"
#include "airfl/receivers.hpp"
#include "airfl/stats.hpp"

using namespace airfl;

namespace {
SystemConfig make_cfg(int m, int k, double snr_db = 10.0, double p = 1.0) {
  SystemConfig cfg;
  cfg.antennas = m;
  cfg.clients = k;
  cfg.snr_db = snr_db;
  cfg.power = p;
  return cfg;
}
}  // namespace

TEST_CASE("projection parts reconstruct the raw inner product", "[receivers]") {
  const SystemConfig cfg = make_cfg(32, 4, 10.0);
  Rng ch_rng(1), noise_rng(2);
  const ChannelRealization ch = draw_channel(cfg, ch_rng);
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 0.5, 3.0;
  const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
  const TrueChannelView truth{ch.per_user, x};
  const AggregateEstimate est = ro_aggregate(rx, ch.sum_estimate, cfg.power, &truth);
  REQUIRE(est.has_diagnostics);
  const std::complex<double> direct = ch.sum_estimate.dot(rx.y);
  REQUIRE(std::abs(est.parts_sum() - direct) <= 1e-10 * std::abs(direct));
}

TEST_CASE("all-zero symbols without noise give exactly zero", "[receivers]") {
  const SystemConfig cfg = make_cfg(16, 3, 4000.0);
  Rng ch_rng(3), noise_rng(4);
  const ChannelRealization ch = draw_channel(cfg, ch_rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
  REQUIRE(ro_aggregate(rx, ch.sum_estimate, cfg.power).value == 0.0);
}

TEST_CASE("single-user estimate concentrates with hardening variance", "[receivers]") {
  // sigma^2 = 0, K = 1: estimate -> x_1 with Var ~ x_1^2 / M.
  const double x1 = 2.0;
  const SystemConfig cfg = make_cfg(256, 1, 4000.0);
  Rng ch_rng(5), noise_rng(6);
  Eigen::VectorXd x(1);
  x << x1;
  RunningStats values;
  for (int t = 0; t < 10000; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    values.add(ro_aggregate(rx, ch.sum_estimate, cfg.power).value);
  }
  REQUIRE(std::abs(values.mean() - x1) < 5.0 * values.std_error());
  REQUIRE(values.variance() == Catch::Approx(x1 * x1 / 256.0).epsilon(0.20));
}

TEST_CASE("signal and interference parts follow the variance laws", "[receivers]") {
  const int m = 64;
  const int k = 4;
  const SystemConfig cfg = make_cfg(m, k, 10.0);
  Eigen::VectorXd x(k);
  x << 1.0, -0.8, 1.2, 0.6;  // fixed symbols
  const double sum_sq = x.squaredNorm();
  Rng ch_rng(7), noise_rng(8);
  RunningStats signal_re;
  RunningComplexStats interference;
  for (int t = 0; t < 10000; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    const TrueChannelView truth{ch.per_user, x};
    const AggregateEstimate est = ro_aggregate(rx, ch.sum_estimate, cfg.power, &truth);
    signal_re.add(est.signal_part.real());
    interference.add(est.interference_part);
  }
  REQUIRE(signal_re.variance() == Catch::Approx(sum_sq / m).epsilon(0.20));
  REQUIRE(interference.variance() == Catch::Approx((k - 1) * sum_sq / m).epsilon(0.20));
}

TEST_CASE("interference power matches (K-1)K/M for unit-power symbols", "[receivers]") {
  const int m = 256;
  const int k = 8;
  const SystemConfig cfg = make_cfg(m, k, 10.0);
  Rng ch_rng(9), noise_rng(10), sym_rng(11);
  Eigen::VectorXd x(k);
  RunningComplexStats interference;
  for (int t = 0; t < 10000; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    for (int i = 0; i < k; ++i) x[i] = sym_rng.uniform01() < 0.5 ? 1.0 : -1.0;
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    const TrueChannelView truth{ch.per_user, x};
    const AggregateEstimate est = ro_aggregate(rx, ch.sum_estimate, cfg.power, &truth);
    interference.add(est.interference_part);
  }
  REQUIRE(interference.variance() ==
          Catch::Approx(static_cast<double>((k - 1) * k) / m).epsilon(0.20));
}

TEST_CASE("projection estimate is unbiased for the symbol sum", "[receivers]") {
  const SystemConfig cfg = make_cfg(64, 4, 10.0);
  Eigen::VectorXd x(4);
  x << 0.3, -1.1, 0.7, 2.0;
  Rng ch_rng(12), noise_rng(13);
  RunningStats values;
  for (int t = 0; t < 20000; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    values.add(ro_aggregate(rx, ch.sum_estimate, cfg.power).value);
  }
  REQUIRE(std::abs(values.mean() - x.sum()) <= 4.0 * values.std_error());
}

TEST_CASE("power scaling cancels between transmit and decode", "[receivers]") {
  Eigen::VectorXd x(3);
  x << 1.0, -0.5, 0.25;
  double values[2];
  int slot = 0;
  for (double p : {1.0, 4.0}) {
    SystemConfig cfg = make_cfg(32, 3, 4000.0, p);
    Rng ch_rng(14), noise_rng(15);
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    values[slot++] = ro_aggregate(rx, ch.sum_estimate, cfg.power).value;
  }
  REQUIRE(values[0] == Catch::Approx(values[1]).epsilon(1e-12));
}

TEST_CASE("mmse reduces to the scalar Wiener filter", "[receivers]") {
  const SystemConfig cfg = make_cfg(1, 1, 10.0);
  const double sigma2 = cfg.noise_variance();
  CMatrix h(1, 1);
  h(0, 0) = 1.0;
  ReceivedSymbol rx;
  rx.y.resize(1);
  rx.y[0] = std::complex<double>(0.8, 0.0);
  const MmseResult res = mmse_aggregate(rx, h, cfg.snr_linear(), 1.0);
  REQUIRE(res.per_user[0] == Catch::Approx(0.8 / (1.0 + sigma2)).epsilon(1e-12));
  REQUIRE(res.sum == Catch::Approx(res.per_user[0]));
}

TEST_CASE("mmse approaches zero forcing as noise vanishes", "[receivers]") {
  SystemConfig cfg = make_cfg(16, 4, 140.0);  // sigma^2 = 1e-14
  Rng ch_rng(16), noise_rng(17);
  const ChannelRealization ch = draw_channel(cfg, ch_rng);
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 0.5, 0.75;
  cfg.snr_db = 4000.0;  // transmit noiseless
  const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
  const MmseResult res = mmse_aggregate(rx, ch.per_user, 1e14, 1.0);
  REQUIRE((res.per_user - x).norm() < 1e-4);
}

TEST_CASE("mmse refuses a singular regularized Gram matrix", "[receivers]") {
  CMatrix h(4, 2);
  Rng rng(18);
  for (int i = 0; i < 4; ++i) h(i, 0) = rng.cgaussian(1.0);
  h.col(1) = h.col(0);  // rank deficient
  ReceivedSymbol rx;
  rx.y = CVector::Zero(4);
  const double snr_inf = std::numeric_limits<double>::infinity();  // sigma^2 = 0
  REQUIRE_THROWS_AS(mmse_aggregate(rx, h, snr_inf, 1.0), std::runtime_error);
}

TEST_CASE("sinr_analytic evaluates M/(K-1+1/SNR)", "[receivers]") {
  REQUIRE(sinr_analytic(256, 8, 10.0) == Catch::Approx(256.0 / 7.1).epsilon(1e-12));
  REQUIRE(linear_to_db(sinr_analytic(256, 8, 10.0)) == Catch::Approx(15.57).margin(0.005));
  REQUIRE(sinr_analytic(64, 1, 5.0) == Catch::Approx(64.0 * 5.0).epsilon(1e-12));
  REQUIRE(sinr_analytic(512, 8, 2.0) ==
          Catch::Approx(2.0 * sinr_analytic(256, 8, 2.0)).epsilon(1e-12));
}

TEST_CASE("empirical sinr lands within a factor of two at high snr", "[receivers]") {
  SystemConfig cfg = make_cfg(256, 8, 20.0);
  cfg.master_seed = 55;
  Rng rng(55);
  const SinrReport report = sinr_empirical(cfg, 2000, rng);
  REQUIRE_FALSE(report.denominator_degenerate);
  REQUIRE(report.empirical > 0.5 * report.analytic);
  REQUIRE(report.empirical < 2.0 * report.analytic);
}

TEST_CASE("empirical sinr guards a vanishing denominator", "[receivers]") {
  SystemConfig cfg = make_cfg(8, 1, 4000.0);  // K = 1, sigma^2 = 0
  Rng rng(56);
  const SinrReport report = sinr_empirical(cfg, 50, rng);
  REQUIRE(report.denominator_degenerate);
  REQUIRE(std::isinf(report.empirical));
}

TEST_CASE("projection decode is far cheaper than the mmse solve", "[receivers]") {
  const SystemConfig cfg = make_cfg(256, 8, 10.0);
  Rng ch_rng(57), noise_rng(58), sym_rng(59);
  std::int64_t ro_ns = 0, mmse_ns = 0;
  Eigen::VectorXd x(8);
  for (int t = 0; t < 200; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    for (int i = 0; i < 8; ++i) x[i] = sym_rng.gaussian();
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    ro_ns += ro_aggregate(rx, ch.sum_estimate, cfg.power).decode_time_ns;
    mmse_ns += mmse_aggregate(rx, ch.per_user, cfg.snr_linear(), cfg.power).decode_time_ns;
  }
  REQUIRE(ro_ns * 5 < mmse_ns);
}
