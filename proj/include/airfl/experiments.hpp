#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "airfl/bounds.hpp"
#include "airfl/channel.hpp"
#include "airfl/config.hpp"
#include "airfl/dataio.hpp"
#include "airfl/fl.hpp"
#include "airfl/receivers.hpp"
#include "airfl/rng.hpp"
#include "airfl/stats.hpp"

namespace airfl {

/// Chunked parallel loop. Work item i must write only to slot i of the
/// caller's result storage; the reduction stays sequential so results do not
/// depend on the thread count.
inline void parallel_for(long n, int threads, const std::function<void(long)>& body) {
  if (threads <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (long i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::uint64_t hash_double(double v) { return std::bit_cast<std::uint64_t>(v); }

// ---------------------------------------------------------------------------
// NMSE sweep
// ---------------------------------------------------------------------------

struct SweepCell {
  int antennas = 256;
  int clients = 8;
  double snr_db = 10.0;
};

struct PairedStat {
  double mean = 0.0;
  double std_error = 0.0;
};

struct NmseCellResult {
  SweepCell cell;
  long trials = 0;
  long slots = 0;
  // sum-estimator NMSE (per-slot error power over sum power)
  double nmse_ro = 0.0;
  double nmse_mmse = 0.0;
  double nmse_ro_db = 0.0;
  double nmse_mmse_db = 0.0;
  // raw MSE means
  double mse_ro_sum = 0.0;
  double mse_mmse_sum = 0.0;
  double mse_mmse_per_user = 0.0;
  // CRLB floors averaged over realizations, both variants
  double crlb_trace = 0.0;
  double crlb_sum = 0.0;
  double denom_power = 0.0;  // E (sum_k x_k)^2
  // paired dominance margins (estimator MSE minus floor, per trial)
  PairedStat ro_vs_sum_floor;
  PairedStat mmse_vs_sum_floor;
  PairedStat mmse_user_vs_trace;
  bool failed = false;
  std::string error;
};

/// Monte Carlo NMSE for the projection receiver, the MMSE baseline, and the
/// CRLB floors at one (M, K, SNR) cell. Each trial holds one realization
/// carrying `slots` i.i.d. unit-power symbol vectors.
inline NmseCellResult run_nmse_cell(const SweepCell& cell, long trials, long slots,
                                    std::uint64_t master_seed, int threads = 1) {
  NmseCellResult result;
  result.cell = cell;
  result.trials = trials;
  result.slots = slots;
  if (trials < 1 || slots < 1) {
    result.failed = true;
    result.error = "trials and slots must be >= 1";
    return result;
  }

  SystemConfig cfg;
  cfg.antennas = cell.antennas;
  cfg.clients = cell.clients;
  cfg.snr_db = cell.snr_db;
  cfg.model_dim = 1;
  const double snr = cfg.snr_linear();
  const std::uint64_t cell_seed = Rng::derive(
      master_seed, StreamPurpose::misc,
      {static_cast<std::uint64_t>(cell.antennas), static_cast<std::uint64_t>(cell.clients),
       hash_double(cell.snr_db)});

  struct TrialRecord {
    double ro_err2 = 0.0;      // mean over slots of (sum error)^2, projection
    double mmse_err2 = 0.0;    // same for the mmse sum
    double mmse_user2 = 0.0;   // mean over slots of ||x - xhat||^2
    double sum_power = 0.0;    // mean over slots of (sum x)^2
    double floor_trace = 0.0;  // CRLB floors for this realization
    double floor_sum = 0.0;
    bool failed = false;
    std::string error;
  };
  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));

  parallel_for(trials, threads, [&](long t) {
    TrialRecord& rec = records[static_cast<std::size_t>(t)];
    try {
      Rng ch_rng(cell_seed, StreamPurpose::channel, {static_cast<std::uint64_t>(t)});
      Rng noise_rng(cell_seed, StreamPurpose::noise, {static_cast<std::uint64_t>(t)});
      Rng sym_rng(cell_seed, StreamPurpose::symbols, {static_cast<std::uint64_t>(t)});
      const ChannelRealization channel = draw_channel(cfg, ch_rng);
      const CrlbResult floors = crlb(channel.per_user, snr);
      rec.floor_trace = floors.mse_floor;
      rec.floor_sum = floors.sum_floor;
      const MmseFilter filter(channel.per_user, snr, cfg.power);
      Eigen::VectorXd x(cfg.clients);
      for (long s = 0; s < slots; ++s) {
        for (int k = 0; k < cfg.clients; ++k) x[k] = sym_rng.gaussian();
        const double true_sum = x.sum();
        const ReceivedSymbol rx = transmit(channel, x, cfg, noise_rng);
        const double ro_value = ro_aggregate(rx, channel.sum_estimate, cfg.power).value;
        const Eigen::VectorXd mmse_user = filter.apply(rx.y);
        const double mmse_sum = mmse_user.sum();
        rec.ro_err2 += (ro_value - true_sum) * (ro_value - true_sum);
        rec.mmse_err2 += (mmse_sum - true_sum) * (mmse_sum - true_sum);
        rec.mmse_user2 += (mmse_user - x).squaredNorm();
        rec.sum_power += true_sum * true_sum;
      }
      const double inv = 1.0 / static_cast<double>(slots);
      rec.ro_err2 *= inv;
      rec.mmse_err2 *= inv;
      rec.mmse_user2 *= inv;
      rec.sum_power *= inv;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  RunningStats ro_err, mmse_err, mmse_user, sum_power, trace_floor, sum_floor;
  RunningStats ro_margin, mmse_margin, user_margin;
  for (const TrialRecord& rec : records) {
    if (rec.failed) {
      result.failed = true;
      result.error = rec.error;
      continue;
    }
    ro_err.add(rec.ro_err2);
    mmse_err.add(rec.mmse_err2);
    mmse_user.add(rec.mmse_user2);
    sum_power.add(rec.sum_power);
    trace_floor.add(rec.floor_trace);
    sum_floor.add(rec.floor_sum);
    ro_margin.add(rec.ro_err2 - rec.floor_sum);
    mmse_margin.add(rec.mmse_err2 - rec.floor_sum);
    user_margin.add(rec.mmse_user2 - rec.floor_trace);
  }
  result.mse_ro_sum = ro_err.mean();
  result.mse_mmse_sum = mmse_err.mean();
  result.mse_mmse_per_user = mmse_user.mean();
  result.crlb_trace = trace_floor.mean();
  result.crlb_sum = sum_floor.mean();
  result.denom_power = sum_power.mean();
  result.nmse_ro = result.mse_ro_sum / result.denom_power;
  result.nmse_mmse = result.mse_mmse_sum / result.denom_power;
  result.nmse_ro_db = linear_to_db(result.nmse_ro);
  result.nmse_mmse_db = linear_to_db(result.nmse_mmse);
  result.ro_vs_sum_floor = {ro_margin.mean(), ro_margin.std_error()};
  result.mmse_vs_sum_floor = {mmse_margin.mean(), mmse_margin.std_error()};
  result.mmse_user_vs_trace = {user_margin.mean(), user_margin.std_error()};
  return result;
}

// ---------------------------------------------------------------------------
// Decode timing
// ---------------------------------------------------------------------------

struct TimingResult {
  int antennas = 0;
  int clients = 0;
  double snr_db = 10.0;
  long trials = 0;
  std::int64_t ro_ns = 0;
  std::int64_t mmse_ns = 0;
  double ratio() const {
    return mmse_ns > 0 ? static_cast<double>(ro_ns) / static_cast<double>(mmse_ns) : 0.0;
  }
};

/// Cumulative decode-only time over `trials` single-slot decodes per fresh
/// realization. Single-threaded by design; generation is excluded, the
/// per-trial estimator arithmetic (projection vs. Gram+solve) is timed.
inline TimingResult run_timing(int antennas, int clients, double snr_db, long trials,
                               std::uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("run_timing: trials must be >= 1");
  TimingResult result;
  result.antennas = antennas;
  result.clients = clients;
  result.snr_db = snr_db;
  result.trials = trials;

  SystemConfig cfg;
  cfg.antennas = antennas;
  cfg.clients = clients;
  cfg.snr_db = snr_db;
  const double snr = cfg.snr_linear();
  const std::uint64_t seed = Rng::derive(master_seed, StreamPurpose::misc,
                                         {static_cast<std::uint64_t>(antennas), 0x71});
  Rng ch_rng(seed, StreamPurpose::channel);
  Rng noise_rng(seed, StreamPurpose::noise);
  Rng sym_rng(seed, StreamPurpose::symbols);

  Eigen::VectorXd x(clients);
  const long warmup = std::max<long>(8, trials / 100);
  for (long t = 0; t < warmup + trials; ++t) {
    const ChannelRealization channel = draw_channel(cfg, ch_rng);
    for (int k = 0; k < clients; ++k) x[k] = sym_rng.gaussian();
    const ReceivedSymbol rx = transmit(channel, x, cfg, noise_rng);
    const AggregateEstimate ro = ro_aggregate(rx, channel.sum_estimate, cfg.power);
    const MmseResult mmse = mmse_aggregate(rx, channel.per_user, snr, cfg.power);
    if (t >= warmup) {
      result.ro_ns += ro.decode_time_ns;
      result.mmse_ns += mmse.decode_time_ns;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Theorem 1 verification
// ---------------------------------------------------------------------------

struct BoundCheckSpec {
  int antennas = 256;
  int clients = 8;
  double snr_db = 10.0;
  int runs = 100;
  long rounds = 200;
  double gamma = 3.0;  // t + gamma >= 4 keeps eta_t <= 1/(2 mu)
  long quad_dim = 20;
  long quad_samples = 40;
  double quad_condition = 5.0;
  double quad_noise = 0.05;
  double quad_lambda = 0.1;
  ReceiverKind receiver = ReceiverKind::random_orthogonalization;
  std::uint64_t master_seed = 1;
};

struct BoundCheckResult {
  BoundParams params;
  QuadraticConstants constants;
  std::vector<double> mean_gap;  // E f(w_t) - f*, index t-1
  std::vector<double> bound;     // theorem evaluator at t
  double max_gap_to_bound_ratio = 0.0;
  bool holds = false;
};

/// Runs `runs` seeded trainings of the synthetic strongly-convex task under
/// the 2/(mu (t+gamma)) schedule and compares the averaged optimality gap
/// against the T-round bound, with H measured from the runs themselves
/// (max observed mini-batch gradient norm, inflated 1.2x).
inline BoundCheckResult run_bound_check(const BoundCheckSpec& spec) {
  Rng data_rng(spec.master_seed, StreamPurpose::datagen);
  TrainTask task;
  task.objective = synth_quadratic(spec.clients, spec.quad_dim, spec.quad_samples,
                                   spec.quad_condition, data_rng, spec.quad_noise,
                                   spec.quad_lambda)
                       .objective;
  task.classification = false;

  BoundCheckResult result;
  result.constants = quadratic_constants(task.objective);

  LrSchedule schedule;
  schedule.inverse_t = true;
  schedule.mu = result.constants.mu;
  schedule.gamma = spec.gamma;

  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(spec.quad_dim);

  std::vector<RunningStats> gap(static_cast<std::size_t>(spec.rounds));
  double max_grad = 0.0;
  for (int r = 0; r < spec.runs; ++r) {
    SystemConfig cfg;
    cfg.antennas = spec.antennas;
    cfg.clients = spec.clients;
    cfg.model_dim = static_cast<int>(spec.quad_dim);
    cfg.snr_db = spec.snr_db;
    cfg.master_seed = Rng::derive(spec.master_seed, StreamPurpose::misc,
                                  {0xB0, static_cast<std::uint64_t>(r)});
    const TrainingResult run = run_training(task, cfg, spec.receiver, schedule,
                                            spec.rounds, w0, 1, 0);
    if (run.failed) throw std::runtime_error("run_bound_check: " + run.error);
    for (long t = 0; t < spec.rounds; ++t) {
      const RoundTrace& trace = run.traces[static_cast<std::size_t>(t)];
      gap[static_cast<std::size_t>(t)].add(trace.global_loss - result.constants.f_star);
      max_grad = std::max(max_grad, trace.max_grad_norm);
    }
  }

  result.params.mu = result.constants.mu;
  result.params.lip = result.constants.lip;
  result.params.grad_bound = 1.2 * max_grad;
  result.params.clients = spec.clients;
  result.params.antennas = spec.antennas;
  result.params.snr = db_to_linear(spec.snr_db);
  result.params.gamma = spec.gamma;
  result.params.w0_dist_sq = (w0 - result.constants.w_star).squaredNorm();

  result.mean_gap.resize(static_cast<std::size_t>(spec.rounds));
  result.bound.resize(static_cast<std::size_t>(spec.rounds));
  result.holds = true;
  for (long t = 1; t <= spec.rounds; ++t) {
    const double g = gap[static_cast<std::size_t>(t - 1)].mean();
    const double b = theorem1_bound(t, result.params);
    result.mean_gap[static_cast<std::size_t>(t - 1)] = g;
    result.bound[static_cast<std::size_t>(t - 1)] = b;
    result.max_gap_to_bound_ratio = std::max(result.max_gap_to_bound_ratio, g / b);
    if (g > b) result.holds = false;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Lemma 1 proof-term (channel error) verification
// ---------------------------------------------------------------------------

struct A1CheckSpec {
  int antennas = 256;
  int clients = 8;
  double snr_db = 20.0;
  long rounds = 600;
  double eta = 0.0;  // 0 => largest stable step min(1/(2 mu), 0.8/L)
  long quad_dim = 16;
  long quad_samples = 30;
  std::uint64_t master_seed = 1;
};

struct A1CheckResult {
  double mean_lhs = 0.0;   // mean ||w_{t+1} - w_bar||^2 over rounds
  double mean_rhs = 0.0;   // eta^2 (sum grad^2 / K^2) (K + 1/SNR)/M, averaged
  double ratio = 0.0;
};

/// Measures the per-round channel-error term against its closed form. The
/// task uses identical client datasets and full-batch steps so the clients'
/// differentials coincide, the regime the closed form describes.
inline A1CheckResult run_a1_check(const A1CheckSpec& spec) {
  Rng data_rng(spec.master_seed, StreamPurpose::datagen);
  const SynthQuadratic sq =
      synth_quadratic(1, spec.quad_dim, spec.quad_samples, 3.0, data_rng, 0.05, 0.1);
  TrainTask task;
  task.objective.kind = ObjectiveKind::quadratic;
  task.objective.lambda = 0.1;
  for (int k = 0; k < spec.clients; ++k) {
    task.objective.client_features.push_back(sq.objective.client_features[0]);
    task.objective.client_targets.push_back(sq.objective.client_targets[0]);
  }
  task.classification = false;
  const QuadraticConstants qc = quadratic_constants(task.objective);

  SystemConfig cfg;
  cfg.antennas = spec.antennas;
  cfg.clients = spec.clients;
  cfg.model_dim = static_cast<int>(spec.quad_dim);
  cfg.snr_db = spec.snr_db;
  cfg.master_seed = Rng::derive(spec.master_seed, StreamPurpose::misc, {0xA1});

  const double eta =
      spec.eta > 0.0 ? spec.eta : std::min(1.0 / (2.0 * qc.mu), 0.8 / qc.lip);
  const double snr = cfg.snr_linear();
  const double channel_factor =
      (static_cast<double>(spec.clients) + 1.0 / snr) / static_cast<double>(spec.antennas);

  TrainingState state;
  state.w = Eigen::VectorXd::Zero(spec.quad_dim);
  RoundOptions opt;
  opt.eta = eta;
  opt.eta_satisfies_lemma1 = eta <= 1.0 / (2.0 * qc.mu) + 1e-15;

  RunningStats lhs, rhs;
  for (long t = 1; t <= spec.rounds; ++t) {
    const RoundTrace trace =
        run_round(state, task, cfg, ReceiverKind::random_orthogonalization, opt);
    lhs.add(trace.channel_err_sq);
    const double k2 = static_cast<double>(spec.clients) * static_cast<double>(spec.clients);
    rhs.add(eta * eta * (trace.sum_grad_norm_sq / k2) * channel_factor);
  }
  A1CheckResult result;
  result.mean_lhs = lhs.mean();
  result.mean_rhs = rhs.mean();
  result.ratio = result.mean_lhs / result.mean_rhs;
  return result;
}

// ---------------------------------------------------------------------------
// Selftest
// ---------------------------------------------------------------------------

struct SelftestCheck {
  std::string name;
  double statistic = 0.0;
  std::string threshold;
  bool pass = false;
};

struct SelftestOptions {
  std::uint64_t seed = 20240001;
  bool inject_projection_sign_error = false;  // test hook for mutation sanity
};

inline std::vector<SelftestCheck> run_selftest(const SelftestOptions& opt = {}) {
  std::vector<SelftestCheck> checks;
  const double flip = opt.inject_projection_sign_error ? -1.0 : 1.0;

  {  // channel hardening variance, M * Var[h^H h] ~ 1
    SystemConfig cfg;
    cfg.antennas = 64;
    cfg.clients = 1;
    Rng rng(opt.seed, StreamPurpose::misc, {1});
    RunningStats norms;
    for (int i = 0; i < 10000; ++i)
      norms.add(draw_channel(cfg, rng).per_user.col(0).squaredNorm());
    const double stat = norms.variance() * 64.0;
    checks.push_back({"hardening_variance", stat, "in [0.8, 1.2]",
                      stat > 0.8 && stat < 1.2});
  }
  {  // favorable propagation: mean and variance of h_k^H h_j
    SystemConfig cfg;
    cfg.antennas = 64;
    cfg.clients = 2;
    Rng rng(opt.seed, StreamPurpose::misc, {2});
    RunningComplexStats cross;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const ChannelRealization ch = draw_channel(cfg, rng);
      cross.add(ch.per_user.col(0).dot(ch.per_user.col(1)));
    }
    const double mean_mag = std::abs(cross.mean());
    const double mean_limit = 3.0 * std::sqrt(1.0 / (64.0 * n));
    checks.push_back({"favorable_mean", mean_mag,
                      "<= " + std::to_string(mean_limit), mean_mag <= mean_limit});
    const double var_stat = cross.variance() * 64.0;
    checks.push_back({"favorable_variance", var_stat, "in [0.8, 1.2]",
                      var_stat > 0.8 && var_stat < 1.2});
  }
  {  // projection unbiasedness (the hook flips the decode sign)
    SystemConfig cfg;
    cfg.antennas = 64;
    cfg.clients = 4;
    cfg.snr_db = 10.0;
    Eigen::VectorXd x(4);
    x << 0.5, -1.0, 1.5, 0.25;
    Rng ch_rng(opt.seed, StreamPurpose::channel, {3});
    Rng noise_rng(opt.seed, StreamPurpose::noise, {3});
    RunningStats values;
    for (int t = 0; t < 20000; ++t) {
      const ChannelRealization ch = draw_channel(cfg, ch_rng);
      const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
      values.add(flip * ro_aggregate(rx, ch.sum_estimate, cfg.power).value);
    }
    const double deviation = std::abs(values.mean() - x.sum());
    const double limit = 4.0 * values.std_error();
    checks.push_back({"projection_unbiased", deviation, "<= " + std::to_string(limit),
                      deviation <= limit});
  }
  {  // signal/interference/noise parts reconstruct the projection
    SystemConfig cfg;
    cfg.antennas = 32;
    cfg.clients = 4;
    cfg.snr_db = 10.0;
    Rng ch_rng(opt.seed, StreamPurpose::channel, {4});
    Rng noise_rng(opt.seed, StreamPurpose::noise, {4});
    Rng sym_rng(opt.seed, StreamPurpose::symbols, {4});
    double worst = 0.0;
    Eigen::VectorXd x(4);
    for (int t = 0; t < 100; ++t) {
      const ChannelRealization ch = draw_channel(cfg, ch_rng);
      for (int k = 0; k < 4; ++k) x[k] = sym_rng.gaussian();
      const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
      const TrueChannelView truth{ch.per_user, x};
      const AggregateEstimate est = ro_aggregate(rx, ch.sum_estimate, cfg.power, &truth);
      const std::complex<double> direct = ch.sum_estimate.dot(rx.y);
      worst = std::max(worst, std::abs(est.parts_sum() - direct) / std::abs(direct));
    }
    checks.push_back({"projection_parts_identity", worst, "<= 1e-10", worst <= 1e-10});
  }
  {  // CRLB scales exactly as 1/SNR
    Rng rng(opt.seed, StreamPurpose::misc, {5});
    SystemConfig cfg;
    cfg.antennas = 32;
    cfg.clients = 4;
    const ChannelRealization ch = draw_channel(cfg, rng);
    const double f1 = crlb(ch.per_user, 2.0).mse_floor;
    const double f2 = crlb(ch.per_user, 8.0).mse_floor;
    const double stat = std::abs(f1 / f2 - 4.0);
    checks.push_back({"crlb_snr_scaling", stat, "<= 1e-12", stat <= 1e-12});
  }
  {  // B-factor monotone in antennas
    bool monotone = true;
    double prev = b_factor(8, 16, 10.0, 1.0);
    for (int m : {32, 64, 128, 256, 512}) {
      const double cur = b_factor(8, m, 10.0, 1.0);
      monotone = monotone && cur < prev;
      prev = cur;
    }
    checks.push_back({"bfactor_monotone_in_m", monotone ? 1.0 : 0.0, "== 1", monotone});
  }
  {  // (t + gamma) * bound is constant
    BoundParams p;
    p.mu = 0.7;
    p.lip = 1.9;
    p.grad_bound = 1.3;
    p.clients = 8;
    p.antennas = 128;
    p.snr = 5.0;
    p.gamma = 3.0;
    p.w0_dist_sq = 2.0;
    const double c = theorem1_bound(1, p) * (1.0 + p.gamma);
    double worst = 0.0;
    for (long t : {2L, 7L, 31L, 200L})
      worst = std::max(worst,
                       std::abs(theorem1_bound(t, p) * (t + p.gamma) - c) / c);
    checks.push_back({"theorem1_identity", worst, "<= 1e-12", worst <= 1e-12});
  }
  {  // normalization round trip
    Rng rng(opt.seed, StreamPurpose::misc, {6});
    std::vector<ModelVector> diffs;
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(16);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd x(16);
      for (long i = 0; i < 16; ++i) x[i] = rng.gaussian();
      truth += x;
      diffs.push_back(x);
    }
    const NormalizationState st = normalize_differentials(diffs);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(16);
    for (const auto& d : diffs) sum += d;
    sum /= st.scale;
    const double stat = (sum - truth).norm() / truth.norm();
    checks.push_back({"normalization_roundtrip", stat, "<= 1e-12", stat <= 1e-12});
  }
  {  // IDX round trip on random tensors
    Rng rng(opt.seed, StreamPurpose::misc, {7});
    bool ok = true;
    for (int t = 0; t < 50 && ok; ++t) {
      IdxTensor tensor;
      tensor.dtype = IdxType::u8;
      tensor.dims = {1 + static_cast<std::uint32_t>(rng.bounded(8)),
                     1 + static_cast<std::uint32_t>(rng.bounded(8))};
      tensor.payload.resize(tensor.element_count());
      for (auto& b : tensor.payload) b = static_cast<std::uint8_t>(rng.bounded(256));
      const IdxTensor back = parse_idx(serialize_idx(tensor));
      ok = back.dims == tensor.dims && back.payload == tensor.payload;
    }
    checks.push_back({"idx_roundtrip", ok ? 1.0 : 0.0, "== 1", ok});
  }
  {  // empirical SINR within a factor of two of the approximation at 20 dB
    SystemConfig cfg;
    cfg.antennas = 256;
    cfg.clients = 8;
    cfg.snr_db = 20.0;
    Rng rng(opt.seed, StreamPurpose::misc, {8});
    const SinrReport rep = sinr_empirical(cfg, 800, rng);
    const double stat = rep.empirical / rep.analytic;
    checks.push_back({"sinr_empirical_factor", stat, "in [0.5, 2.0]",
                      stat >= 0.5 && stat <= 2.0});
  }
  {  // scalar Wiener filter
    CMatrix h(1, 1);
    h(0, 0) = 1.0;
    ReceivedSymbol rx;
    rx.y.resize(1);
    rx.y[0] = std::complex<double>(1.0, 0.0);
    const double got = mmse_aggregate(rx, h, 10.0, 1.0).per_user[0];
    const double stat = std::abs(got - 1.0 / 1.1);
    checks.push_back({"mmse_scalar_wiener", stat, "<= 1e-12", stat <= 1e-12});
  }
  return checks;
}

}  // namespace airfl
