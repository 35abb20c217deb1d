#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "airfl/bounds.hpp"
#include "airfl/channel.hpp"
#include "airfl/config.hpp"
#include "airfl/objectives.hpp"
#include "airfl/receivers.hpp"
#include "airfl/rng.hpp"

namespace airfl {

using ModelVector = Eigen::VectorXd;

enum class ReceiverKind { ideal, random_orthogonalization, mmse };

inline const char* receiver_name(ReceiverKind r) {
  switch (r) {
    case ReceiverKind::ideal: return "ideal";
    case ReceiverKind::random_orthogonalization: return "ro";
    case ReceiverKind::mmse: return "mmse";
  }
  return "?";
}

/// Per-round record: what was transmitted (summed), what the receiver
/// produced, and the derived error/learning diagnostics.
struct RoundTrace {
  long round = 0;  // t, 1-based
  double eta = 0.0;
  bool eta_satisfies_lemma1 = true;
  Eigen::VectorXd true_sum;  // sum_k x^k per slot, length d
  Eigen::VectorXd est_sum;   // receiver estimate of the same
  double agg_mse = 0.0;          // ||est - true||^2 / d
  double channel_err_sq = 0.0;   // ||w_{t+1} - w_bar_{t+1}||^2 = ||est - true||^2 / K^2
  double sum_diff_norm_sq = 0.0; // sum_k ||x^k||^2
  double sum_grad_norm_sq = 0.0; // sum_k ||grad_k(w_t)||^2 at the first local step
  double max_grad_norm = 0.0;    // max over clients/steps of the minibatch gradient norm
  double global_loss = 0.0;
  double test_metric = 0.0;  // accuracy for classification, loss otherwise
  std::int64_t decode_time_ns = 0;
};

/// Common per-round amplitude scale. Clients report their differential
/// powers error-free; everyone scales by the same nu so the over-the-air sum
/// is preserved and mean symbol power across clients is one.
struct NormalizationState {
  double scale = 1.0;                // nu_t
  Eigen::VectorXd reported_powers;   // per-client mean per-element power of x^k
};

inline NormalizationState normalize_differentials(std::vector<ModelVector>& differentials) {
  if (differentials.empty())
    throw std::invalid_argument("normalize_differentials: no clients");
  NormalizationState state;
  const int clients = static_cast<int>(differentials.size());
  const long dim = differentials[0].size();
  state.reported_powers.resize(clients);
  double total_power = 0.0;
  for (int k = 0; k < clients; ++k) {
    if (differentials[k].size() != dim)
      throw std::invalid_argument("normalize_differentials: inconsistent dimensions");
    const double p = differentials[k].squaredNorm() / static_cast<double>(dim);
    state.reported_powers[k] = p;
    total_power += p;
  }
  const double mean_power = total_power / static_cast<double>(clients);
  state.scale = mean_power > 0.0 ? 1.0 / std::sqrt(mean_power) : 1.0;
  if (state.scale != 1.0)
    for (auto& d : differentials) d *= state.scale;
  return state;
}

struct LocalUpdateResult {
  ModelVector w;
  double max_grad_norm = 0.0;
  double first_step_grad_norm = 0.0;
};

/// E steps of mini-batch SGD from the broadcast model. Batches are taken
/// without replacement within an epoch (fresh shuffle per epoch); a
/// batch_size of 0 means full batch, which consumes no randomness.
inline LocalUpdateResult local_update(const Objective& obj, int client,
                                      const ModelVector& w_global, int local_steps,
                                      double eta, long batch_size, Rng& rng) {
  if (local_steps < 1) throw std::invalid_argument("local_update: local_steps must be >= 1");
  if (eta < 0.0) throw std::invalid_argument("local_update: eta must be >= 0");
  const long n = obj.client_features.at(client).rows();
  if (n < 1) throw std::invalid_argument("local_update: empty client dataset");
  const bool full_batch = batch_size <= 0 || batch_size >= n;

  LocalUpdateResult out;
  out.w = w_global;

  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  if (full_batch) {
    order.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }

  for (int step = 0; step < local_steps; ++step) {
    std::span<const std::size_t> batch;
    if (full_batch) {
      batch = std::span<const std::size_t>(order);
    } else {
      if (cursor + static_cast<std::size_t>(batch_size) > static_cast<std::size_t>(n) ||
          step == 0) {
        order.resize(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        cursor = 0;
      }
      batch = std::span<const std::size_t>(order).subspan(cursor,
                                                          static_cast<std::size_t>(batch_size));
      cursor += static_cast<std::size_t>(batch_size);
    }
    const Eigen::VectorXd grad = minibatch_gradient(obj, client, out.w, batch);
    const double gnorm = grad.norm();
    out.max_grad_norm = std::max(out.max_grad_norm, gnorm);
    if (step == 0) out.first_step_grad_norm = gnorm;
    out.w -= eta * grad;
  }
  return out;
}

/// The task driven by the engine: client objectives plus an optional
/// held-out evaluation set.
struct TrainTask {
  Objective objective;
  Eigen::MatrixXd test_features;  // may be empty
  Eigen::VectorXd test_labels;
  bool classification = false;

  void validate() const {
    objective.validate();
    if (test_features.rows() != test_labels.size())
      throw std::invalid_argument("TrainTask: test set size mismatch");
  }
};

struct RoundOptions {
  double eta = 0.1;
  bool eta_satisfies_lemma1 = true;
  int local_steps = 1;   // E
  long batch_size = 0;   // 0 => full batch
};

struct TrainingState {
  ModelVector w;
  long next_round = 1;
};

// Stream layout per round. Data/SGD draws are shared across receivers;
// channel, noise, and pilot draws are receiver-specific.
namespace detail {
inline Rng sgd_stream(std::uint64_t master, long round, int client) {
  return Rng(master, StreamPurpose::sgd,
             {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(client)});
}
inline Rng channel_stream(std::uint64_t master, ReceiverKind r, long round) {
  return Rng(master, StreamPurpose::channel,
             {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(round)});
}
inline Rng noise_stream(std::uint64_t master, ReceiverKind r, long round) {
  return Rng(master, StreamPurpose::noise,
             {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(round)});
}
inline Rng pilot_stream(std::uint64_t master, ReceiverKind r, long round) {
  return Rng(master, StreamPurpose::pilot,
             {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(round)});
}
}  // namespace detail

/// One synchronous round: broadcast, K local updates, common-scale
/// normalization, d-slot uplink over one channel realization, receiver
/// decode, de-normalization, and the global update
/// w_{t+1} = w_t + (1/K) * est_sum.
///
/// Sign convention: the transmitted differential is x^k = w^k_{t+1} - w_t,
/// so with an exact sum the update equals the plain average of the local
/// models.
inline RoundTrace run_round(TrainingState& state, const TrainTask& task,
                            const SystemConfig& cfg, ReceiverKind receiver,
                            const RoundOptions& opt) {
  cfg.validate();
  const int clients = task.objective.num_clients();
  if (clients != cfg.clients)
    throw std::invalid_argument("run_round: objective client count does not match config");
  const long dim = state.w.size();
  if (dim != task.objective.dim())
    throw std::invalid_argument("run_round: model dimension does not match objective");

  RoundTrace trace;
  trace.round = state.next_round;
  trace.eta = opt.eta;
  trace.eta_satisfies_lemma1 = opt.eta_satisfies_lemma1;

  // local computation
  std::vector<ModelVector> diffs(static_cast<std::size_t>(clients));
  for (int k = 0; k < clients; ++k) {
    Rng sgd = detail::sgd_stream(cfg.master_seed, trace.round, k);
    LocalUpdateResult local = local_update(task.objective, k, state.w, opt.local_steps,
                                           opt.eta, opt.batch_size, sgd);
    diffs[static_cast<std::size_t>(k)] = local.w - state.w;
    trace.max_grad_norm = std::max(trace.max_grad_norm, local.max_grad_norm);
    trace.sum_grad_norm_sq += local.first_step_grad_norm * local.first_step_grad_norm;
  }

  trace.true_sum = Eigen::VectorXd::Zero(dim);
  for (const auto& d : diffs) trace.true_sum += d;
  for (const auto& d : diffs) trace.sum_diff_norm_sq += d.squaredNorm();

  const NormalizationState norm = normalize_differentials(diffs);

  // uplink + receiver computation on the normalized symbols
  Eigen::VectorXd est_scaled(dim);
  if (receiver == ReceiverKind::ideal) {
    const auto start = std::chrono::steady_clock::now();
    est_scaled.setZero();
    for (const auto& d : diffs) est_scaled += d;
    trace.decode_time_ns = detail::elapsed_ns(start);
  } else {
    Rng ch_rng = detail::channel_stream(cfg.master_seed, receiver, trace.round);
    Rng pilot_rng = detail::pilot_stream(cfg.master_seed, receiver, trace.round);
    Rng noise_rng = detail::noise_stream(cfg.master_seed, receiver, trace.round);
    const ChannelRealization channel =
        draw_channel(cfg, ch_rng, cfg.pilot_repetitions > 0 ? &pilot_rng : nullptr);

    Eigen::VectorXd symbols(clients);
    if (receiver == ReceiverKind::random_orthogonalization) {
      for (long i = 0; i < dim; ++i) {
        for (int k = 0; k < clients; ++k) symbols[k] = diffs[static_cast<std::size_t>(k)][i];
        const ReceivedSymbol rx = transmit(channel, symbols, cfg, noise_rng,
                                           static_cast<int>(i) + 1);
        const AggregateEstimate est = ro_aggregate(rx, channel.sum_estimate, cfg.power);
        est_scaled[i] = est.value;
        trace.decode_time_ns += est.decode_time_ns;
      }
    } else {
      const auto filter_start = std::chrono::steady_clock::now();
      const MmseFilter filter(channel.per_user, cfg.snr_linear(), cfg.power);
      trace.decode_time_ns += detail::elapsed_ns(filter_start);
      for (long i = 0; i < dim; ++i) {
        for (int k = 0; k < clients; ++k) symbols[k] = diffs[static_cast<std::size_t>(k)][i];
        const ReceivedSymbol rx = transmit(channel, symbols, cfg, noise_rng,
                                           static_cast<int>(i) + 1);
        const auto start = std::chrono::steady_clock::now();
        est_scaled[i] = filter.apply(rx.y).sum();
        trace.decode_time_ns += detail::elapsed_ns(start);
      }
    }
  }

  trace.est_sum = est_scaled / norm.scale;

  const Eigen::VectorXd err = trace.est_sum - trace.true_sum;
  trace.agg_mse = err.squaredNorm() / static_cast<double>(dim);
  trace.channel_err_sq =
      err.squaredNorm() / (static_cast<double>(clients) * static_cast<double>(clients));

  state.w += trace.est_sum / static_cast<double>(clients);
  state.next_round += 1;

  trace.global_loss = global_loss(task.objective, state.w);
  if (task.test_features.rows() > 0) {
    trace.test_metric = task.classification
                            ? accuracy(state.w, task.test_features, task.test_labels)
                            : loss(task.objective, state.w, task.test_features,
                                   task.test_labels);
  } else {
    trace.test_metric = trace.global_loss;
  }
  return trace;
}

/// Learning-rate schedule: either a constant or eta_t = 2 / (mu (t + gamma)).
struct LrSchedule {
  bool inverse_t = false;
  double constant_eta = 0.1;
  double mu = 1.0;
  double gamma = 0.0;

  LearningRate at(long round) const {
    if (!inverse_t) {
      LearningRate lr;
      lr.eta = constant_eta;
      lr.satisfies_lemma1 = constant_eta <= 1.0 / (2.0 * mu) + 1e-15;
      return lr;
    }
    return learning_rate(round, mu, gamma);
  }
};

struct TrainingResult {
  std::vector<RoundTrace> traces;
  TrainingState final_state;
  bool failed = false;
  std::string error;
};

/// Runs T rounds; deterministic under (cfg.master_seed, task, options).
/// A receiver failure stops the run, keeping the partial trace.
inline TrainingResult run_training(const TrainTask& task, const SystemConfig& cfg,
                                   ReceiverKind receiver, const LrSchedule& schedule,
                                   long rounds, const ModelVector& w0,
                                   int local_steps = 1, long batch_size = 0) {
  task.validate();
  TrainingResult result;
  result.final_state.w = w0;
  result.final_state.next_round = 1;
  result.traces.reserve(static_cast<std::size_t>(rounds));
  for (long t = 1; t <= rounds; ++t) {
    const LearningRate lr = schedule.at(t);
    RoundOptions opt;
    opt.eta = lr.eta;
    opt.eta_satisfies_lemma1 = lr.satisfies_lemma1;
    opt.local_steps = local_steps;
    opt.batch_size = batch_size;
    try {
      result.traces.push_back(run_round(result.final_state, task, cfg, receiver, opt));
    } catch (const std::exception& e) {
      result.failed = true;
      result.error = "round " + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return result;
}

}  // namespace airfl
