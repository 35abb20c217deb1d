#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "airfl/digits.hpp"
#include "airfl/experiments.hpp"

namespace airfl {

using Json = nlohmann::json;

/// Locale-independent, reproducible number formatting for CSV cells.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline void write_sidecar(const std::string& out_dir, const std::string& name,
                          const Json& resolved) {
  std::ofstream out(out_dir + "/" + name + ".config.json", std::ios::trunc);
  out << resolved.dump(2) << '\n';
}

inline void ensure_out_dir(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
}

template <typename T>
void maybe_get(const Json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> failures;
  std::vector<std::string> artifacts;
};

inline void report_failures(const CommandOutcome& outcome) {
  for (const auto& f : outcome.failures) std::cerr << "error: " << f << '\n';
}

// ---------------------------------------------------------------------------
// nmse-sweep
// ---------------------------------------------------------------------------

struct NmseSweepOptions {
  std::vector<int> antennas = {256, 512, 1024};
  int clients = 8;
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  long trials = 2000;
  long slots = 32;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  std::string name = "nmse_sweep";

  void apply(const Json& j) {
    maybe_get(j, "antennas", antennas);
    maybe_get(j, "clients", clients);
    maybe_get(j, "snr_db", snr_db);
    maybe_get(j, "trials", trials);
    maybe_get(j, "slots", slots);
    maybe_get(j, "seed", seed);
    maybe_get(j, "threads", threads);
    maybe_get(j, "out_dir", out_dir);
    maybe_get(j, "name", name);
  }
  Json resolved() const {
    return Json{{"command", "nmse-sweep"}, {"antennas", antennas},
                {"clients", clients},      {"snr_db", snr_db},
                {"trials", trials},        {"slots", slots},
                {"seed", seed},            {"threads", threads},
                {"out_dir", out_dir},      {"name", name}};
  }
};

inline CommandOutcome cmd_nmse_sweep(const NmseSweepOptions& opt,
                                     std::vector<NmseCellResult>* cells_out = nullptr) {
  CommandOutcome outcome;
  if (opt.trials < 1) {
    outcome.exit_code = 2;
    outcome.failures.push_back("nmse-sweep: trials must be >= 1");
    return outcome;
  }
  ensure_out_dir(opt.out_dir);
  const std::string csv_path = opt.out_dir + "/" + opt.name + ".csv";
  CsvWriter csv(csv_path);
  csv.row({"experiment", "M", "K", "snr_db", "receiver", "metric", "value", "trials",
           "seed"});

  for (int m : opt.antennas) {
    for (double snr : opt.snr_db) {
      const SweepCell cell{m, opt.clients, snr};
      const NmseCellResult res = run_nmse_cell(cell, opt.trials, opt.slots, opt.seed,
                                               opt.threads);
      if (cells_out) cells_out->push_back(res);
      if (res.failed) {
        outcome.failures.push_back("cell M=" + std::to_string(m) +
                                   " snr=" + fmt(snr) + ": " + res.error);
        continue;
      }
      auto emit = [&](const std::string& receiver, const std::string& metric, double v) {
        csv.row({opt.name, fmt(m), fmt(opt.clients), fmt(snr), receiver, metric, fmt(v),
                 fmt(opt.trials), fmt(opt.seed)});
      };
      emit("ro", "nmse_db", res.nmse_ro_db);
      emit("ro", "nmse", res.nmse_ro);
      emit("ro", "sum_mse", res.mse_ro_sum);
      emit("mmse", "nmse_db", res.nmse_mmse_db);
      emit("mmse", "nmse", res.nmse_mmse);
      emit("mmse", "sum_mse", res.mse_mmse_sum);
      emit("mmse", "per_user_mse", res.mse_mmse_per_user);
      emit("crlb", "sum_floor", res.crlb_sum);
      emit("crlb", "sum_floor_nmse_db", linear_to_db(res.crlb_sum / res.denom_power));
      emit("crlb", "trace_floor", res.crlb_trace);
      emit("crlb", "trace_floor_nmse_db", linear_to_db(res.crlb_trace / res.denom_power));
    }
  }
  outcome.artifacts.push_back(csv_path);
  write_sidecar(opt.out_dir, opt.name, opt.resolved());
  outcome.exit_code = outcome.failures.empty() ? 0 : 1;
  return outcome;
}

// ---------------------------------------------------------------------------
// timing
// ---------------------------------------------------------------------------

struct TimingOptions {
  std::vector<int> antennas = {256, 512, 1024};
  int clients = 8;
  double snr_db = 10.0;
  long trials = 2000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string name = "timing";

  void apply(const Json& j) {
    maybe_get(j, "antennas", antennas);
    maybe_get(j, "clients", clients);
    maybe_get(j, "snr_db", snr_db);
    maybe_get(j, "trials", trials);
    maybe_get(j, "seed", seed);
    maybe_get(j, "out_dir", out_dir);
    maybe_get(j, "name", name);
  }
  Json resolved() const {
    return Json{{"command", "timing"}, {"antennas", antennas}, {"clients", clients},
                {"snr_db", snr_db},    {"trials", trials},     {"seed", seed},
                {"out_dir", out_dir},  {"name", name},         {"threads", 1}};
  }
};

inline CommandOutcome cmd_timing(const TimingOptions& opt,
                                 std::vector<TimingResult>* results_out = nullptr,
                                 std::ostream& table = std::cout) {
  CommandOutcome outcome;
  if (opt.trials < 1) {
    outcome.exit_code = 2;
    outcome.failures.push_back("timing: trials must be >= 1");
    return outcome;
  }
  ensure_out_dir(opt.out_dir);
  const std::string csv_path = opt.out_dir + "/" + opt.name + ".csv";
  CsvWriter csv(csv_path);
  csv.row({"experiment", "M", "K", "snr_db", "receiver", "metric", "value", "trials",
           "seed"});

  table << "decode-only cumulative time over " << opt.trials << " trials\n";
  table << "   M        ro (s)      mmse (s)   ro/mmse\n";
  for (int m : opt.antennas) {
    const TimingResult res = run_timing(m, opt.clients, opt.snr_db, opt.trials, opt.seed);
    if (results_out) results_out->push_back(res);
    csv.row({opt.name, fmt(m), fmt(opt.clients), fmt(opt.snr_db), "ro", "cpu_time_ns",
             fmt(static_cast<std::uint64_t>(res.ro_ns)), fmt(opt.trials), fmt(opt.seed)});
    csv.row({opt.name, fmt(m), fmt(opt.clients), fmt(opt.snr_db), "mmse", "cpu_time_ns",
             fmt(static_cast<std::uint64_t>(res.mmse_ns)), fmt(opt.trials), fmt(opt.seed)});
    csv.row({opt.name, fmt(m), fmt(opt.clients), fmt(opt.snr_db), "ro_over_mmse", "ratio",
             fmt(res.ratio()), fmt(opt.trials), fmt(opt.seed)});
    char line[160];
    std::snprintf(line, sizeof line, "%5d  %12.6f  %12.6f   %6.3f%%\n", m,
                  res.ro_ns * 1e-9, res.mmse_ns * 1e-9, res.ratio() * 100.0);
    table << line;
  }
  outcome.artifacts.push_back(csv_path);
  write_sidecar(opt.out_dir, opt.name, opt.resolved());
  return outcome;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string task = "svm";  // "svm" (parity images) or "quadratic"
  // svm data: explicit IDX files, or empty to generate the deterministic
  // synthetic digit pool sized to the split below
  std::string images_path;
  std::string labels_path;
  long per_client = 500;
  long test_size = 2000;
  bool append_bias = true;
  double svm_lambda = 1e-3;
  // quadratic task parameters
  long quad_dim = 20;
  long quad_samples = 40;
  double quad_condition = 5.0;
  double quad_noise = 0.05;
  double quad_lambda = 0.1;
  // system + schedule
  int antennas = 256;
  int clients = 8;
  double snr_db = 10.0;
  int pilot_repetitions = 0;
  long rounds = 150;
  double eta = 0.05;
  bool inverse_t_schedule = false;
  double gamma = 3.0;
  int local_steps = 1;
  long batch = 50;
  std::vector<std::string> receivers = {"ideal", "ro", "mmse"};
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";
  std::string name = "train";

  void apply(const Json& j) {
    maybe_get(j, "task", task);
    maybe_get(j, "images_path", images_path);
    maybe_get(j, "labels_path", labels_path);
    maybe_get(j, "per_client", per_client);
    maybe_get(j, "test_size", test_size);
    maybe_get(j, "append_bias", append_bias);
    maybe_get(j, "svm_lambda", svm_lambda);
    maybe_get(j, "quad_dim", quad_dim);
    maybe_get(j, "quad_samples", quad_samples);
    maybe_get(j, "quad_condition", quad_condition);
    maybe_get(j, "quad_noise", quad_noise);
    maybe_get(j, "quad_lambda", quad_lambda);
    maybe_get(j, "antennas", antennas);
    maybe_get(j, "clients", clients);
    maybe_get(j, "snr_db", snr_db);
    maybe_get(j, "pilot_repetitions", pilot_repetitions);
    maybe_get(j, "rounds", rounds);
    maybe_get(j, "eta", eta);
    maybe_get(j, "inverse_t_schedule", inverse_t_schedule);
    maybe_get(j, "gamma", gamma);
    maybe_get(j, "local_steps", local_steps);
    maybe_get(j, "batch", batch);
    maybe_get(j, "receivers", receivers);
    maybe_get(j, "seeds", seeds);
    maybe_get(j, "out_dir", out_dir);
    maybe_get(j, "name", name);
  }
  Json resolved() const {
    return Json{{"command", "train"},
                {"task", task},
                {"images_path", images_path},
                {"labels_path", labels_path},
                {"per_client", per_client},
                {"test_size", test_size},
                {"append_bias", append_bias},
                {"svm_lambda", svm_lambda},
                {"quad_dim", quad_dim},
                {"quad_samples", quad_samples},
                {"quad_condition", quad_condition},
                {"quad_noise", quad_noise},
                {"quad_lambda", quad_lambda},
                {"antennas", antennas},
                {"clients", clients},
                {"snr_db", snr_db},
                {"pilot_repetitions", pilot_repetitions},
                {"rounds", rounds},
                {"eta", eta},
                {"inverse_t_schedule", inverse_t_schedule},
                {"gamma", gamma},
                {"local_steps", local_steps},
                {"batch", batch},
                {"receivers", receivers},
                {"seeds", seeds},
                {"out_dir", out_dir},
                {"name", name}};
  }
};

inline ReceiverKind parse_receiver(const std::string& token) {
  if (token == "ideal") return ReceiverKind::ideal;
  if (token == "ro" || token == "random-orthogonalization")
    return ReceiverKind::random_orthogonalization;
  if (token == "mmse") return ReceiverKind::mmse;
  throw std::invalid_argument("unknown receiver '" + token +
                              "' (expected ideal, ro, or mmse)");
}

/// Builds the per-seed task. For the svm task the labeled pool comes either
/// from the named IDX files or, with no paths, from the deterministic
/// synthetic digit generator sized to the requested split.
inline TrainTask build_train_task(const TrainOptions& opt, std::uint64_t seed) {
  TrainTask task;
  if (opt.task == "quadratic") {
    Rng rng(seed, StreamPurpose::datagen);
    task.objective = synth_quadratic(opt.clients, opt.quad_dim, opt.quad_samples,
                                     opt.quad_condition, rng, opt.quad_noise,
                                     opt.quad_lambda)
                         .objective;
    task.classification = false;
    return task;
  }
  if (opt.task != "svm" && opt.task != "svm-mnist" && opt.task != "svm-digits")
    throw std::invalid_argument("unknown task '" + opt.task +
                                "' (expected svm or quadratic)");

  LabeledDataset pool;
  if (!opt.images_path.empty() || !opt.labels_path.empty()) {
    if (opt.images_path.empty() || opt.labels_path.empty() ||
        !std::filesystem::exists(opt.images_path) ||
        !std::filesystem::exists(opt.labels_path))
      throw std::runtime_error(
          "svm task needs both IDX files; expected images at '" + opt.images_path +
          "' and labels at '" + opt.labels_path + "'");
    pool = parity_dataset(load_idx_file(opt.images_path), load_idx_file(opt.labels_path),
                          opt.append_bias);
  } else {
    const long total = opt.clients * opt.per_client + opt.test_size;
    Rng rng(seed, StreamPurpose::datagen, {0xD1});
    const DigitDataset digits = make_digit_images(total, rng);
    pool = parity_dataset(digits.images, digits.labels, opt.append_bias);
  }

  Rng split_rng(seed, StreamPurpose::split);
  FederatedSplit split =
      make_split(pool, opt.clients, opt.per_client, opt.test_size, split_rng);
  task.objective.kind = ObjectiveKind::hinge_svm;
  task.objective.lambda = opt.svm_lambda;
  for (auto& client : split.clients) {
    task.objective.client_features.push_back(std::move(client.features));
    task.objective.client_targets.push_back(std::move(client.labels));
  }
  task.test_features = std::move(split.test.features);
  task.test_labels = std::move(split.test.labels);
  task.classification = true;
  return task;
}

struct TrainRunSummary {
  std::string receiver;
  std::uint64_t seed = 0;
  long rounds = 0;
  double final_loss = 0.0;
  double final_metric = 0.0;
  bool failed = false;
  std::string error;
};

inline CommandOutcome cmd_train(const TrainOptions& opt,
                                std::vector<TrainRunSummary>* summaries_out = nullptr) {
  CommandOutcome outcome;
  ensure_out_dir(opt.out_dir);
  const std::string csv_path = opt.out_dir + "/" + opt.name + ".csv";
  CsvWriter csv(csv_path);
  csv.row({"experiment", "task", "receiver", "seed", "M", "K", "snr_db", "round", "eta",
           "global_loss", "test_metric", "agg_mse", "channel_err_sq"});

  Json summary = Json::array();
  for (std::uint64_t seed : opt.seeds) {
    TrainTask task;
    try {
      task = build_train_task(opt, seed);
    } catch (const std::exception& e) {
      outcome.failures.push_back(e.what());
      outcome.exit_code = 1;
      report_failures(outcome);
      return outcome;
    }
    for (const std::string& receiver_token : opt.receivers) {
      const ReceiverKind receiver = parse_receiver(receiver_token);
      SystemConfig cfg;
      cfg.antennas = opt.antennas;
      cfg.clients = opt.clients;
      cfg.model_dim = static_cast<int>(task.objective.dim());
      cfg.snr_db = opt.snr_db;
      cfg.pilot_repetitions = opt.pilot_repetitions;
      cfg.master_seed = seed;

      LrSchedule schedule;
      schedule.inverse_t = opt.inverse_t_schedule;
      schedule.constant_eta = opt.eta;
      schedule.gamma = opt.gamma;
      if (opt.inverse_t_schedule && opt.task == "quadratic")
        schedule.mu = quadratic_constants(task.objective).mu;

      const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(task.objective.dim());
      const TrainingResult run = run_training(task, cfg, receiver, schedule, opt.rounds,
                                              w0, opt.local_steps, opt.batch);

      TrainRunSummary s;
      s.receiver = receiver_token;
      s.seed = seed;
      s.rounds = static_cast<long>(run.traces.size());
      s.failed = run.failed;
      s.error = run.error;
      for (const RoundTrace& tr : run.traces) {
        csv.row({opt.name, opt.task, receiver_token, fmt(seed), fmt(opt.antennas),
                 fmt(opt.clients), fmt(opt.snr_db), fmt(tr.round), fmt(tr.eta),
                 fmt(tr.global_loss), fmt(tr.test_metric), fmt(tr.agg_mse),
                 fmt(tr.channel_err_sq)});
      }
      if (!run.traces.empty()) {
        s.final_loss = run.traces.back().global_loss;
        s.final_metric = run.traces.back().test_metric;
      }
      if (run.failed) {
        outcome.failures.push_back("train " + receiver_token + " seed " + fmt(seed) +
                                   ": " + run.error);
      }
      summary.push_back(Json{{"receiver", s.receiver},
                             {"seed", s.seed},
                             {"rounds", s.rounds},
                             {"final_loss", s.final_loss},
                             {"final_metric", s.final_metric},
                             {"failed", s.failed}});
      if (summaries_out) summaries_out->push_back(s);
    }
  }
  outcome.artifacts.push_back(csv_path);
  {
    std::ofstream out(opt.out_dir + "/" + opt.name + ".summary.json", std::ios::trunc);
    out << summary.dump(2) << '\n';
  }
  write_sidecar(opt.out_dir, opt.name, opt.resolved());
  outcome.exit_code = outcome.failures.empty() ? 0 : 1;
  report_failures(outcome);
  return outcome;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsOptions {
  long rounds = 200;
  double gamma = 3.0;
  // explicit bound parameters; grad_bound <= 0 means "derive from the
  // synthetic quadratic task"
  double mu = 0.0;
  double lip = 0.0;
  double grad_bound = 0.0;
  double w0_dist_sq = 0.0;
  int antennas = 256;
  int clients = 8;
  double snr_db = 10.0;
  long quad_dim = 20;
  long quad_samples = 40;
  double quad_condition = 5.0;
  double quad_noise = 0.05;
  double quad_lambda = 0.1;
  std::vector<int> grid_antennas = {8, 64, 256, 1024};
  std::vector<int> grid_clients = {1, 8, 64, 1024};
  std::vector<double> grid_snr_db = {0.0, 10.0, 20.0};
  long sinr_trials = 2000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string name = "bounds";

  void apply(const Json& j) {
    maybe_get(j, "rounds", rounds);
    maybe_get(j, "gamma", gamma);
    maybe_get(j, "mu", mu);
    maybe_get(j, "lip", lip);
    maybe_get(j, "grad_bound", grad_bound);
    maybe_get(j, "w0_dist_sq", w0_dist_sq);
    maybe_get(j, "antennas", antennas);
    maybe_get(j, "clients", clients);
    maybe_get(j, "snr_db", snr_db);
    maybe_get(j, "quad_dim", quad_dim);
    maybe_get(j, "quad_samples", quad_samples);
    maybe_get(j, "quad_condition", quad_condition);
    maybe_get(j, "quad_noise", quad_noise);
    maybe_get(j, "quad_lambda", quad_lambda);
    maybe_get(j, "grid_antennas", grid_antennas);
    maybe_get(j, "grid_clients", grid_clients);
    maybe_get(j, "grid_snr_db", grid_snr_db);
    maybe_get(j, "sinr_trials", sinr_trials);
    maybe_get(j, "seed", seed);
    maybe_get(j, "out_dir", out_dir);
    maybe_get(j, "name", name);
  }
  Json resolved() const {
    return Json{{"command", "bounds"},
                {"rounds", rounds},
                {"gamma", gamma},
                {"mu", mu},
                {"lip", lip},
                {"grad_bound", grad_bound},
                {"w0_dist_sq", w0_dist_sq},
                {"antennas", antennas},
                {"clients", clients},
                {"snr_db", snr_db},
                {"quad_dim", quad_dim},
                {"quad_samples", quad_samples},
                {"quad_condition", quad_condition},
                {"quad_noise", quad_noise},
                {"quad_lambda", quad_lambda},
                {"grid_antennas", grid_antennas},
                {"grid_clients", grid_clients},
                {"grid_snr_db", grid_snr_db},
                {"sinr_trials", sinr_trials},
                {"seed", seed},
                {"out_dir", out_dir},
                {"name", name}};
  }
};

inline CommandOutcome cmd_bounds(const BoundsOptions& opt) {
  CommandOutcome outcome;
  ensure_out_dir(opt.out_dir);
  const std::string csv_path = opt.out_dir + "/" + opt.name + ".csv";
  CsvWriter csv(csv_path);
  csv.row({"experiment", "section", "M", "K", "snr_db", "t", "metric", "value", "seed"});

  BoundParams params;
  params.gamma = opt.gamma;
  params.clients = opt.clients;
  params.antennas = opt.antennas;
  params.snr = db_to_linear(opt.snr_db);
  if (opt.grad_bound > 0.0) {
    params.mu = opt.mu;
    params.lip = opt.lip;
    params.grad_bound = opt.grad_bound;
    params.w0_dist_sq = opt.w0_dist_sq;
  } else {
    Rng rng(opt.seed, StreamPurpose::datagen);
    const SynthQuadratic sq =
        synth_quadratic(opt.clients, opt.quad_dim, opt.quad_samples, opt.quad_condition,
                        rng, opt.quad_noise, opt.quad_lambda);
    const QuadraticConstants qc = quadratic_constants(sq.objective);
    params.mu = qc.mu;
    params.lip = qc.lip;
    params.w0_dist_sq = qc.w_star.squaredNorm();  // w0 = 0
    // conservative gradient bound from the planted geometry
    double max_norm = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(opt.quad_samples));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int k = 0; k < opt.clients; ++k)
      max_norm = std::max(max_norm, minibatch_gradient(sq.objective, k,
                                                       Eigen::VectorXd::Zero(opt.quad_dim),
                                                       idx)
                                        .norm());
    params.grad_bound = 1.2 * max_norm;
  }

  for (long t = 1; t <= opt.rounds; ++t) {
    csv.row({opt.name, "theorem1", fmt(opt.antennas), fmt(opt.clients), fmt(opt.snr_db),
             fmt(t), "bound", fmt(theorem1_bound(t, params)), fmt(opt.seed)});
    const LearningRate lr = learning_rate(t, params.mu, params.gamma);
    csv.row({opt.name, "theorem1", fmt(opt.antennas), fmt(opt.clients), fmt(opt.snr_db),
             fmt(t), "eta", fmt(lr.eta), fmt(opt.seed)});
    if (!lr.satisfies_lemma1)
      csv.row({opt.name, "theorem1", fmt(opt.antennas), fmt(opt.clients),
               fmt(opt.snr_db), fmt(t), "eta_violates_lemma1", "1", fmt(opt.seed)});
  }

  for (int k : opt.grid_clients)
    for (int m : opt.grid_antennas)
      for (double snr : opt.grid_snr_db) {
        const double b = b_factor(k, m, db_to_linear(snr), params.grad_bound);
        const double ref = params.grad_bound * params.grad_bound / k;
        csv.row({opt.name, "b_factor", fmt(m), fmt(k), fmt(snr), "0", "b", fmt(b),
                 fmt(opt.seed)});
        csv.row({opt.name, "b_factor", fmt(m), fmt(k), fmt(snr), "0", "b_over_hsq_k",
                 fmt(b / ref), fmt(opt.seed)});
      }

  {
    SystemConfig cfg;
    cfg.antennas = opt.antennas;
    cfg.clients = opt.clients;
    cfg.snr_db = opt.snr_db;
    Rng rng(opt.seed, StreamPurpose::misc, {0x51});
    const SinrReport rep = sinr_empirical(cfg, opt.sinr_trials, rng);
    auto emit = [&](const char* metric, double v) {
      csv.row({opt.name, "sinr", fmt(opt.antennas), fmt(opt.clients), fmt(opt.snr_db),
               "0", metric, fmt(v), fmt(opt.seed)});
    };
    emit("analytic", rep.analytic);
    emit("analytic_db", linear_to_db(rep.analytic));
    emit("empirical", rep.empirical);
    if (rep.empirical > 0.0 && std::isfinite(rep.empirical))
      emit("empirical_db", linear_to_db(rep.empirical));
    // both printed forms of the high-SNR interference limit; the reciprocal
    // convention appears in some write-ups
    emit("sir_limit", static_cast<double>(opt.antennas) / (opt.clients - 1 + 1e-300));
    emit("sir_limit_reciprocal",
         static_cast<double>(opt.clients - 1) / static_cast<double>(opt.antennas));
  }

  outcome.artifacts.push_back(csv_path);
  write_sidecar(opt.out_dir, opt.name, opt.resolved());
  return outcome;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

inline int cmd_selftest(const SelftestOptions& opt = {}, std::ostream& out = std::cout) {
  const std::vector<SelftestCheck> checks = run_selftest(opt);
  bool all_pass = true;
  for (const SelftestCheck& c : checks) {
    all_pass = all_pass && c.pass;
    char line[256];
    std::snprintf(line, sizeof line, "[%s] %-28s statistic=%.6g threshold %s\n",
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.statistic,
                  c.threshold.c_str());
    out << line;
  }
  out << (all_pass ? "selftest: all checks passed\n" : "selftest: FAILURES present\n");
  return all_pass ? 0 : 1;
}

}  // namespace airfl
