// Command-line experiment harness: NMSE sweeps, decode timing, federated
// training runs, bound tables, and the statistical selftest. Each command
// reads an optional JSON config, then applies env (AIRFL_ prefix) and flag
// overrides, and writes self-describing CSV artifacts plus a resolved-config
// sidecar.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "airfl/commands.hpp"

namespace {

airfl::Json load_config(const std::string& path) {
  if (path.empty()) return airfl::Json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  airfl::Json j;
  in >> j;
  return j;
}

// CLI11 fills bound variables during parse; the callback then merges
// config-file values for everything the command line (or env) did not set.
template <typename T>
void merge(const CLI::Option* opt, T& target, const T& parsed) {
  if (opt->count() > 0) target = parsed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"over-the-air federated learning simulator for massive MIMO uplinks"};
  app.require_subcommand(1);

  int exit_code = 0;

  // --- nmse-sweep -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("nmse-sweep",
                                   "Monte Carlo NMSE of the aggregated model estimate");
    struct Shadow {
      std::string config;
      std::uint64_t seed = 0;
      long trials = 0;
      long slots = 0;
      int threads = 0;
      int clients = 0;
      std::string out;
      std::string name;
      std::vector<int> antennas;
      std::vector<double> snr;
    };
    auto s = std::make_shared<Shadow>();
    cmd->add_option("--config", s->config, "JSON config file")->envname("AIRFL_CONFIG");
    auto* o_seed = cmd->add_option("--seed", s->seed, "master seed")->envname("AIRFL_SEED");
    auto* o_trials = cmd->add_option("--trials", s->trials, "Monte Carlo trials per cell")
                         ->envname("AIRFL_TRIALS");
    auto* o_slots = cmd->add_option("--slots", s->slots, "symbol slots per realization");
    auto* o_threads =
        cmd->add_option("--threads", s->threads, "worker threads")->envname("AIRFL_THREADS");
    auto* o_clients = cmd->add_option("--clients", s->clients, "client count K");
    auto* o_out = cmd->add_option("--out", s->out, "output directory")->envname("AIRFL_OUT");
    auto* o_name = cmd->add_option("--name", s->name, "experiment name");
    auto* o_m = cmd->add_option("--antennas", s->antennas, "antenna counts (M grid)");
    auto* o_snr = cmd->add_option("--snr", s->snr, "SNR grid in dB");
    cmd->callback([=, &exit_code]() {
      airfl::NmseSweepOptions opt;
      opt.apply(load_config(s->config));
      merge(o_seed, opt.seed, s->seed);
      merge(o_trials, opt.trials, s->trials);
      merge(o_slots, opt.slots, s->slots);
      merge(o_threads, opt.threads, s->threads);
      merge(o_clients, opt.clients, s->clients);
      merge(o_out, opt.out_dir, s->out);
      merge(o_name, opt.name, s->name);
      merge(o_m, opt.antennas, s->antennas);
      merge(o_snr, opt.snr_db, s->snr);
      const airfl::CommandOutcome outcome = airfl::cmd_nmse_sweep(opt);
      airfl::report_failures(outcome);
      exit_code = outcome.exit_code;
    });
  }

  // --- timing ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("timing", "decode-time comparison (single-threaded)");
    struct Shadow {
      std::string config;
      std::uint64_t seed = 0;
      long trials = 0;
      int clients = 0;
      double snr = 0.0;
      std::string out;
      std::string name;
      std::vector<int> antennas;
    };
    auto s = std::make_shared<Shadow>();
    cmd->add_option("--config", s->config, "JSON config file")->envname("AIRFL_CONFIG");
    auto* o_seed = cmd->add_option("--seed", s->seed, "master seed")->envname("AIRFL_SEED");
    auto* o_trials = cmd->add_option("--trials", s->trials, "decode trials per receiver")
                         ->envname("AIRFL_TRIALS");
    auto* o_clients = cmd->add_option("--clients", s->clients, "client count K");
    auto* o_snr = cmd->add_option("--snr", s->snr, "SNR in dB");
    auto* o_out = cmd->add_option("--out", s->out, "output directory")->envname("AIRFL_OUT");
    auto* o_name = cmd->add_option("--name", s->name, "experiment name");
    auto* o_m = cmd->add_option("--antennas", s->antennas, "antenna counts (M grid)");
    cmd->callback([=, &exit_code]() {
      airfl::TimingOptions opt;
      opt.apply(load_config(s->config));
      merge(o_seed, opt.seed, s->seed);
      merge(o_trials, opt.trials, s->trials);
      merge(o_clients, opt.clients, s->clients);
      merge(o_snr, opt.snr_db, s->snr);
      merge(o_out, opt.out_dir, s->out);
      merge(o_name, opt.name, s->name);
      merge(o_m, opt.antennas, s->antennas);
      const airfl::CommandOutcome outcome = airfl::cmd_timing(opt);
      airfl::report_failures(outcome);
      exit_code = outcome.exit_code;
    });
  }

  // --- train -----------------------------------------------------------------
  {
    auto* cmd =
        app.add_subcommand("train", "federated training over the simulated uplink");
    struct Shadow {
      std::string config;
      std::vector<std::uint64_t> seeds;
      std::vector<std::string> receivers;
      std::string out, name, task, images, labels;
      long rounds = 0, batch = 0, per_client = 0, test_size = 0;
      int antennas = 0, clients = 0, pilot = 0, threads = 0;
      double snr = 0.0, eta = 0.0;
    };
    auto s = std::make_shared<Shadow>();
    cmd->add_option("--config", s->config, "JSON config file")->envname("AIRFL_CONFIG");
    auto* o_seeds = cmd->add_option("--seed", s->seeds, "seed list")->envname("AIRFL_SEED");
    auto* o_recv =
        cmd->add_option("--receivers", s->receivers, "receiver list: ideal, ro, mmse");
    auto* o_out = cmd->add_option("--out", s->out, "output directory")->envname("AIRFL_OUT");
    auto* o_name = cmd->add_option("--name", s->name, "experiment name");
    auto* o_task = cmd->add_option("--task", s->task, "svm | quadratic");
    auto* o_images = cmd->add_option("--images", s->images, "IDX image file (svm task)");
    auto* o_labels = cmd->add_option("--labels", s->labels, "IDX label file (svm task)");
    auto* o_rounds = cmd->add_option("--rounds", s->rounds, "training rounds");
    auto* o_batch = cmd->add_option("--batch", s->batch, "mini-batch size (0 = full)");
    auto* o_pc = cmd->add_option("--per-client", s->per_client, "samples per client");
    auto* o_ts = cmd->add_option("--test-size", s->test_size, "held-out test samples");
    auto* o_m = cmd->add_option("--antennas", s->antennas, "antenna count M");
    auto* o_k = cmd->add_option("--clients", s->clients, "client count K");
    auto* o_pilot = cmd->add_option("--pilot-repetitions", s->pilot,
                                    "pilot repetitions (0 = perfect sum channel)");
    auto* o_snr = cmd->add_option("--snr", s->snr, "SNR in dB");
    auto* o_eta = cmd->add_option("--eta", s->eta, "constant learning rate");
    cmd->callback([=, &exit_code]() {
      airfl::TrainOptions opt;
      opt.apply(load_config(s->config));
      merge(o_seeds, opt.seeds, s->seeds);
      merge(o_recv, opt.receivers, s->receivers);
      merge(o_out, opt.out_dir, s->out);
      merge(o_name, opt.name, s->name);
      merge(o_task, opt.task, s->task);
      merge(o_images, opt.images_path, s->images);
      merge(o_labels, opt.labels_path, s->labels);
      merge(o_rounds, opt.rounds, s->rounds);
      merge(o_batch, opt.batch, s->batch);
      merge(o_pc, opt.per_client, s->per_client);
      merge(o_ts, opt.test_size, s->test_size);
      merge(o_m, opt.antennas, s->antennas);
      merge(o_k, opt.clients, s->clients);
      merge(o_pilot, opt.pilot_repetitions, s->pilot);
      merge(o_snr, opt.snr_db, s->snr);
      merge(o_eta, opt.eta, s->eta);
      const airfl::CommandOutcome outcome = airfl::cmd_train(opt);
      exit_code = outcome.exit_code;
    });
  }

  // --- bounds ----------------------------------------------------------------
  {
    auto* cmd =
        app.add_subcommand("bounds", "bound evaluators: decay curve, B grid, SINR");
    struct Shadow {
      std::string config, out, name;
      std::uint64_t seed = 0;
      long rounds = 0, trials = 0;
      int antennas = 0, clients = 0;
      double snr = 0.0;
    };
    auto s = std::make_shared<Shadow>();
    cmd->add_option("--config", s->config, "JSON config file")->envname("AIRFL_CONFIG");
    auto* o_seed = cmd->add_option("--seed", s->seed, "master seed")->envname("AIRFL_SEED");
    auto* o_out = cmd->add_option("--out", s->out, "output directory")->envname("AIRFL_OUT");
    auto* o_name = cmd->add_option("--name", s->name, "experiment name");
    auto* o_rounds = cmd->add_option("--rounds", s->rounds, "rounds T for the decay curve");
    auto* o_trials = cmd->add_option("--trials", s->trials, "SINR measurement trials")
                         ->envname("AIRFL_TRIALS");
    auto* o_m = cmd->add_option("--antennas", s->antennas, "antenna count M");
    auto* o_k = cmd->add_option("--clients", s->clients, "client count K");
    auto* o_snr = cmd->add_option("--snr", s->snr, "SNR in dB");
    cmd->callback([=, &exit_code]() {
      airfl::BoundsOptions opt;
      opt.apply(load_config(s->config));
      merge(o_seed, opt.seed, s->seed);
      merge(o_out, opt.out_dir, s->out);
      merge(o_name, opt.name, s->name);
      merge(o_rounds, opt.rounds, s->rounds);
      merge(o_trials, opt.sinr_trials, s->trials);
      merge(o_m, opt.antennas, s->antennas);
      merge(o_k, opt.clients, s->clients);
      merge(o_snr, opt.snr_db, s->snr);
      const airfl::CommandOutcome outcome = airfl::cmd_bounds(opt);
      airfl::report_failures(outcome);
      exit_code = outcome.exit_code;
    });
  }

  // --- selftest ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("selftest", "fast statistical invariant suite");
    auto opt = std::make_shared<airfl::SelftestOptions>();
    cmd->add_option("--seed", opt->seed, "selftest seed")->envname("AIRFL_SEED");
    cmd->add_flag("--inject-sign-error", opt->inject_projection_sign_error)
        ->group("");  // hidden mutation hook, used to test the selftest itself
    cmd->callback([=, &exit_code]() { exit_code = airfl::cmd_selftest(*opt); });
  }

  // --- dataset ----------------------------------------------------------------
  {
    auto* cmd =
        app.add_subcommand("dataset", "generate the deterministic digit-image IDX files");
    auto count = std::make_shared<long>(1000);
    auto seed = std::make_shared<std::uint64_t>(20240101);
    auto out_dir = std::make_shared<std::string>("data");
    auto prefix = std::make_shared<std::string>("digits");
    cmd->add_option("--count", *count, "number of samples");
    cmd->add_option("--seed", *seed, "generator seed")->envname("AIRFL_SEED");
    cmd->add_option("--out", *out_dir, "output directory")->envname("AIRFL_OUT");
    cmd->add_option("--prefix", *prefix, "file name prefix");
    cmd->callback([=]() {
      airfl::ensure_out_dir(*out_dir);
      airfl::Rng rng(*seed, airfl::StreamPurpose::datagen);
      const airfl::DigitDataset d = airfl::make_digit_images(*count, rng);
      const std::string images = *out_dir + "/" + *prefix + "-images-idx3-ubyte";
      const std::string labels = *out_dir + "/" + *prefix + "-labels-idx1-ubyte";
      airfl::save_idx_file(d.images, images);
      airfl::save_idx_file(d.labels, labels);
      std::cout << "wrote " << images << " and " << labels << "\n";
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
