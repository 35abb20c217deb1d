// Acceptance suite. One test case per criterion; each prints a single
// [PASS]/[FAIL] line with the governing statistics before asserting.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "airfl/commands.hpp"
#include "airfl/experiments.hpp"

using namespace airfl;

namespace {

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] C%02d %s: %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("airfl_acc_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// The full NMSE sweep shared by criteria 3 and 4 (paper grid, 2000 trials).
const std::vector<NmseCellResult>& shared_sweep() {
  static const std::vector<NmseCellResult> cells = [] {
    std::vector<NmseCellResult> out;
    for (int m : {256, 512, 1024})
      for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0})
        out.push_back(run_nmse_cell(SweepCell{m, 8, snr}, 2000, 32, 99001, 1));
    return out;
  }();
  return cells;
}

const NmseCellResult& cell_at(const std::vector<NmseCellResult>& cells, int m, double snr) {
  for (const auto& c : cells)
    if (c.cell.antennas == m && c.cell.snr_db == snr) return c;
  throw std::logic_error("missing sweep cell");
}

}  // namespace

TEST_CASE("unbiased aggregation at the paper operating point", "[c01_unbiased_aggregation]") {
  const auto start = std::chrono::steady_clock::now();
  SystemConfig cfg;
  cfg.antennas = 256;
  cfg.clients = 8;
  cfg.snr_db = 10.0;
  Eigen::VectorXd x(8);
  x << 1.0, -0.5, 0.25, 2.0, -1.5, 0.75, 0.1, -0.3;
  const double truth = x.sum();
  Rng ch_rng(701, StreamPurpose::channel);
  Rng noise_rng(701, StreamPurpose::noise);
  RunningStats values;
  for (long t = 0; t < 100000; ++t) {
    const ChannelRealization ch = draw_channel(cfg, ch_rng);
    const ReceivedSymbol rx = transmit(ch, x, cfg, noise_rng);
    values.add(ro_aggregate(rx, ch.sum_estimate, cfg.power).value);
  }
  const double deviation = std::abs(values.mean() - truth);
  const double limit = 4.0 * values.std_error();
  const double seconds = elapsed_s(start);
  const bool pass = deviation <= limit && seconds < 30.0;
  report(1, "unbiased aggregation",
         pass, "|mean-sum|=" + fmt2(deviation) + " <= 4se=" + fmt2(limit) +
                   ", runtime=" + fmt2(seconds) + "s < 30s");
  REQUIRE(deviation <= limit);
  REQUIRE(seconds < 30.0);
}

TEST_CASE("signal and interference variance laws", "[c02_variance_laws]") {
  bool all_pass = true;
  std::string detail;
  for (auto [m, k] : std::vector<std::pair<int, int>>{{64, 4}, {256, 8}}) {
    SystemConfig cfg;
    cfg.antennas = m;
    cfg.clients = k;
    cfg.snr_db = 10.0;
    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i) x[i] = 0.5 + 0.25 * i;
    const double sum_sq = x.squaredNorm();
    Rng ch_rng(702, StreamPurpose::channel, {static_cast<std::uint64_t>(m)});
    Rng noise_rng(702, StreamPurpose::noise, {static_cast<std::uint64_t>(m)});
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
    const double sig_ratio = signal_re.variance() / (sum_sq / m);
    const double int_ratio = interference.variance() / ((k - 1) * sum_sq / m);
    const bool pass = sig_ratio > 0.8 && sig_ratio < 1.2 && int_ratio > 0.8 &&
                      int_ratio < 1.2;
    all_pass = all_pass && pass;
    detail += "(M=" + std::to_string(m) + ",K=" + std::to_string(k) +
              ") signal/law=" + fmt2(sig_ratio) + " interference/law=" + fmt2(int_ratio) +
              "  ";
    CHECK(sig_ratio == Catch::Approx(1.0).epsilon(0.20));
    CHECK(int_ratio == Catch::Approx(1.0).epsilon(0.20));
  }
  report(2, "variance laws (signal, interference)", all_pass, detail);
  REQUIRE(all_pass);
}

TEST_CASE("nmse parity at low and moderate snr", "[c03_nmse_parity]") {
  const auto& cells = shared_sweep();
  bool all_pass = true;
  std::string detail;
  for (int m : {256, 512, 1024}) {
    for (double snr : {0.0, 5.0, 10.0}) {
      const NmseCellResult& c = cell_at(cells, m, snr);
      REQUIRE_FALSE(c.failed);
      const double gap = std::abs(c.nmse_ro_db - c.nmse_mmse_db);
      const bool pass = gap <= 1.5;
      all_pass = all_pass && pass;
      if (!pass || snr == 10.0)
        detail += "M=" + std::to_string(m) + "@" + fmt2(snr) + "dB gap=" + fmt2(gap) + "dB  ";
      CHECK(gap <= 1.5);
    }
  }
  report(3, "nmse parity (snr <= 12 dB, |gap| <= 1.5 dB)", all_pass, detail);
  REQUIRE(all_pass);
}

TEST_CASE("high-snr gap magnitude and trend", "[c04_high_snr_gap]") {
  const auto& cells = shared_sweep();
  std::map<int, double> gap;
  for (int m : {256, 512, 1024}) {
    const NmseCellResult& c = cell_at(cells, m, 20.0);
    REQUIRE_FALSE(c.failed);
    gap[m] = c.nmse_ro_db - c.nmse_mmse_db;
  }
  const bool in_window_256 = gap[256] >= 3.5 && gap[256] <= 6.5;
  const bool in_window_1024 = gap[1024] >= 1.0 && gap[1024] <= 3.0;
  const bool monotone = gap[256] >= gap[512] && gap[512] >= gap[1024];
  const bool pass = in_window_256 && in_window_1024 && monotone;
  report(4, "high-snr gap trend",
         pass, "gap@20dB: M256=" + fmt2(gap[256]) + "dB (want [3.5,6.5]), M512=" +
                   fmt2(gap[512]) + "dB, M1024=" + fmt2(gap[1024]) +
                   "dB (want [1,3]), nonincreasing=" + (monotone ? "yes" : "no"));
  REQUIRE(in_window_256);
  REQUIRE(in_window_1024);
  REQUIRE(monotone);
}

TEST_CASE("crlb dominance and exact snr scaling", "[c05_crlb_dominance]") {
  // dominance on the near-unbiased grid; at lower SNR the Bayes shrinkage of
  // the MMSE baseline legitimately undercuts the unbiased-estimator floor
  bool all_pass = true;
  std::string detail;
  double worst_z = std::numeric_limits<double>::infinity();
  for (int m : {256, 512, 1024}) {
    for (double snr : {12.0, 16.0, 20.0}) {
      const NmseCellResult c = run_nmse_cell(SweepCell{m, 8, snr}, 2000, 32, 99005, 1);
      REQUIRE_FALSE(c.failed);
      for (const PairedStat& margin :
           {c.ro_vs_sum_floor, c.mmse_vs_sum_floor, c.mmse_user_vs_trace}) {
        const double z = margin.std_error > 0.0 ? margin.mean / margin.std_error
                                                : std::numeric_limits<double>::infinity();
        worst_z = std::min(worst_z, z);
        const bool pass = margin.mean >= -2.0 * margin.std_error;
        all_pass = all_pass && pass;
        CHECK(margin.mean >= -2.0 * margin.std_error);
      }
    }
  }
  detail = "worst margin z-score=" + fmt2(worst_z) + " (violation needs z < -2)";

  // algebraic scaling test: floors scale exactly as 1/SNR
  Rng rng(99006);
  SystemConfig cfg;
  cfg.antennas = 64;
  cfg.clients = 8;
  const ChannelRealization ch = draw_channel(cfg, rng);
  const double f1 = crlb(ch.per_user, 3.0).mse_floor;
  const double f2 = crlb(ch.per_user, 30.0).mse_floor;
  const double scaling_err = std::abs(f1 / f2 - 10.0);
  const bool scaling_ok = scaling_err <= 1e-10;
  all_pass = all_pass && scaling_ok;
  detail += ", 1/SNR scaling residual=" + fmt2(scaling_err);
  report(5, "crlb dominance", all_pass, detail);
  REQUIRE(scaling_ok);
  REQUIRE(all_pass);
}

TEST_CASE("decode timing ratio and trend", "[c06_timing]") {
  std::map<int, double> ratio;
  for (int m : {256, 512, 1024}) {
    const TimingResult r = run_timing(m, 8, 10.0, 2000, 99007);
    ratio[m] = r.ratio();
  }
  const bool under_ceiling = ratio[256] < 0.10 && ratio[512] < 0.10 && ratio[1024] < 0.10;
  const bool nonincreasing = ratio[256] >= ratio[512] && ratio[512] >= ratio[1024];
  const bool pass = under_ceiling && nonincreasing;
  report(6, "decode timing",
         pass, "ro/mmse: M256=" + fmt2(100 * ratio[256]) + "% M512=" +
                   fmt2(100 * ratio[512]) + "% M1024=" + fmt2(100 * ratio[1024]) +
                   "% (ceiling 10%, nonincreasing=" + (nonincreasing ? "yes" : "no") + ")");
  REQUIRE(under_ceiling);
  REQUIRE(nonincreasing);
}

TEST_CASE("theorem-1 curve dominates the averaged gap", "[c07_theorem1_bound]") {
  const auto start = std::chrono::steady_clock::now();
  bool all_pass = true;
  std::string detail;
  for (auto [m, k, snr] : std::vector<std::tuple<int, int, double>>{
           {256, 8, 10.0}, {64, 16, 0.0}}) {
    BoundCheckSpec spec;
    spec.antennas = m;
    spec.clients = k;
    spec.snr_db = snr;
    spec.runs = 100;
    spec.rounds = 200;
    spec.gamma = 3.0;
    spec.master_seed = 99008;
    const BoundCheckResult res = run_bound_check(spec);
    all_pass = all_pass && res.holds;
    detail += "(M=" + std::to_string(m) + ",K=" + std::to_string(k) + "," + fmt2(snr) +
              "dB) max gap/bound=" + fmt2(res.max_gap_to_bound_ratio) + "  ";
    CHECK(res.holds);
  }
  const double seconds = elapsed_s(start);
  const bool in_time = seconds < 600.0;
  detail += "runtime=" + fmt2(seconds) + "s";
  report(7, "theorem-1 bound holds for t in [1,200]", all_pass && in_time, detail);
  REQUIRE(all_pass);
  REQUIRE(in_time);
}

TEST_CASE("lemma-1 proof term matches its closed form", "[c08_lemma1_proof_term]") {
  A1CheckSpec spec;
  spec.antennas = 256;
  spec.clients = 8;
  spec.snr_db = 20.0;
  spec.rounds = 600;
  spec.master_seed = 99009;
  const A1CheckResult res = run_a1_check(spec);
  const bool pass = res.ratio >= 0.75 && res.ratio <= 1.25;
  report(8, "lemma-1 channel-error term",
         pass, "mean lhs/rhs=" + fmt2(res.ratio) + " over 600 rounds (want within 25%)");
  REQUIRE(res.ratio >= 0.75);
  REQUIRE(res.ratio <= 1.25);
}

TEST_CASE("learning equivalence on the parity task", "[c09_learning_equivalence]") {
  TrainOptions opt;
  opt.task = "svm";
  opt.antennas = 256;
  opt.clients = 8;
  opt.snr_db = 10.0;
  opt.per_client = 500;
  opt.test_size = 2000;
  opt.rounds = 120;
  opt.eta = 0.05;
  opt.batch = 50;
  opt.local_steps = 1;
  opt.receivers = {"ideal", "ro", "mmse"};
  opt.seeds = {1, 2, 3, 4, 5};
  opt.out_dir = temp_dir("c09");
  std::vector<TrainRunSummary> runs;
  const CommandOutcome outcome = cmd_train(opt, &runs);
  REQUIRE(outcome.exit_code == 0);

  std::map<std::string, RunningStats> acc;
  for (const TrainRunSummary& r : runs) {
    REQUIRE_FALSE(r.failed);
    acc[r.receiver].add(r.final_metric);
  }
  const double ideal = acc["ideal"].mean();
  const double ro = acc["ro"].mean();
  const double mmse = acc["mmse"].mean();
  const bool ro_vs_mmse = std::abs(ro - mmse) <= 0.02;
  const bool ro_vs_ideal = std::abs(ro - ideal) <= 0.03;
  const bool baseline = ideal >= 0.80;
  const bool pass = ro_vs_mmse && ro_vs_ideal && baseline;
  report(9, "learning equivalence (5-seed mean accuracy)",
         pass, "ideal=" + fmt2(ideal) + " ro=" + fmt2(ro) + " mmse=" + fmt2(mmse) +
                   " |ro-mmse|=" + fmt2(std::abs(ro - mmse)) + "<=0.02, |ro-ideal|=" +
                   fmt2(std::abs(ro - ideal)) + "<=0.03");
  REQUIRE(ro_vs_mmse);
  REQUIRE(ro_vs_ideal);
  REQUIRE(baseline);
}

TEST_CASE("ideal receiver equals in-memory federated averaging", "[c10_oracle_equivalence]") {
  Rng data_rng(99010, StreamPurpose::datagen);
  TrainTask task;
  task.objective = synth_quadratic(4, 8, 30, 4.0, data_rng, 0.05, 0.1).objective;
  task.classification = false;

  SystemConfig cfg;
  cfg.antennas = 64;
  cfg.clients = 4;
  cfg.model_dim = 8;
  cfg.snr_db = 10.0;
  cfg.master_seed = 424242;

  TrainingState state;
  state.w = Eigen::VectorXd::Zero(8);
  Eigen::VectorXd w_oracle = Eigen::VectorXd::Zero(8);
  const double eta = 0.06;
  const long batch = 10;

  double worst = 0.0;
  for (long t = 1; t <= 50; ++t) {
    RoundOptions opt;
    opt.eta = eta;
    opt.batch_size = batch;
    run_round(state, task, cfg, ReceiverKind::ideal, opt);

    // independent federated-averaging step over the documented SGD streams
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    for (int c = 0; c < 4; ++c) {
      Rng sgd(cfg.master_seed, StreamPurpose::sgd,
              {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(c)});
      mean += local_update(task.objective, c, w_oracle, 1, eta, batch, sgd).w;
    }
    w_oracle = mean / 4.0;
    worst = std::max(worst, (state.w - w_oracle).lpNorm<Eigen::Infinity>());
  }
  const bool pass = worst <= 1e-9;
  report(10, "oracle equivalence (50 rounds)", pass,
         "max elementwise |ideal - fedavg| = " + fmt2(worst) + " (limit 1e-9)");
  REQUIRE(worst <= 1e-9);
}

TEST_CASE("idx parser round-trip and fuzz robustness", "[c11_parser_robustness]") {
  Rng rng(99011);
  const IdxType types[] = {IdxType::u8, IdxType::i8,  IdxType::i16,
                           IdxType::i32, IdxType::f32, IdxType::f64};
  bool roundtrip_ok = true;
  for (int t = 0; t < 1000 && roundtrip_ok; ++t) {
    IdxTensor tensor;
    tensor.dtype = types[rng.bounded(6)];
    const int ndims = 1 + static_cast<int>(rng.bounded(3));
    for (int i = 0; i < ndims; ++i)
      tensor.dims.push_back(1 + static_cast<std::uint32_t>(rng.bounded(8)));
    tensor.payload.resize(tensor.element_count() * idx_element_size(tensor.dtype));
    for (auto& b : tensor.payload) b = static_cast<std::uint8_t>(rng.bounded(256));
    const IdxTensor back = parse_idx(serialize_idx(tensor));
    roundtrip_ok = back.dtype == tensor.dtype && back.dims == tensor.dims &&
                   back.payload == tensor.payload;
  }

  long parsed = 0, rejected = 0;
  bool fuzz_ok = true;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t len = rng.bounded(200);
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.bounded(256));
    if (t % 2 == 0 && len >= 4) {  // half the cases look like headers
      bytes[0] = 0;
      bytes[1] = 0;
      bytes[2] = 0x08 + static_cast<std::uint8_t>(rng.bounded(7));
      bytes[3] = static_cast<std::uint8_t>(rng.bounded(5));
    }
    try {
      const IdxTensor t2 = parse_idx(bytes);
      fuzz_ok = fuzz_ok && t2.payload.size() <= bytes.size();
      ++parsed;
    } catch (const IdxError&) {
      ++rejected;
    }
  }
  const bool pass = roundtrip_ok && fuzz_ok;
  report(11, "parser robustness",
         pass, "1000 round-trips exact, fuzz: " + std::to_string(parsed) + " parsed / " +
                   std::to_string(rejected) + " rejected, allocations bounded");
  REQUIRE(roundtrip_ok);
  REQUIRE(fuzz_ok);
}

TEST_CASE("fixed seeds give byte-identical artifacts", "[c12_determinism]") {
  bool pass = true;
  std::string detail;

  {  // nmse sweep across repeated runs and thread counts
    NmseSweepOptions opt;
    opt.antennas = {64};
    opt.clients = 4;
    opt.snr_db = {5.0, 15.0};
    opt.trials = 100;
    opt.slots = 8;
    opt.seed = 31;
    opt.out_dir = temp_dir("c12_sweep1");
    opt.threads = 1;
    REQUIRE(cmd_nmse_sweep(opt).exit_code == 0);
    const std::string a = slurp(opt.out_dir + "/nmse_sweep.csv");
    opt.out_dir = temp_dir("c12_sweep2");
    opt.threads = 4;
    REQUIRE(cmd_nmse_sweep(opt).exit_code == 0);
    const std::string b = slurp(opt.out_dir + "/nmse_sweep.csv");
    pass = pass && a == b;
    detail += std::string("sweep threads 1 vs 4: ") + (a == b ? "identical" : "DIFFER") + "; ";
  }
  {  // train artifacts across repeated runs
    TrainOptions opt;
    opt.task = "quadratic";
    opt.clients = 3;
    opt.antennas = 32;
    opt.quad_dim = 5;
    opt.quad_samples = 16;
    opt.rounds = 6;
    opt.receivers = {"ro", "mmse"};
    opt.seeds = {21};
    opt.out_dir = temp_dir("c12_train1");
    REQUIRE(cmd_train(opt).exit_code == 0);
    const std::string a = slurp(opt.out_dir + "/train.csv");
    const std::string as = slurp(opt.out_dir + "/train.summary.json");
    opt.out_dir = temp_dir("c12_train2");
    REQUIRE(cmd_train(opt).exit_code == 0);
    pass = pass && a == slurp(opt.out_dir + "/train.csv");
    pass = pass && as == slurp(opt.out_dir + "/train.summary.json");
    detail += std::string("train rerun: ") + (pass ? "identical" : "DIFFER") + "; ";
  }
  {  // bounds artifacts
    BoundsOptions opt;
    opt.rounds = 12;
    opt.quad_dim = 5;
    opt.quad_samples = 16;
    opt.sinr_trials = 50;
    opt.out_dir = temp_dir("c12_bounds1");
    REQUIRE(cmd_bounds(opt).exit_code == 0);
    const std::string a = slurp(opt.out_dir + "/bounds.csv");
    opt.out_dir = temp_dir("c12_bounds2");
    REQUIRE(cmd_bounds(opt).exit_code == 0);
    pass = pass && a == slurp(opt.out_dir + "/bounds.csv");
    detail += std::string("bounds rerun: ") + (pass ? "identical" : "DIFFER");
  }
  report(12, "determinism of emitted CSV", pass, detail);
  REQUIRE(pass);
}
