// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
//
//   acceptance [--full] [--cache DIR] [--only 1,4,...]
//
// Trained models and the desk dataset are cached in DIR (see
// support/model_cache.h).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mirlab/cli/app.h"
#include "mirlab/common/alloc.h"
#include "mirlab/common/parallel.h"
#include "mirlab/common/rng.h"
#include "mirlab/dataset/dataset.h"
#include "mirlab/eval/demos.h"
#include "mirlab/eval/goals.h"
#include "mirlab/eval/imitation.h"
#include "mirlab/eval/metrics.h"
#include "mirlab/eval/report.h"
#include "mirlab/numerics/ops.h"
#include "mirlab/repr/checkpoint.h"
#include "mirlab/repr/frozen.h"
#include "mirlab/repr/losses.h"
#include "mirlab/repr/train.h"
#include "support/centroid.h"
#include "support/gradcheck.h"
#include "support/model_cache.h"

namespace fs = std::filesystem;
using namespace mirlab;
using numerics::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

using testing::kTrainSeed;
using testing::kTrainSteps;
using Cache = testing::ModelCache;

constexpr std::uint64_t kDemoSeed = 1234;
constexpr int kDemos = 10;
constexpr int kAlignK = 5;

// Tolerances and budgets.
constexpr double kGradTol = 1e-4;
constexpr int kGradProbes = 20;
constexpr double kIdentityTol = 1e-10;
constexpr double kRowSumTol = 1e-12;
constexpr double kCentroidTolPx = 1.0;
constexpr double kHoldoutDrop = 0.30;
constexpr double kAlignMultiple = 3.0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  bool full = false;
  fs::path cache = "acceptance_cache";
  std::set<int> only;
};

std::string fmt(double v, int digits = 3) { return eval::format_number(v, digits); }

// ------------------------------------------------------------ criterion 1

Verdict gradient_suite() {
  using Inputs = std::vector<Tensor>;
  using numerics::Shape;
  struct Case {
    const char* name;
    std::function<Tensor(const Inputs&)> fn;
    std::vector<Shape> shapes;
  };
  const auto conv_fn = [](int stride) {
    return [stride](const Inputs& in) {
      return numerics::sum(numerics::mul(numerics::conv2d(in[0], in[1], in[2], stride), in[3]));
    };
  };
  using namespace numerics;
  const std::vector<Case> cases = {
      {"matmul", [](const Inputs& in) { return sum(mul(matmul(in[0], in[1]), in[2])); }, {{3, 4}, {4, 2}, {3, 2}}},
      {"transpose", [](const Inputs& in) { return sum(mul(transpose(in[0]), in[1])); }, {{2, 5}, {5, 2}}},
      {"add", [](const Inputs& in) { return sum(mul(add(in[0], in[1]), in[2])); }, {{8}, {8}, {8}}},
      {"sub", [](const Inputs& in) { return sum(mul(sub(in[0], in[1]), in[2])); }, {{8}, {8}, {8}}},
      {"mul", [](const Inputs& in) { return sum(mul(in[0], in[1])); }, {{8}, {8}}},
      {"scale", [](const Inputs& in) { return sum(mul(scale(in[0], -1.7), in[1])); }, {{8}, {8}}},
      {"relu", [](const Inputs& in) { return sum(mul(relu(in[0]), in[1])); }, {{8}, {8}}},
      {"add_bias", [](const Inputs& in) { return sum(mul(add_bias(in[0], in[1]), in[2])); }, {{4, 3}, {3}, {4, 3}}},
      {"linear", [](const Inputs& in) { return sum(mul(linear(in[0], in[1], in[2]), in[3])); },
       {{3, 4}, {4, 2}, {2}, {3, 2}}},
      {"concat", [](const Inputs& in) { return sum(mul(concat({in[0], in[1]}, 1), in[2])); }, {{2, 3}, {2, 2}, {2, 5}}},
      {"reshape", [](const Inputs& in) { return sum(mul(reshape(in[0], {5, 2}), in[1])); }, {{2, 5}, {5, 2}}},
      {"gather_rows", [](const Inputs& in) {
         const std::vector<std::size_t> rows{4, 0, 4};
         return sum(mul(gather_rows(in[0], rows), in[1]));
       }, {{5, 2}, {3, 2}}},
      {"sum", [](const Inputs& in) { return sum(in[0]); }, {{3, 3}}},
      {"conv2d_s1", conv_fn(1), {{2, 4, 4}, {2, 2, 3, 3}, {2}, {2, 4, 4}}},
      {"conv2d_s2", conv_fn(2), {{1, 2, 5, 5}, {3, 2, 3, 3}, {3}, {1, 3, 3, 3}}},
      {"softmax_xent_soft", [](const Inputs& in) {
         return softmax_xent_soft(in[0], Tensor::from_data({2, 5}, {0.1, 0.2, 0.3, 0.4, 0.0, 0.5, 0.5, 0, 0, 0}));
       }, {{2, 5}}},
      {"mse", [](const Inputs& in) { return mse(in[0], in[1]); }, {{8}, {8}}},
  };
  Rng rng(20240);
  double worst = 0.0;
  std::string worst_op;
  for (const auto& c : cases) {
    for (int probe = 0; probe < kGradProbes; ++probe) {
      Inputs inputs;
      for (const auto& s : c.shapes) inputs.push_back(testing::random_tensor(s, rng));
      const double err = testing::gradcheck(c.fn, inputs);
      if (!(err <= worst)) {
        worst = err;
        worst_op = c.name;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu ops x %d probes, worst rel err %.2e (%s) < 1e-4", cases.size(), kGradProbes, worst,
                worst_op.c_str());
  return {worst < kGradTol, buf};
}

// ------------------------------------------------------------ criterion 2

Tensor random_embeddings(std::size_t n, std::size_t d, Rng& rng, double scale) {
  std::vector<double> v(n * d);
  for (auto& x : v) x = rng.normal(0.0, scale);
  return Tensor::from_data({n, d}, std::move(v));
}

Verdict loss_identities() {
  Rng rng(42);
  double worst_identity = 0.0;
  double worst_gap = std::numeric_limits<double>::infinity();  // loss - entropy bound
  for (int w = 0; w < 50; ++w) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 40));
    const auto x = random_embeddings(n, 8, rng, rng.uniform(0.1, 3.0));
    const auto xb = random_embeddings(n, 8, rng, rng.uniform(0.1, 3.0));
    auto eye = Tensor::zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) eye.mutable_data()[i * n + i] = 1.0;
    worst_identity = std::max(worst_identity,
                              std::abs(repr::contrastive_loss(x, xb, std::nullopt, eye).item() - repr::loss_tcn(x, xb).item()));
  }
  for (int w = 0; w < 50; ++w) {
    const auto n = static_cast<int>(rng.uniform_int(1, 40));
    const auto x = random_embeddings(static_cast<std::size_t>(n), 8, rng, rng.uniform(0.1, 4.0));
    const auto xb = random_embeddings(static_cast<std::size_t>(n), 8, rng, rng.uniform(0.1, 4.0));
    const auto p = repr::smoothing_distribution(n).data();
    double entropy = 0.0;
    for (double v : p) entropy -= v > 0.0 ? v * std::log(v) : 0.0;
    worst_gap = std::min(worst_gap, repr::loss_tscn(x, xb).item() - entropy);
  }
  double worst_row = 0.0;
  for (int n : {1, 2, 3, 50}) {
    const auto p = repr::smoothing_distribution(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += p.data()[static_cast<std::size_t>(i * n + k)];
      worst_row = std::max(worst_row, std::abs(s - 1.0));
    }
  }
  const bool pass = worst_identity <= kIdentityTol && worst_gap >= -1e-12 && worst_row <= kRowSumTol;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "(a) |tscn(one-hot) - tcn| max %.1e <= 1e-10; (b) min(tscn - sum H) %.3g >= 0; (c) row sums off by %.1e <= 1e-12",
                worst_identity, worst_gap, worst_row);
  return {pass, buf};
}

// ------------------------------------------------------------ criterion 3

Verdict paired_alignment(Cache& cache) {
  const auto& data = cache.desk();
  double worst = 0.0;
  int frames = 0;
  bool presence_ok = true;
  for (int k = 0; k < 8; ++k) {
    const auto& stored = data.trajectories[static_cast<std::size_t>(k) * data.trajectories.size() / 8];
    const auto pairing = stored.domain_kind_b == sim::DomainKind::kInvisibleArm ? dataset::Pairing::kInvisibleArm
                                                                                : dataset::Pairing::kArmRandomized;
    const auto t = dataset::generate_paired_episode(stored.task_id, stored.seed, pairing, stored.length);
    if (!t || t->obs_a != stored.obs_a || t->obs_b != stored.obs_b) return {false, "regenerated episode differs from stored"};
    const auto spec_a = sim::sample_domain_spec(t->domain_kind_a, t->domain_seed_a);
    const auto spec_b = sim::sample_domain_spec(t->domain_kind_b, t->domain_seed_b);
    for (int f = 0; f < t->length; ++f, ++frames) {
      sim::Observation a, b;
      a.pixels.assign(t->frame_a(f).begin(), t->frame_a(f).end());
      b.pixels.assign(t->frame_b(f).begin(), t->frame_b(f).end());
      for (int color = 0; color < sim::kNumObjects; ++color) {
        for (std::size_t v = 0; v < sim::kViews; ++v) {
          const auto ca = testing::object_centroid(a, spec_a, color, v);
          const auto cb = testing::object_centroid(b, spec_b, color, v);
          if (ca.has_value() != cb.has_value()) presence_ok = false;
          if (!ca || !cb) continue;
          worst = std::max({worst, std::abs(ca->row - cb->row), std::abs(ca->col - cb->col)});
        }
      }
    }
  }
  return {presence_ok && worst <= kCentroidTolPx,
          "8 episodes, " + std::to_string(frames) + " frames, max centroid offset " + fmt(worst) + " px <= 1"};
}

// ------------------------------------------------------------ criterion 4

double holdout_alignment(const repr::Encoder& encoder, const dataset::Dataset& data) {
  const repr::FrozenEncoder frozen(encoder);
  double sum = 0.0;
  int n = 0;
  for (auto i : data.indices(dataset::Split::kHoldout)) {
    const auto& t = data.trajectories[i];
    if (t.domain_kind_b != sim::DomainKind::kInvisibleArm) continue;  // DR <-> invisible pairs
    sum += eval::alignment_accuracy(frozen, t, kAlignK);
    ++n;
  }
  return sum / n;
}

Verdict training_efficacy(Cache& cache) {
  const auto& data = cache.desk();
  const auto& m = cache.model(repr::LossKind::kMir);
  const auto init = repr::init_model(repr::LossKind::kMir, m.model.arch, kTrainSeed);
  const dataset::BatchConfig batch;
  const double before = repr::holdout_tscn(init.encoder, data, dataset::Split::kHoldout, batch, 16, 99);
  const double after = repr::holdout_tscn(m.model.encoder, data, dataset::Split::kHoldout, batch, 16, 99);
  const double drop = 1.0 - after / before;
  const double align = holdout_alignment(m.model.encoder, data);
  const int T = data.trajectories.front().length;
  const double base = (2.0 * kAlignK + 1.0) / T;
  const bool runtime_ok = m.train_seconds < 20 * 60;
  const bool pass = !m.aborted && m.model.steps_completed == kTrainSteps && drop >= kHoldoutDrop &&
                    align > kAlignMultiple * base && runtime_ok;
  return {pass, std::to_string(data.trajectories.size()) + " trajectories, " + std::to_string(m.model.steps_completed) +
                    " steps: holdout TSCN " + fmt(before, 1) + " -> " + fmt(after, 1) + " (-" + fmt(100 * drop, 1) +
                    "% >= 30%), alignment(k=5) " + fmt(align) + " > " + fmt(kAlignMultiple * base) + ", trained in " +
                    fmt(m.train_seconds, 0) + " s < 1200 s" + (m.cached ? " (cached)" : "")};
}

// ------------------------------------------------------------ criterion 5

Verdict reachability_ordering(Cache& cache) {
  cache.ensure({repr::LossKind::kTcn, repr::LossKind::kMir});
  const auto t0 = Clock::now();
  const auto demos = eval::make_demos(sim::DomainKind::kBlobHand, kDemos, kDemoSeed);
  std::vector<eval::ReachabilityRecord> records;
  for (auto kind : {repr::LossKind::kTcn, repr::LossKind::kMir}) {
    const repr::FrozenEncoder enc(cache.model(kind).model.encoder);
    for (auto cond : {eval::ReachCondition::kSame, eval::ReachCondition::kCross}) {
      for (const auto& d : demos) {
        const auto c = eval::demo_reachability(enc, d, cond);
        records.push_back({std::string(repr::loss_name(kind)), cond, d.domain, d.id, c.rho, c.error});
      }
    }
  }
  const auto rho = [&](const char* m, eval::ReachCondition c) {
    return eval::mean_rho(records, m, c).value_or(-std::numeric_limits<double>::infinity());
  };
  const double mir_cross = rho("mir", eval::ReachCondition::kCross);
  const double tcn_cross = rho("tcn", eval::ReachCondition::kCross);
  const double tcn_same = rho("tcn", eval::ReachCondition::kSame);
  const double secs = seconds_since(t0);
  return {mir_cross > tcn_cross && tcn_same > tcn_cross && secs < 300,
          "blob-hand demos, mean rho: MIR cross " + fmt(mir_cross) + (mir_cross > tcn_cross ? " > " : " <= ") +
              "TCN cross " + fmt(tcn_cross) + "; TCN same " + fmt(tcn_same) + (tcn_same > tcn_cross ? " > " : " <= ") +
              "TCN cross; eval " + fmt(secs, 1) + " s < 300 s"};
}

// ------------------------------------------------------------ criterion 6

Verdict imitation_ordering(Cache& cache, bool full) {
  const std::vector<repr::LossKind> kinds{repr::LossKind::kTcn, repr::LossKind::kTdc, repr::LossKind::kGcp,
                                          repr::LossKind::kMir};
  cache.ensure(kinds);
  const auto t0 = Clock::now();
  eval::ImitationConfig cfg;
  cfg.attempts = full ? 100 : 10;
  cfg.seed = kDemoSeed;
  std::vector<eval::ImitationResult> results;
  for (auto domain : eval::demo_domains()) {
    const auto demos = eval::make_demos(domain, kDemos, kDemoSeed);
    for (auto kind : kinds) {
      const repr::FrozenEncoder enc(cache.model(kind).model.encoder);
      results.push_back(eval::imitation_eval(std::string(repr::loss_name(kind)), enc, demos, cfg));
      const auto& r = results.back();
      std::printf("    %-4s %-10s lift %.3f stack %.3f\n", r.method.c_str(), std::string(sim::domain_name(domain)).c_str(),
                  r.lift_rate(), r.stack_rate());
      std::fflush(stdout);
    }
  }
  const double secs = seconds_since(t0);
  bool ordering = true, staged = true, mir_stacks = false;
  std::string detail;
  for (auto domain : eval::demo_domains()) {
    const auto find = [&](const std::string& m) -> const eval::ImitationResult& {
      return *std::find_if(results.begin(), results.end(),
                           [&](const auto& r) { return r.method == m && r.domain == domain; });
    };
    const double mir = find("mir").lift_rate();
    double best_other = 0.0;
    for (const char* m : {"tcn", "tdc", "gcp"}) best_other = std::max(best_other, find(m).lift_rate());
    ordering = ordering && mir >= best_other;
    detail += std::string(sim::domain_name(domain)) + " " + fmt(mir, 2) + (mir >= best_other ? ">=" : "<") + fmt(best_other, 2) + " ";
    if (domain != sim::DomainKind::kInvisibleArm && find("mir").stack_rate() > 0.0) mir_stacks = true;
  }
  for (const auto& r : results) {
    for (const auto& d : r.demos) staged = staged && d.stacks <= d.lifts;
  }
  const double budget = full ? 7200.0 : 600.0;
  bool pass = ordering && secs < budget;
  std::string head = full ? "full, 100 attempts: " : "smoke, 10 attempts (lift ordering only): ";
  if (full) {
    pass = pass && staged && mir_stacks;
    detail += "| stack <= lift " + std::string(staged ? "yes" : "NO") + " | MIR stacks on a held-out domain " +
              (mir_stacks ? "yes" : "NO") + " ";
  }
  return {pass, head + "lift MIR >= best baseline: " + detail + "(" + fmt(secs, 0) + " s < " + fmt(budget, 0) + " s)"};
}

// ------------------------------------------------------------ criterion 7

Verdict reward_examples() {
  const std::vector<double> zero{0.0}, one{1.0}, two{2.0};
  const int identity = eval::reward(one, one, 1.0, 0.3);
  const int near = eval::reward(zero, one, 1.0, 0.3);
  const int far = eval::reward(zero, two, 1.0, 0.3);
  return {identity == 1 && near == 1 && far == 0, "identity -> " + std::to_string(identity) +
                                                      ", w=1 d=1 eps=0.3 -> " + std::to_string(near) +
                                                      ", w=1 d=2 eps=0.3 -> " + std::to_string(far)};
}

// ------------------------------------------------------------ criterion 8

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Verdict cli_determinism(const fs::path& cache_dir) {
  const auto run_pipeline = [&](const fs::path& dir) {
    fs::remove_all(dir);
    std::ostringstream out, err;
    const auto cli = [&](std::vector<std::string> args) {
      args.insert(args.begin(), "mirlab");
      args.push_back("--out-dir");
      args.push_back(dir.string());
      if (cli::run(args, out, err) != 0) throw std::runtime_error(err.str());
    };
    cli({"gen-data", "--episodes", "4", "--seed", "11", "--out", "d.mird"});
    for (const char* loss : {"mir", "tcn"}) {
      cli({"train", "--loss", loss, "--data", "d.mird", "--steps", "30", "--seed", "11", "--log-every", "5"});
    }
    cli({"eval-imitate", "--methods", "tcn,mir", "--domains", "invisible,stick", "--demos", "2", "--attempts", "3",
         "--seed", "11"});
  };
  const auto a = cache_dir / "determinism_a", b = cache_dir / "determinism_b";
  run_pipeline(a);
  run_pipeline(b);
  std::vector<std::string> differing;
  const std::vector<std::string> files{"d.mird",   "mir.mirm",      "mir_metrics.csv", "tcn.mirm",
                                       "tcn_metrics.csv", "imitation.csv", "imitation.json", "manifest.json"};
  for (const auto& f : files) {
    if (!fs::exists(a / f) || slurp(a / f) != slurp(b / f)) differing.push_back(f);
  }
  std::string detail = "gen-data, train (mir, tcn), eval-imitate run twice: ";
  if (differing.empty()) return {true, detail + std::to_string(files.size()) + " outputs byte-identical"};
  for (const auto& f : differing) detail += f + " ";
  return {false, detail + "differ"};
}

Options parse(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--full") {
      o.full = true;
    } else if (a == "--cache" && i + 1 < argc) {
      o.cache = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream in(argv[++i]);
      std::string item;
      while (std::getline(in, item, ',')) o.only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--full] [--cache DIR] [--only 1,2,...]\n");
      std::exit(2);
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  const auto opt = parse(argc, argv);
  Cache cache(opt.cache);
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient suite", [] { return gradient_suite(); }},
      {2, "loss identities", [] { return loss_identities(); }},
      {3, "paired-data alignment", [&] { return paired_alignment(cache); }},
      {4, "training efficacy", [&] { return training_efficacy(cache); }},
      {5, "reachability ordering", [&] { return reachability_ordering(cache); }},
      {6, "imitation ordering", [&] { return imitation_ordering(cache, opt.full); }},
      {7, "reward unit examples", [] { return reward_examples(); }},
      {8, "determinism", [&] { return cli_determinism(opt.cache); }},
  };
  const double limits[] = {30.0, 10.0, 60.0, 0.0, 0.0, 0.0, 1.0, 0.0};  // 0: budget checked inside
  int failures = 0;
  for (const auto& c : criteria) {
    if (!opt.only.empty() && !opt.only.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const double limit = limits[c.id - 1];
    if (limit > 0.0 && secs >= limit) {
      v.pass = false;
      v.detail += " [over the " + fmt(limit, 0) + " s budget]";
    }
    failures += v.pass ? 0 : 1;
    std::printf("[%s] %d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
