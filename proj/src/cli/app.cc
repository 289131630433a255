#include "mirlab/cli/app.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mirlab/cli/plot.h"
#include "mirlab/common/errors.h"
#include "mirlab/common/parallel.h"
#include "mirlab/dataset/dataset.h"
#include "mirlab/eval/demos.h"
#include "mirlab/eval/imitation.h"
#include "mirlab/eval/metrics.h"
#include "mirlab/eval/report.h"
#include "mirlab/repr/checkpoint.h"
#include "mirlab/repr/frozen.h"
#include "mirlab/repr/train.h"

namespace mirlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Usage problems found after parsing (exit code 2, like parse errors).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  fs::path out_dir;
  std::ostream& out;
  std::string command;
  json config;
};

fs::path resolve(const Context& ctx, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : ctx.out_dir / q;
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
  }
  return items;
}

std::string relative_name(const Context& ctx, const fs::path& p) {
  const auto rel = p.lexically_relative(ctx.out_dir);
  return (rel.empty() || rel.native().starts_with("..")) ? p.string() : rel.generic_string();
}

// manifest.json in the output directory maps every primary output of a run
// to the command, tool version and fully resolved options that produced it.
void record_manifest(const Context& ctx, const std::vector<fs::path>& outputs) {
  const auto path = ctx.out_dir / "manifest.json";
  json root = json::object();
  if (fs::exists(path)) {
    try {
      root = json::parse(read_file(path));
    } catch (const json::exception&) {
      root = json::object();  // unreadable manifest: start over
    }
  }
  json files = json::array();
  for (const auto& p : outputs) {
    files.push_back({{"path", relative_name(ctx, p)}, {"bytes", fs::file_size(p)}, {"fnv1a64", file_digest(p.string())}});
  }
  root["tool"] = "mirlab";
  root["runs"][relative_name(ctx, outputs.front())] = {
      {"command", ctx.command}, {"version", kToolVersion}, {"config", ctx.config}, {"outputs", files}};
  write_file(path, root.dump(2) + "\n");
}

template <class T>
CLI::Option* flag_option(CLI::App* app, const std::string& name, T& var, const std::string& help) {
  return app->add_option(name, var, help)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->capture_default_str();
}

std::string fmt(double v, int digits = 4) { return eval::format_number(v, digits); }

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  int episodes = 64;
  int length = sim::kEpisodeLength;
  std::uint64_t seed = 1;
  std::string out = "data.mird";
};

void gen_data(Context& ctx, const GenDataArgs& a) {
  if (a.episodes < 2) throw UsageError("--episodes must be at least 2");
  ctx.config = {{"episodes", a.episodes}, {"length", a.length}, {"seed", a.seed}, {"out", a.out}};
  const auto data = dataset::build_dataset(a.episodes, a.seed, a.length);
  const auto path = resolve(ctx, a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  dataset::save(data, path.string());
  record_manifest(ctx, {path});
  ctx.out << data.trajectories.size() << " paired trajectories (" << a.episodes << " per pairing, "
          << data.manifest.discarded.size() << " discarded seeds) -> " << relative_name(ctx, path) << "\n";
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string loss = "mir";
  std::string data = "data.mird";
  std::string out;
  std::string metrics;
  repr::TrainConfig cfg;
};

void train(Context& ctx, TrainArgs a) {
  a.cfg.loss = repr::parse_loss(a.loss);
  if (a.out.empty()) a.out = a.loss + ".mirm";
  if (a.metrics.empty()) a.metrics = a.loss + "_metrics.csv";
  repr::validate(a.cfg);
  const auto& c = a.cfg;
  ctx.config = {{"loss", a.loss},         {"data", a.data},
                {"steps", c.steps},       {"batch_size", c.batch_size},
                {"window", c.window},     {"gcp_horizon", c.gcp_horizon},
                {"lambda", c.lambda_cdgcp}, {"lr", c.learning_rate},
                {"seed", c.seed},         {"log_every", c.log_every},
                {"channels", c.arch.channels}, {"feature_dim", c.arch.feature_dim},
                {"mlp", c.arch.mlp},      {"out", a.out},
                {"metrics", a.metrics}};
  const auto data = dataset::load(resolve(ctx, a.data).string());
  const auto result = repr::train(data, a.cfg);
  const auto model_path = resolve(ctx, a.out), metrics_path = resolve(ctx, a.metrics);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  repr::save_model(result.model, model_path.string());
  write_file(metrics_path, repr::metrics_csv(result.metrics));
  record_manifest(ctx, {model_path, metrics_path});
  const auto& last = result.metrics.back();
  ctx.out << "trained " << a.loss << " for " << result.model.steps_completed << " steps, loss " << fmt(last.loss);
  if (last.holdout_loss) ctx.out << ", holdout " << fmt(*last.holdout_loss);
  ctx.out << " -> " << relative_name(ctx, model_path) << "\n";
  if (result.aborted) ctx.out << "warning: training stopped early: " << result.abort_reason << "\n";
}

// ---------------------------------------------------------------- eval-reachability

struct ReachArgs {
  std::string methods = "tcn,mir";
  std::string model_dir = ".";
  std::string domain = "blobhand";
  int demos = 10;
  int length = sim::kEpisodeLength;
  std::uint64_t seed = 1234;
  std::string out = "reachability.csv";
  std::string json_out = "reachability.json";
  std::string curves;
  std::string data;
  int k = 5;
};

repr::TrainedModel load_method(const Context& ctx, const std::string& model_dir, const std::string& method) {
  repr::parse_loss(method);
  return repr::load_model((resolve(ctx, model_dir) / (method + ".mirm")).string());
}

void eval_reachability(Context& ctx, const ReachArgs& a) {
  const auto methods = split_list(a.methods);
  if (methods.empty()) throw UsageError("--methods is empty");
  const auto domain = sim::parse_domain(a.domain);
  ctx.config = {{"methods", methods}, {"model_dir", a.model_dir}, {"domain", sim::domain_name(domain)},
                {"demos", a.demos},   {"length", a.length},       {"seed", a.seed},
                {"out", a.out},       {"json", a.json_out},       {"curves", a.curves},
                {"data", a.data},     {"k", a.k}};
  const auto demos = eval::make_demos(domain, a.demos, a.seed, a.length);
  std::optional<dataset::Dataset> data;
  if (!a.data.empty()) data = dataset::load(resolve(ctx, a.data).string());

  eval::EvalReport report;
  std::vector<fs::path> outputs{resolve(ctx, a.out), resolve(ctx, a.json_out)};
  for (const auto& method : methods) {
    const auto model = load_method(ctx, a.model_dir, method);
    const repr::FrozenEncoder encoder(model.encoder);
    for (auto condition : {eval::ReachCondition::kSame, eval::ReachCondition::kCross}) {
      for (const auto& demo : demos) {
        const auto curve = eval::demo_reachability(encoder, demo, condition);
        report.reachability.push_back({method, condition, domain, demo.id, curve.rho, curve.error});
        if (!a.curves.empty()) {
          const auto path = resolve(ctx, a.curves) / (method + "_" + std::string(eval::condition_name(condition)) +
                                                      "_" + std::to_string(demo.id) + ".csv");
          write_file(path, eval::curve_csv(curve));
          outputs.push_back(path);
        }
      }
    }
    ctx.out << method;
    for (auto condition : {eval::ReachCondition::kSame, eval::ReachCondition::kCross}) {
      const auto m = eval::mean_rho(report.reachability, method, condition);
      ctx.out << "  " << eval::condition_name(condition) << " rho " << (m ? fmt(*m) : std::string("undefined"));
    }
    if (data) {
      double sum = 0.0;
      int n = 0;
      for (auto i : data->indices(dataset::Split::kHoldout)) {
        const auto& t = data->trajectories[i];
        if (t.domain_kind_b != sim::DomainKind::kInvisibleArm) continue;
        sum += eval::alignment_accuracy(encoder, t, a.k);
        ++n;
      }
      if (n == 0) throw std::runtime_error("dataset has no held-out invisible-arm pairs");
      report.alignment[method] = sum / n;
      ctx.out << "  alignment(k=" << a.k << ") " << fmt(sum / n);
    }
    ctx.out << "\n";
  }
  write_file(outputs[0], eval::reachability_csv(report.reachability));
  write_file(outputs[1], eval::report_json(report));
  record_manifest(ctx, outputs);
}

// ---------------------------------------------------------------- eval-imitate

struct ImitateArgs {
  std::string methods = "tcn,tdc,gcp,mir";
  std::string domains = "invisible,stick,blobhand";
  std::string model_dir = ".";
  std::string tracker = "cem";
  int demos = 10;
  int length = sim::kEpisodeLength;
  bool smoke = false;
  std::uint64_t seed = 1234;
  std::string out = "imitation.csv";
  std::string json_out = "imitation.json";
  eval::ImitationConfig cfg;
};

eval::TrackerKind parse_tracker(const std::string& s) {
  if (s == "cem") return eval::TrackerKind::kCem;
  if (s == "policy") return eval::TrackerKind::kPolicy;
  if (s == "random") return eval::TrackerKind::kRandom;
  throw UsageError("unknown tracker '" + s + "' (cem, policy, random)");
}

void eval_imitate(Context& ctx, ImitateArgs a) {
  const auto methods = split_list(a.methods);
  const auto domain_names = split_list(a.domains);
  if (methods.empty() || domain_names.empty()) throw UsageError("--methods and --domains must be non-empty");
  if (a.smoke) a.cfg.attempts = 10;
  a.cfg.tracker = parse_tracker(a.tracker);
  a.cfg.seed = a.seed;
  eval::validate(a.cfg.cem);
  std::vector<sim::DomainKind> domains;
  for (const auto& d : domain_names) domains.push_back(sim::parse_domain(d));
  const auto& c = a.cfg.cem;
  ctx.config = {{"methods", methods},
                {"domains", domain_names},
                {"model_dir", a.model_dir},
                {"tracker", a.tracker},
                {"demos", a.demos},
                {"length", a.length},
                {"attempts", a.cfg.attempts},
                {"smoke", a.smoke},
                {"seed", a.seed},
                {"epsilon", a.cfg.epsilon},
                {"stride", a.cfg.stride},
                {"jitter", a.cfg.jitter},
                {"population", c.population},
                {"elites", c.elites},
                {"iterations", c.iterations},
                {"horizon", c.horizon},
                {"segments", c.segments},
                {"execute_steps", c.execute_steps},
                {"init_std", c.init_std},
                {"min_std", c.min_std},
                {"budget", c.budget},
                {"out", a.out},
                {"json", a.json_out}};

  std::vector<std::vector<eval::Demo>> demo_sets;
  for (auto d : domains) demo_sets.push_back(eval::make_demos(d, a.demos, a.seed, a.length));
  eval::EvalReport report;
  for (const auto& method : methods) {
    const auto model = load_method(ctx, a.model_dir, method);
    const repr::FrozenEncoder encoder(model.encoder);
    const repr::Mlp* policy = model.policy ? &*model.policy : nullptr;
    for (const auto& demos : demo_sets) {
      auto result = eval::imitation_eval(method, encoder, demos, a.cfg, policy);
      ctx.out << method << " " << sim::domain_name(result.domain) << ": lift " << fmt(result.lift_rate()) << " stack "
              << fmt(result.stack_rate()) << " (" << result.attempts() << " rollouts)\n";
      report.imitation.push_back(std::move(result));
    }
  }
  const auto csv_path = resolve(ctx, a.out), json_path = resolve(ctx, a.json_out);
  write_file(csv_path, eval::imitation_csv(report.imitation));
  write_file(json_path, eval::report_json(report));
  record_manifest(ctx, {csv_path, json_path});
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string reachability;
  std::string metrics;
  std::string success;
  std::string embed_model;
  std::string embed_domain = "blobhand";
  int embed_demo = 0;
  int length = sim::kEpisodeLength;
  std::uint64_t seed = 1234;
  std::string prefix;
};

std::vector<PlotInput> load_inputs(const Context& ctx, const std::string& list) {
  std::vector<PlotInput> inputs;
  for (const auto& f : split_list(list)) {
    const auto path = resolve(ctx, f);
    try {
      inputs.push_back({path.stem().string(), parse_csv(read_file(path))});
    } catch (const SchemaError& e) {
      throw SchemaError(f + ": " + e.what());
    }
  }
  return inputs;
}

std::string embeddings_csv(const repr::FrozenEncoder& encoder, const eval::Demo& demo) {
  std::string out = "source,frame";
  for (int j = 0; j < encoder.embed_dim(); ++j) out += ",e" + std::to_string(j);
  out += "\n";
  const std::pair<const char*, const std::vector<std::uint8_t>*> sources[] = {
      {"canonical", &demo.canonical_frames}, {sim::domain_name(demo.domain).data(), &demo.frames}};
  for (const auto& [name, frames] : sources) {
    const auto emb = eval::embed_frames(encoder, *frames);
    const auto d = static_cast<std::size_t>(encoder.embed_dim());
    for (int t = 0; t < demo.length; ++t) {
      out += std::string(name) + "," + std::to_string(t);
      for (std::size_t j = 0; j < d; ++j) out += "," + eval::format_number(emb[static_cast<std::size_t>(t) * d + j], 8);
      out += "\n";
    }
  }
  return out;
}

void report(Context& ctx, const ReportArgs& a) {
  if (a.reachability.empty() && a.metrics.empty() && a.success.empty() && a.embed_model.empty()) {
    throw UsageError("report needs at least one of --reachability, --metrics, --success, --embed-model");
  }
  ctx.config = {{"reachability", split_list(a.reachability)},
                {"metrics", split_list(a.metrics)},
                {"success", split_list(a.success)},
                {"embed_model", a.embed_model},
                {"embed_domain", a.embed_domain},
                {"embed_demo", a.embed_demo},
                {"length", a.length},
                {"seed", a.seed},
                {"prefix", a.prefix}};
  std::vector<fs::path> outputs;
  const std::pair<const std::string*, PlotKind> plots[] = {{&a.reachability, PlotKind::kReachability},
                                                           {&a.metrics, PlotKind::kLoss},
                                                           {&a.success, PlotKind::kSuccess}};
  const char* names[] = {"reachability", "loss", "success"};
  const char* titles[] = {"Normalized reachability distance", "Training loss", "Lift and stack success"};
  for (std::size_t i = 0; i < std::size(plots); ++i) {
    if (plots[i].first->empty()) continue;
    const auto path = resolve(ctx, a.prefix + names[i] + ".svg");
    try {
      write_file(path, plot_svg(plots[i].second, load_inputs(ctx, *plots[i].first), titles[i]));
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(names[i]) + " input: " + e.what());
    }
    outputs.push_back(path);
  }
  if (!a.embed_model.empty()) {
    const auto model = repr::load_model(resolve(ctx, a.embed_model).string());
    const repr::FrozenEncoder encoder(model.encoder);
    const auto demo = eval::make_demo(sim::parse_domain(a.embed_domain), a.embed_demo, a.seed, a.length);
    const auto path = resolve(ctx, a.prefix + "embeddings.csv");
    write_file(path, embeddings_csv(encoder, demo));
    outputs.push_back(path);
  }
  record_manifest(ctx, outputs);
  for (const auto& p : outputs) ctx.out << "wrote " << relative_name(ctx, p) << "\n";
}

// Expands `--config file.json` into flags placed before the command-line
// flags, so explicit flags win (every option takes its last value).
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t consumed = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      consumed = 2;
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    json cfg;
    try {
      cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config '" + path + "' must hold a JSON object");
    std::vector<std::string> flags;
    for (const auto& [key, value] : cfg.items()) {
      const std::string flag = "--" + key;
      if (value.is_boolean()) {
        if (value.get<bool>()) flags.push_back(flag);
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        flags.push_back(flag);
        flags.push_back(joined);
      } else if (value.is_string()) {
        flags.push_back(flag);
        flags.push_back(value.get<std::string>());
      } else if (value.is_number()) {
        flags.push_back(flag);
        flags.push_back(value.dump());
      } else {
        throw UsageError("config key '" + key + "' has an unsupported value");
      }
    }
    args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + consumed));
    // Config flags go right after the subcommand name.
    const auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (sub == args.end()) throw UsageError("--config given without a subcommand");
    args.insert(sub + 1, flags.begin(), flags.end());
    return args;
  }
  return args;
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<std::uint8_t>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Manipulator-independent representation lab", "mirlab"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string out_dir = ".";
  std::string config;  // consumed by expand_config; declared so help lists it
  auto common = [&](CLI::App* sub) {
    flag_option(sub, "--out-dir", out_dir, "Directory all paths are relative to");
    sub->add_option("--config", config, "JSON file of option values (flags override)");
  };

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate the paired trajectory dataset (MIRD)");
  common(gen);
  flag_option(gen, "--episodes", gd.episodes, "Episodes per pairing");
  flag_option(gen, "--length", gd.length, "Frames per episode");
  flag_option(gen, "--seed", gd.seed, "Dataset seed");
  flag_option(gen, "--out", gd.out, "Output file");

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "Train one representation (MIRM checkpoint + metrics CSV)");
  common(trn);
  flag_option(trn, "--loss", tr.loss, "tcn | tscn | gcp | cdgcp | mir | tdc | cmc");
  flag_option(trn, "--data", tr.data, "Dataset file");
  flag_option(trn, "--steps", tr.cfg.steps, "Optimizer steps");
  flag_option(trn, "--batch-size", tr.cfg.batch_size, "Sequences per batch");
  flag_option(trn, "--window", tr.cfg.window, "Frames per sequence window");
  flag_option(trn, "--gcp-horizon", tr.cfg.gcp_horizon, "Maximum goal offset for the policy losses");
  flag_option(trn, "--lambda", tr.cfg.lambda_cdgcp, "Weight of CD-GCP in the MIR objective");
  flag_option(trn, "--lr", tr.cfg.learning_rate, "Adam learning rate");
  flag_option(trn, "--seed", tr.cfg.seed, "Initialisation and batch seed");
  flag_option(trn, "--log-every", tr.cfg.log_every, "Metrics interval in steps");
  flag_option(trn, "--out", tr.out, "Checkpoint file (default <loss>.mirm)");
  flag_option(trn, "--metrics", tr.metrics, "Metrics CSV (default <loss>_metrics.csv)");

  ReachArgs ra;
  auto* rch = app.add_subcommand("eval-reachability", "Reachability rank correlation on held-out demos");
  common(rch);
  flag_option(rch, "--methods", ra.methods, "Comma-separated methods; loads <model-dir>/<method>.mirm");
  flag_option(rch, "--model-dir", ra.model_dir, "Checkpoint directory");
  flag_option(rch, "--domain", ra.domain, "Demonstration domain");
  flag_option(rch, "--demos", ra.demos, "Number of demos");
  flag_option(rch, "--length", ra.length, "Frames per demo");
  flag_option(rch, "--seed", ra.seed, "Demo seed");
  flag_option(rch, "--out", ra.out, "Per-demo rho CSV");
  flag_option(rch, "--json", ra.json_out, "JSON summary");
  flag_option(rch, "--curves", ra.curves, "Directory for per-demo curve CSVs (empty: none)");
  flag_option(rch, "--data", ra.data, "Dataset for holdout alignment accuracy (empty: skip)");
  flag_option(rch, "--k", ra.k, "Alignment window");

  ImitateArgs im;
  auto* imi = app.add_subcommand("eval-imitate", "Goal-sequenced tracking of held-out demos");
  common(imi);
  flag_option(imi, "--methods", im.methods, "Comma-separated methods; loads <model-dir>/<method>.mirm");
  flag_option(imi, "--domains", im.domains, "Comma-separated demonstration domains");
  flag_option(imi, "--model-dir", im.model_dir, "Checkpoint directory");
  flag_option(imi, "--tracker", im.tracker, "cem | policy | random");
  flag_option(imi, "--demos", im.demos, "Demos per domain");
  flag_option(imi, "--length", im.length, "Frames per demo");
  flag_option(imi, "--attempts", im.cfg.attempts, "Attempts per demo");
  imi->add_flag("--smoke", im.smoke, "10 attempts per demo");
  flag_option(imi, "--seed", im.seed, "Demo and attempt seed");
  flag_option(imi, "--epsilon", im.cfg.epsilon, "Reward threshold");
  flag_option(imi, "--stride", im.cfg.stride, "Goal stride in frames");
  flag_option(imi, "--jitter", im.cfg.jitter, "Start jitter (fraction of workspace)");
  flag_option(imi, "--population", im.cfg.cem.population, "CEM population");
  flag_option(imi, "--elites", im.cfg.cem.elites, "CEM elites");
  flag_option(imi, "--iterations", im.cfg.cem.iterations, "CEM iterations per replan");
  flag_option(imi, "--horizon", im.cfg.cem.horizon, "CEM horizon in steps");
  flag_option(imi, "--segments", im.cfg.cem.segments, "Constant-action segments per plan");
  flag_option(imi, "--execute-steps", im.cfg.cem.execute_steps, "Steps executed per replan");
  flag_option(imi, "--init-std", im.cfg.cem.init_std, "Initial CEM standard deviation");
  flag_option(imi, "--min-std", im.cfg.cem.min_std, "CEM standard deviation floor");
  flag_option(imi, "--budget", im.cfg.cem.budget, "Step budget (0: 3 x demo length)");
  flag_option(imi, "--out", im.out, "Per-demo CSV");
  flag_option(imi, "--json", im.json_out, "JSON summary");

  ReportArgs rp;
  auto* rep = app.add_subcommand("report", "SVG plots and embedding export");
  common(rep);
  flag_option(rep, "--reachability", rp.reachability, "Curve CSVs (frame,normalized_distance)");
  flag_option(rep, "--metrics", rp.metrics, "Training metrics CSVs");
  flag_option(rep, "--success", rp.success, "Imitation CSVs");
  flag_option(rep, "--embed-model", rp.embed_model, "Checkpoint for the embedding CSV export");
  flag_option(rep, "--embed-domain", rp.embed_domain, "Demo domain for the embedding export");
  flag_option(rep, "--embed-demo", rp.embed_demo, "Demo id for the embedding export");
  flag_option(rep, "--length", rp.length, "Frames per demo");
  flag_option(rep, "--seed", rp.seed, "Demo seed");
  flag_option(rep, "--prefix", rp.prefix, "Prefix for output file names");

  try {
    auto args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);  // CLI11 wants argv[1..] reversed
    app.parse(reversed);
    Context ctx{fs::path(out_dir), out, app.get_subcommands().front()->get_name(), json::object()};
    fs::create_directories(ctx.out_dir);
    if (gen->parsed()) gen_data(ctx, gd);
    if (trn->parsed()) train(ctx, tr);
    if (rch->parsed()) eval_reachability(ctx, ra);
    if (imi->parsed()) eval_imitate(ctx, im);
    if (rep->parsed()) report(ctx, rp);
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "mirlab " << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mirlab: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "mirlab: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "mirlab: error: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace mirlab::cli
