#include "kdi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <random>

#include "kdi/dataset.hpp"
#include "kdi/error.hpp"
#include "kdi/explain.hpp"
#include "kdi/imaging.hpp"
#include "kdi/models.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

namespace fs = std::filesystem;

namespace {

enum CommandBit : unsigned {
  kSimulate = 1u << 0,
  kDataset = 1u << 1,
  kTrain = 1u << 2,
  kEval = 1u << 3,
  kExplain = 1u << 4,
  kReport = 1u << 5,
  kAll = 0x3f,
};

struct OptionSpec {
  const char* key;
  const char* help;
  unsigned commands;
};

constexpr OptionSpec kOptions[] = {
    {"seed", "master seed (required for simulate and train)", kSimulate | kDataset | kTrain},
    {"out", "output directory (default .)", kAll},
    {"task", "push|cut", kSimulate | kDataset},
    {"trials", "number of trials (default 48 push, 43 cut)", kSimulate},
    {"duration", "seconds per trial (default 20)", kSimulate},
    {"noise_force", "force noise sigma, N (default 0.02)", kSimulate},
    {"noise_position", "position noise sigma, m (default 5e-6)", kSimulate},
    {"data", "directory of trial CSV files (default <out>/trials)", kDataset},
    {"block_length", "samples per block M (default 10)", kDataset},
    {"preset", "training recipe P|C1|C2|CLSTM|Gen (default P for push, C1 for cut)",
     kDataset | kTrain},
    {"horizon", "label horizon in blocks (default from preset)", kDataset},
    {"threshold", "no-motion threshold, m (default 8e-5 push, 5e-5 cut)", kDataset},
    {"train_fraction", "train share of labeled blocks (default 0.75)", kDataset},
    {"stratified", "stratified split 0|1 (default 0)", kDataset},
    {"exclude_material", "hold out one material as the test set", kDataset},
    {"images", "export images of the first N blocks (default 0)", kDataset},
    {"colormap", "diverging|sequential (default by task)", kDataset | kTrain},
    {"manifest", "dataset manifest (default <out>/dataset.manifest)",
     kTrain | kEval | kExplain | kReport},
    {"variant", "cnn|clstm (default cnn)", kTrain},
    {"lr", "learning rate (default from preset)", kTrain},
    {"epochs", "epochs (default from preset)", kTrain},
    {"batch_size", "mini-batch size (default 32)", kTrain},
    {"leaky_every", "leaky ReLU after every conv 0|1 (default 0)", kTrain},
    {"checkpoint", "model checkpoint (default <out>/model.ckpt)", kEval | kExplain | kReport},
    {"split", "test|train (default test)", kEval | kReport},
    {"trial", "trial id to explain (default first trial with a label change)", kExplain},
    {"block", "transition block b; panels cover b-4..b+1", kExplain},
    {"upscale", "pixel repeat factor for overlays (default 16)", kExplain},
    {"format", "ppm|png (default ppm)", kExplain},
    {"interpolation", "linear|nearest (default linear)", kExplain | kReport},
    {"saliency_threshold", "count only saliency >= value for the dominant feature", kExplain | kReport},
};

// Typed access to the merged config.
class Config {
 public:
  explicit Config(const KeyValue& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.contains(key); }
  std::string str(const std::string& key, const std::string& fallback) const {
    return kv_.get_or(key, fallback);
  }
  double num(const std::string& key, double fallback) const {
    return has(key) ? kv_.get_double(key) : fallback;
  }
  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? kv_.get_int(key) : fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    const long long v = integer(key, static_cast<long long>(fallback));
    require(v >= 0, key + " must be non-negative");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key) const {
    const std::string v = str(key, "0");
    require(v == "0" || v == "1", key + " must be 0 or 1");
    return v == "1";
  }
  std::uint64_t seed() const {
    require(has("seed"), "seed is required");
    const std::string& v = kv_.get("seed");
    require(!v.empty() && v.find_first_not_of("0123456789") == std::string::npos,
            "seed must be a non-negative integer");
    return std::stoull(v);
  }
  std::uint64_t seed_or(std::uint64_t fallback) const { return has("seed") ? seed() : fallback; }
  fs::path out() const { return fs::path(str("out", ".")); }
  fs::path path(const std::string& key, const fs::path& fallback) const {
    return has(key) ? fs::path(kv_.get(key)) : fallback;
  }

 private:
  const KeyValue& kv_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string trial_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
  return buf;
}

std::string default_preset(TaskKind task) { return task == TaskKind::kPush ? "P" : "C1"; }

LabeledDataset load_dataset(const Config& cfg) {
  return read_manifest(cfg.path("manifest", cfg.out() / kManifestFile));
}

EventNet load_network(const Config& cfg, Checkpoint* checkpoint) {
  *checkpoint = load_checkpoint(cfg.path("checkpoint", cfg.out() / kCheckpointFile));
  return EventNet::from_checkpoint(*checkpoint);
}

SplitRole parse_split(const std::string& name) {
  if (name == "test") return SplitRole::kTest;
  if (name == "train") return SplitRole::kTrain;
  throw ValidationError("unknown split '" + name + "' (expected test|train)");
}

ExplainOptions explain_options(const Config& cfg) {
  ExplainOptions o;
  o.interpolation = parse_interpolation(cfg.str("interpolation", "linear"));
  if (cfg.has("saliency_threshold")) o.threshold = cfg.num("saliency_threshold", 0.0);
  return o;
}

}  // namespace

void cmd_simulate(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const TaskKind task = parse_task(cfg.str("task", "push"));
  const std::uint64_t master = cfg.seed();
  const std::size_t n = cfg.count("trials", task == TaskKind::kPush ? 48 : 43);
  const double duration = cfg.num("duration", 20.0);
  require(duration > 0.0, "duration must be positive");
  NoiseConfig noise;
  noise.force_sigma = cfg.num("noise_force", noise.force_sigma);
  noise.position_sigma = cfg.num("noise_position", noise.position_sigma);
  require(noise.force_sigma >= 0.0 && noise.position_sigma >= 0.0, "noise sigmas must be non-negative");

  const fs::path dir = cfg.out() / "trials";
  ensure_dir(dir);
  static constexpr double kMasses[] = {0.190, 0.275, 0.370, 0.645};
  const auto surfaces = push_materials();
  const auto foods = cut_materials();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = splitmix64(master + 0x632be59bd9b4e019ULL * (i + 1));
    std::mt19937_64 rng(seed);
    ControllerConfig controller;
    Trial trial;
    if (task == TaskKind::kPush) {
      MaterialParams mat = surfaces[i % surfaces.size()];
      mat.mass = kMasses[(i / surfaces.size()) % std::size(kMasses)];
      std::array<double, 3> peaks{};
      for (double& p : peaks) p = 0.02 + 0.02 * unit(rng);
      trial = simulate_push(controller, push_trajectory(duration, peaks), mat, seed, noise);
      trial.meta.trial_id = trial_name("push", i);
    } else {
      const MaterialParams& mat = foods[i % foods.size()];
      const double ka = std::pow(10.0, -4.0 + 2.0 * unit(rng));
      controller.ka = {ka, ka, ka};
      const int reps = std::max(1, static_cast<int>(std::lround((duration - 2.0) / 3.0)));
      trial = simulate_cut(controller, cut_trajectory(2.0, 0.01, reps, 3.0, 0.04, 0.02), mat, seed,
                           noise);
      trial.meta.trial_id = trial_name("cut", i);
    }
    write_trial(trial, dir / (trial.meta.trial_id + ".csv"));
  }
  log << "simulate: wrote " << n << " " << to_string(task) << " trials to " << dir.string() << "\n";
}

void cmd_dataset(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const TaskKind task = parse_task(cfg.str("task", "push"));
  const fs::path data = cfg.path("data", cfg.out() / "trials");
  std::vector<fs::path> paths;
  std::error_code ec;
  for (fs::directory_iterator it(data, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->path().extension() == ".csv") paths.push_back(it->path());
  }
  if (ec) throw IoError("cannot list " + data.string() + ": " + ec.message());
  require(!paths.empty(), "no trial CSV files in " + data.string());
  std::sort(paths.begin(), paths.end());

  const TrainConfig preset = train_preset(cfg.str("preset", default_preset(task)));
  DatasetOptions options;
  options.block_length = cfg.count("block_length", kDefaultBlockLength);
  options.rule = task == TaskKind::kPush ? push_label_rule() : cut_label_rule();
  options.rule.horizon = cfg.count("horizon", preset.horizon);
  options.rule.threshold = cfg.num("threshold", options.rule.threshold);
  options.split.seed = cfg.seed_or(0);
  options.split.train_fraction = cfg.num("train_fraction", 0.75);
  options.split.stratified = cfg.flag("stratified");
  options.exclude_material = cfg.str("exclude_material", "");
  const ColormapKind colormap = parse_colormap(cfg.str("colormap", to_string(default_colormap(task))));

  const LabeledDataset ds = build_dataset(task, paths, options);
  ensure_dir(cfg.out());
  write_manifest(ds, cfg.out() / kManifestFile);

  const std::size_t images = std::min(cfg.count("images", 0), ds.blocks.size());
  if (images > 0) {
    const fs::path dir = cfg.out() / "images";
    ensure_dir(dir);
    for (std::size_t i = 0; i < images; ++i) {
      for (const AnyScaler& scaler : {AnyScaler(ds.train_scaler), AnyScaler(ds.viz_scaler)}) {
        const KinodynamicImage img = encode_image(ds.blocks[i], scaler, colormap);
        export_image(img.pixels, 1, dir / image_filename(img));
      }
    }
  }
  log << "dataset: " << ds.trials.size() << " trials, " << ds.blocks.size() << " blocks, "
      << ds.count(SplitRole::kTrain) << " train, " << ds.count(SplitRole::kTest) << " test\n";
}

void cmd_train(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const std::uint64_t seed = cfg.seed();
  const LabeledDataset ds = load_dataset(cfg);
  const Variant variant = parse_variant(cfg.str("variant", "cnn"));
  const std::string preset_name =
      cfg.str("preset", variant == Variant::kClstm ? "CLSTM" : default_preset(ds.task));
  TrainConfig tc = train_preset(preset_name);
  tc.learning_rate = cfg.num("lr", tc.learning_rate);
  tc.epochs = cfg.count("epochs", tc.epochs);
  tc.batch_size = cfg.count("batch_size", tc.batch_size);
  tc.seed = seed;
  tc.validate();
  if (tc.horizon != ds.rule.horizon) {
    log << "warning: preset " << preset_name << " expects horizon " << tc.horizon
        << " but the dataset uses " << ds.rule.horizon << "\n";
  }
  const ColormapKind colormap =
      parse_colormap(cfg.str("colormap", to_string(default_colormap(ds.task))));

  EventNetConfig nc;
  nc.variant = variant;
  nc.width = ds.block_length;
  nc.leaky_after_every_conv = cfg.flag("leaky_every");
  nc.init_seed = seed;
  EventNet net = build_eventnet(nc);
  const auto samples = make_samples(ds, SplitRole::kTrain, nc.frames(), colormap);
  require(!samples.empty(), "no training samples in the dataset");
  const TrainResult result = train(net, samples, tc, &log);

  Checkpoint cp = net.to_checkpoint();
  cp.meta.set("train.preset", preset_name);
  cp.meta.set("train.colormap", std::string(to_string(colormap)));
  cp.meta.set_exact("train.lr", tc.learning_rate);
  cp.meta.set("train.epochs", static_cast<long long>(tc.epochs));
  cp.meta.set("train.batch_size", static_cast<long long>(tc.batch_size));
  cp.meta.set("train.seed", std::to_string(tc.seed));
  cp.meta.set("train.samples", static_cast<long long>(samples.size()));
  cp.meta.set_exact("train.loss", result.loss_history);
  ensure_dir(cfg.out());
  save_checkpoint(cp, cfg.out() / kCheckpointFile);
  log << "train: " << samples.size() << " samples, final loss "
      << format_double(result.loss_history.back()) << "\n";
}

namespace {

ColormapKind checkpoint_colormap(const Checkpoint& cp, const LabeledDataset& ds) {
  return parse_colormap(cp.meta.get_or("train.colormap", to_string(default_colormap(ds.task))));
}

}  // namespace

void cmd_eval(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const LabeledDataset ds = load_dataset(cfg);
  Checkpoint cp;
  const EventNet net = load_network(cfg, &cp);
  const auto samples = make_samples(ds, parse_split(cfg.str("split", "test")), net.config().frames(),
                                    checkpoint_colormap(cp, ds));
  require(!samples.empty(), "no samples in the selected split");
  Metrics m = evaluate(net, samples);
  if (cp.meta.contains("train.loss")) m.loss_history = cp.meta.get_doubles("train.loss");
  ensure_dir(cfg.out());
  write_text_file(cfg.out() / kMetricsReportFile, metrics_report(m));
  write_text_file(cfg.out() / kMetricsCsvFile, metrics_csv(m));
  log << "eval: " << samples.size() << " samples, F1 " << format_double(m.classes[0].f1) << " / "
      << format_double(m.classes[1].f1) << "\n";
}

void cmd_explain(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const LabeledDataset ds = load_dataset(cfg);
  Checkpoint cp;
  const EventNet net = load_network(cfg, &cp);
  const ColormapKind colormap = checkpoint_colormap(cp, ds);
  const std::size_t frames = net.config().frames();
  const ExplainOptions options = explain_options(cfg);

  // Position of block `index` of `trial` in ds.blocks.
  std::map<std::pair<std::string, std::size_t>, std::size_t> where;
  for (std::size_t i = 0; i < ds.blocks.size(); ++i) where[{ds.blocks[i].trial_id, ds.blocks[i].index}] = i;
  auto window_ok = [&](const std::string& trial, std::size_t b) {
    if (b < 4) return false;
    for (std::size_t k = b - 4; k <= b + 1; ++k) {
      auto it = where.find({trial, k});
      if (it == where.end() || !make_sample(ds, it->second, frames, colormap)) return false;
    }
    return true;
  };

  std::string trial = cfg.str("trial", "");
  std::optional<std::size_t> block;
  if (cfg.has("block")) block = cfg.count("block", 0);
  if (!block) {
    for (std::size_t i = 1; i < ds.blocks.size() && !block; ++i) {
      const Block& a = ds.blocks[i - 1];
      const Block& b = ds.blocks[i];
      if ((!trial.empty() && b.trial_id != trial) || a.trial_id != b.trial_id) continue;
      if (a.label && b.label && *a.label != *b.label && window_ok(b.trial_id, b.index)) {
        trial = b.trial_id;
        block = b.index;
      }
    }
    require(block.has_value(), "no labeled transition with a complete b-4..b+1 window found");
  }
  require(!trial.empty(), "trial is required when block is given");
  require(window_ok(trial, *block), "blocks " + std::to_string(*block >= 4 ? *block - 4 : 0) + ".." +
                                        std::to_string(*block + 1) + " of trial " + trial +
                                        " are not all labeled with enough history");

  const std::string format = cfg.str("format", "ppm");
  require(format == "ppm" || format == "png", "format must be ppm or png");
  const std::size_t upscale = cfg.count("upscale", 16);
  require(upscale >= 1, "upscale must be at least 1");
  const fs::path dir = cfg.out() / "overlays";
  ensure_dir(dir);
  KeyValue summary;
  summary.set("trial", trial);
  summary.set("block", static_cast<long long>(*block));
  for (std::size_t k = *block - 4; k <= *block + 1; ++k) {
    const std::size_t pos = where.at({trial, k});
    const Sample sample = *make_sample(ds, pos, frames, colormap);
    const Explanation ex = explain_sample(net, sample, options);
    const KinodynamicImage viz = encode_image(ds.blocks[pos], ds.viz_scaler, colormap);
    export_image(render_overlay(viz.pixels, ex.saliency), upscale,
                 dir / overlay_filename(trial, k, "." + format));
    const std::string p = "block" + std::to_string(k) + ".";
    summary.set(p + "label", static_cast<long long>(ex.prediction.label));
    summary.set(p + "predicted", static_cast<long long>(ex.prediction.predicted));
    summary.set(p + "outcome", std::string(to_string(ex.outcome)));
    summary.set(p + "dominant", ex.dominant ? std::string(feature_name(*ex.dominant)) : "none");
  }
  summary.save(cfg.out() / "explain.txt");
  log << "explain: 6 overlays for " << trial << " blocks " << *block - 4 << ".." << *block + 1 << "\n";
}

void cmd_report(const KeyValue& config, std::ostream& log) {
  const Config cfg(config);
  const LabeledDataset ds = load_dataset(cfg);
  Checkpoint cp;
  const EventNet net = load_network(cfg, &cp);
  const auto samples = make_samples(ds, parse_split(cfg.str("split", "test")), net.config().frames(),
                                    checkpoint_colormap(cp, ds));
  require(!samples.empty(), "no samples in the selected split");
  const UtilizationReport report = utilization_report(net, samples, explain_options(cfg));
  ensure_dir(cfg.out());
  write_text_file(cfg.out() / kUtilizationCsvFile, report.csv());
  log << "report: " << samples.size() << " samples\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinodynamic-image pipeline: simulate, dataset, train, eval, explain, report", "kdi"};
  app.require_subcommand(1, 1);
  struct Command {
    const char* name;
    const char* help;
    unsigned bit;
    void (*run)(const KeyValue&, std::ostream&);
  };
  static constexpr Command kCommands[] = {
      {"simulate", "generate synthetic push or cut trials", kSimulate, cmd_simulate},
      {"dataset", "block, label, split and scale trials into a manifest", kDataset, cmd_dataset},
      {"train", "train an EventNet on the manifest's training split", kTrain, cmd_train},
      {"eval", "write metrics for a trained network", kEval, cmd_eval},
      {"explain", "render Grad-CAM overlays for blocks b-4..b+1", kExplain, cmd_explain},
      {"report", "write the feature utilization table", kReport, cmd_report},
  };
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "key=value config file; flags override it");
    for (const OptionSpec& o : kOptions) {
      if (o.commands & c.bit) sub->add_option(std::string("--") + o.key, flags[o.key], o.help);
    }
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  const Command* command = nullptr;
  CLI::App* active = nullptr;
  for (auto& [sub, c] : subs) {
    if (sub->parsed()) {
      command = c;
      active = sub;
    }
  }
  try {
    KeyValue merged;
    if (!config_path.empty()) {
      merged = KeyValue::load(config_path);
      for (const auto& [key, value] : merged.entries()) {
        const auto it = std::find_if(std::begin(kOptions), std::end(kOptions),
                                     [&](const OptionSpec& o) { return key == o.key; });
        require(it != std::end(kOptions) && (it->commands & command->bit),
                "config key '" + key + "' does not apply to " + command->name);
      }
    }
    for (const OptionSpec& o : kOptions) {
      if ((o.commands & command->bit) && active->count(std::string("--") + o.key) > 0) {
        merged.set(o.key, flags[o.key]);
      }
    }
    command->run(merged, out);
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kdi
