#include <algorithm>

#include "kdi/dataset.hpp"
#include "kdi/error.hpp"
#include "kdi/keyvalue.hpp"

namespace kdi {

namespace {

constexpr const char* kManifestFormat = "kdi-dataset-manifest-1";

char label_char(const std::optional<MotionClass>& label) {
  if (!label) return '-';
  return *label == MotionClass::kMotion ? '0' : '1';
}

char role_char(SplitRole role) {
  switch (role) {
    case SplitRole::kTrain: return 'T';
    case SplitRole::kTest: return 'E';
    case SplitRole::kUnassigned: return '-';
  }
  return '-';
}

SplitRole parse_role(char c) {
  switch (c) {
    case 'T': return SplitRole::kTrain;
    case 'E': return SplitRole::kTest;
    case '-': return SplitRole::kUnassigned;
  }
  throw ValidationError(std::string("manifest: bad split role '") + c + "'");
}

void finish_dataset(LabeledDataset& ds, const DatasetOptions& options) {
  ds.roles.assign(ds.blocks.size(), SplitRole::kUnassigned);
  if (!options.exclude_material.empty()) {
    // Held-out object: everything of that material is test, the rest trains.
    std::size_t offset = 0;
    for (const auto& entry : ds.trials) {
      const bool held_out = entry.material == options.exclude_material;
      for (std::size_t b = 0; b < entry.block_count; ++b) {
        const Block& block = ds.blocks[offset + b];
        if (block.label) ds.roles[offset + b] = held_out ? SplitRole::kTest : SplitRole::kTrain;
      }
      offset += entry.block_count;
    }
    require(ds.count(SplitRole::kTest) > 0,
            "dataset: no labeled blocks of excluded material '" + options.exclude_material + "'");
  } else {
    ds.roles = split_blocks(ds.blocks, options.split);
  }
  const auto train = ds.select(SplitRole::kTrain);
  require(!train.empty(), "dataset: training split is empty");
  ds.train_scaler = TrainScaler::fit(train);
  ds.viz_scaler = VizScaler::fit(train);
}

}  // namespace

LabeledDataset build_dataset(TaskKind task, std::span<const Trial> trials,
                             const DatasetOptions& options) {
  LabeledDataset ds;
  ds.task = task;
  ds.block_length = options.block_length;
  ds.rule = options.rule;
  ds.split_seed = options.split.seed;
  ds.excluded_material = options.exclude_material;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    Trial trial = trials[i];
    if (trial.meta.trial_id.empty()) trial.meta.trial_id = "trial_" + std::to_string(i);
    auto blocks = make_blocks(trial, options.block_length);
    assign_labels(blocks, options.rule.axis, options.rule.horizon, options.rule.threshold);
    TrialEntry entry;
    entry.trial_id = trial.meta.trial_id;
    entry.material = trial.meta.material.name;
    entry.block_count = blocks.size();
    ds.trials.push_back(entry);
    std::move(blocks.begin(), blocks.end(), std::back_inserter(ds.blocks));
  }
  finish_dataset(ds, options);
  return ds;
}

LabeledDataset build_dataset(TaskKind task, std::span<const std::filesystem::path> trial_paths,
                             const DatasetOptions& options) {
  std::vector<Trial> trials;
  trials.reserve(trial_paths.size());
  for (const auto& path : trial_paths) trials.push_back(read_trial(path));
  LabeledDataset ds = build_dataset(task, trials, options);
  for (std::size_t i = 0; i < trial_paths.size(); ++i) ds.trials[i].path = trial_paths[i];
  return ds;
}

void write_manifest(const LabeledDataset& ds, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::absolute(path).parent_path();
  KeyValue kv;
  kv.set("format", kManifestFormat);
  kv.set("task", to_string(ds.task));
  kv.set("block_length", static_cast<long long>(ds.block_length));
  kv.set("label_axis", to_string(ds.rule.axis));
  kv.set("label_horizon", static_cast<long long>(ds.rule.horizon));
  kv.set_exact("label_threshold", ds.rule.threshold);
  kv.set("split_seed", std::to_string(ds.split_seed));
  kv.set("exclude_material", ds.excluded_material);
  kv.set("train_blocks", static_cast<long long>(ds.count(SplitRole::kTrain)));
  kv.set("test_blocks", static_cast<long long>(ds.count(SplitRole::kTest)));
  kv.set("trials", static_cast<long long>(ds.trials.size()));
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ds.trials.size(); ++i) {
    const auto& t = ds.trials[i];
    const std::string key = "trial." + std::to_string(i) + ".";
    fs::path stored = t.path;
    if (!stored.empty()) stored = fs::absolute(stored).lexically_relative(base);
    kv.set(key + "path", stored.generic_string());
    kv.set(key + "id", t.trial_id);
    kv.set(key + "material", t.material);
    kv.set(key + "blocks", static_cast<long long>(t.block_count));
    std::string labels, roles;
    for (std::size_t b = 0; b < t.block_count; ++b) {
      labels += label_char(ds.blocks[offset + b].label);
      roles += role_char(ds.roles[offset + b]);
    }
    kv.set(key + "labels", labels);
    kv.set(key + "roles", roles);
    offset += t.block_count;
  }
  const auto& ts = ds.train_scaler;
  kv.set_exact("train_scaler.min", std::span<const double>(ts.mins()));
  kv.set_exact("train_scaler.max", std::span<const double>(ts.maxs()));
  kv.set_exact("viz_scaler.absmax", std::span<const double>(ds.viz_scaler.absmax()));
  kv.save(path);
}

LabeledDataset read_manifest(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const KeyValue kv = KeyValue::load(path);
  require(kv.get_or("format", "") == kManifestFormat, "manifest: unsupported format");
  const fs::path base = fs::absolute(path).parent_path();

  LabeledDataset ds;
  ds.task = parse_task(kv.get("task"));
  ds.block_length = static_cast<std::size_t>(kv.get_int("block_length"));
  ds.rule.axis = parse_axis(kv.get("label_axis"));
  ds.rule.horizon = static_cast<std::size_t>(kv.get_int("label_horizon"));
  ds.rule.threshold = kv.get_double("label_threshold");
  ds.split_seed = std::stoull(kv.get("split_seed"));
  ds.excluded_material = kv.get_or("exclude_material", "");

  const auto n_trials = static_cast<std::size_t>(kv.get_int("trials"));
  for (std::size_t i = 0; i < n_trials; ++i) {
    const std::string key = "trial." + std::to_string(i) + ".";
    TrialEntry entry;
    entry.path = base / fs::path(kv.get(key + "path"));
    entry.trial_id = kv.get(key + "id");
    entry.material = kv.get(key + "material");
    entry.block_count = static_cast<std::size_t>(kv.get_int(key + "blocks"));
    const std::string& labels = kv.get(key + "labels");
    const std::string& roles = kv.get(key + "roles");
    require(labels.size() == entry.block_count && roles.size() == entry.block_count,
            "manifest: label/role strings do not match block count for " + entry.trial_id);

    Trial trial = read_trial(entry.path);
    trial.meta.trial_id = entry.trial_id;
    auto blocks = make_blocks(trial, ds.block_length);
    require(blocks.size() == entry.block_count,
            "manifest: trial " + entry.trial_id + " no longer yields the recorded block count");
    assign_labels(blocks, ds.rule.axis, ds.rule.horizon, ds.rule.threshold);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      require(label_char(blocks[b].label) == labels[b],
              "manifest: label mismatch in " + entry.trial_id + " block " + std::to_string(b));
      ds.roles.push_back(parse_role(roles[b]));
    }
    std::move(blocks.begin(), blocks.end(), std::back_inserter(ds.blocks));
    ds.trials.push_back(std::move(entry));
  }
  ds.train_scaler =
      TrainScaler::from_parameters(kv.get_doubles("train_scaler.min"), kv.get_doubles("train_scaler.max"));
  ds.viz_scaler = VizScaler::from_parameters(kv.get_doubles("viz_scaler.absmax"));
  return ds;
}

}  // namespace kdi
