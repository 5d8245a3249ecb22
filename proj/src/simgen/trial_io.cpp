#include <cmath>
#include <sstream>

#include "kdi/error.hpp"
#include "kdi/keyvalue.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

namespace {

constexpr const char* kHeader = "t,px,py,pz,fx,fy,fz,ux,uy,uz";
constexpr double kStepTolerance = 1e-9;

std::string join3(const Vec3& v) {
  return format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]);
}

Vec3 split3(const std::string& s) {
  Vec3 v{};
  std::stringstream ss(s);
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ',')) throw ValidationError("expected 3 comma-separated values");
    v[i] = parse_double(item);
  }
  return v;
}

const char* shape_name(ProfileShape s) {
  switch (s) {
    case ProfileShape::kHold: return "hold";
    case ProfileShape::kConstant: return "constant";
    case ProfileShape::kBump: return "bump";
    case ProfileShape::kOscillate: return "oscillate";
  }
  return "hold";
}

ProfileShape parse_shape(const std::string& s) {
  if (s == "hold") return ProfileShape::kHold;
  if (s == "constant") return ProfileShape::kConstant;
  if (s == "bump") return ProfileShape::kBump;
  if (s == "oscillate") return ProfileShape::kOscillate;
  throw ValidationError("unknown profile shape '" + s + "'");
}

std::filesystem::path meta_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta");
  return p;
}

KeyValue metadata_to_kv(const Trial& trial) {
  const auto& m = trial.meta;
  KeyValue kv;
  kv.set("task", to_string(trial.task));
  kv.set("trial_id", m.trial_id);
  kv.set("seed", std::to_string(m.seed));
  kv.set("samples", static_cast<long long>(trial.size()));
  kv.set("ka", join3(m.controller.ka));
  kv.set("kp", join3(m.controller.kp));
  kv.set("dt", m.controller.dt);
  kv.set("material", m.material.name);
  kv.set("mass", m.material.mass);
  kv.set("static_friction", m.material.static_friction);
  kv.set("kinetic_friction", m.material.kinetic_friction);
  kv.set("contact_stiffness", m.material.contact_stiffness);
  kv.set("contact_damping", m.material.contact_damping);
  kv.set("initial_gap", m.material.initial_gap);
  kv.set("depth_stiffness", m.material.depth_stiffness);
  kv.set("sawing_friction", m.material.sawing_friction);
  kv.set("breakaway_speed_per_newton", m.material.breakaway_speed_per_newton);
  kv.set("indentation_stiffness", m.material.indentation_stiffness);
  kv.set("surface_height", m.material.surface_height);
  kv.set("inclusions", static_cast<long long>(m.material.inclusions.size()));
  for (std::size_t i = 0; i < m.material.inclusions.size(); ++i) {
    const auto& inc = m.material.inclusions[i];
    kv.set("inclusion." + std::to_string(i),
           format_double(inc.depth_begin) + "," + format_double(inc.depth_end) + "," +
               format_double(inc.multiplier));
  }
  kv.set("force_sigma", m.noise.force_sigma);
  kv.set("position_sigma", m.noise.position_sigma);
  kv.set("phases", static_cast<long long>(m.trajectory.phases.size()));
  for (std::size_t i = 0; i < m.trajectory.phases.size(); ++i) {
    const auto& ph = m.trajectory.phases[i];
    kv.set("phase." + std::to_string(i),
           format_double(ph.duration) + "," + shape_name(ph.shape[0]) + "," +
               shape_name(ph.shape[1]) + "," + shape_name(ph.shape[2]) + "," + join3(ph.amplitude) +
               "," + format_double(ph.period));
  }
  return kv;
}

void kv_to_metadata(const KeyValue& kv, Trial& trial) {
  auto& m = trial.meta;
  trial.task = parse_task(kv.get("task"));
  if (auto id = kv.get_or("trial_id", ""); !id.empty()) m.trial_id = id;
  m.seed = static_cast<std::uint64_t>(std::stoull(kv.get_or("seed", "0")));
  if (kv.contains("ka")) m.controller.ka = split3(kv.get("ka"));
  if (kv.contains("kp")) m.controller.kp = split3(kv.get("kp"));
  auto num = [&](const char* key, double& field) {
    if (kv.contains(key)) field = kv.get_double(key);
  };
  m.material.name = kv.get_or("material", m.material.name);
  num("mass", m.material.mass);
  num("static_friction", m.material.static_friction);
  num("kinetic_friction", m.material.kinetic_friction);
  num("contact_stiffness", m.material.contact_stiffness);
  num("contact_damping", m.material.contact_damping);
  num("initial_gap", m.material.initial_gap);
  num("depth_stiffness", m.material.depth_stiffness);
  num("sawing_friction", m.material.sawing_friction);
  num("breakaway_speed_per_newton", m.material.breakaway_speed_per_newton);
  num("indentation_stiffness", m.material.indentation_stiffness);
  num("surface_height", m.material.surface_height);
  num("force_sigma", m.noise.force_sigma);
  num("position_sigma", m.noise.position_sigma);
  const long long n_inc = std::stoll(kv.get_or("inclusions", "0"));
  for (long long i = 0; i < n_inc; ++i) {
    const Vec3 v = split3(kv.get("inclusion." + std::to_string(i)));
    m.material.inclusions.push_back({v[0], v[1], v[2]});
  }
  const long long n_phase = std::stoll(kv.get_or("phases", "0"));
  for (long long i = 0; i < n_phase; ++i) {
    std::stringstream ss(kv.get("phase." + std::to_string(i)));
    std::vector<std::string> f;
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    require(f.size() == 8, "meta: malformed phase entry");
    Phase ph;
    ph.duration = parse_double(f[0]);
    for (int a = 0; a < 3; ++a) ph.shape[a] = parse_shape(f[1 + a]);
    for (int a = 0; a < 3; ++a) ph.amplitude[a] = parse_double(f[4 + a]);
    ph.period = parse_double(f[7]);
    m.trajectory.phases.push_back(ph);
  }
}

}  // namespace

void Trial::validate() const {
  const std::size_t n = time.size();
  require(position.size() == n && force.size() == n && command.size() == n,
          "trial: columns have different lengths");
  for (std::size_t i = 1; i < n; ++i) {
    const double step = time[i] - time[i - 1];
    if (std::abs(step - kControlPeriod) > kStepTolerance) {
      throw ValidationError("trial: time column is not sampled at 200 Hz (row " +
                            std::to_string(i) + ")");
    }
  }
}

std::string trial_csv(const Trial& trial) {
  trial.validate();
  std::string out = kHeader;
  out += '\n';
  for (std::size_t i = 0; i < trial.size(); ++i) {
    out += format_double(trial.time[i]);
    out += ',';
    out += join3(trial.position[i]);
    out += ',';
    out += join3(trial.force[i]);
    out += ',';
    out += join3(trial.command[i]);
    out += '\n';
  }
  return out;
}

void write_trial(const Trial& trial, const std::filesystem::path& path) {
  write_text_file(path, trial_csv(trial));
  metadata_to_kv(trial).save(meta_path(path));
}

Trial read_trial(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw ValidationError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw ValidationError(path.string() + ": unexpected header '" + line + "'");
  }
  Trial trial;
  trial.meta.trial_id = path.stem().string();
  std::size_t row = 0;
  while (std::getline(ss, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    double v[10];
    int count = 0;
    while (std::getline(ls, field, ',')) {
      if (count < 10) v[count] = parse_double(field);
      ++count;
    }
    if (count != 10) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            " does not have 10 fields");
    }
    trial.time.push_back(v[0]);
    trial.position.push_back({v[1], v[2], v[3]});
    trial.force.push_back({v[4], v[5], v[6]});
    trial.command.push_back({v[7], v[8], v[9]});
  }
  const auto meta = meta_path(path);
  if (std::filesystem::exists(meta)) kv_to_metadata(KeyValue::load(meta), trial);
  trial.validate();
  return trial;
}

}  // namespace kdi
