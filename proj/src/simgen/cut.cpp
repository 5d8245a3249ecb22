// Cutting plant: the knife saws along y and slices along z. The blade rests on
// the bottom of the cut through an elastic indentation; the bottom yields
// (depth grows) only while the sawing speed clears a threshold proportional to
// the local cutting resistance k * d * multiplier(d).

#include <cmath>
#include <random>

#include "kdi/error.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

double MaterialParams::resistance_multiplier(double depth) const {
  double m = 1.0;
  for (const auto& inc : inclusions) {
    if (depth > inc.depth_begin && depth <= inc.depth_end) m = std::max(m, inc.multiplier);
  }
  return m;
}

void MaterialParams::validate_cut() const {
  require(depth_stiffness >= 0.0, "material: depth stiffness must be non-negative");
  require(sawing_friction >= 0.0, "material: sawing friction must be non-negative");
  require(breakaway_speed_per_newton >= 0.0, "material: breakaway speed must be non-negative");
  require(indentation_stiffness > 0.0, "material: indentation stiffness must be positive");
  for (const auto& inc : inclusions) {
    require(inc.multiplier >= 1.0, "material: inclusion multiplier must be >= 1");
    require(inc.depth_end > inc.depth_begin, "material: inclusion interval must be non-empty");
  }
}

std::vector<MaterialParams> cut_materials() {
  std::vector<MaterialParams> out;
  MaterialParams zucchini;
  zucchini.name = "zucchini";
  zucchini.depth_stiffness = 60.0;
  zucchini.sawing_friction = 400.0;
  zucchini.breakaway_speed_per_newton = 0.015;
  out.push_back(zucchini);

  MaterialParams potato;
  potato.name = "potato";
  potato.depth_stiffness = 180.0;
  potato.sawing_friction = 900.0;
  potato.breakaway_speed_per_newton = 0.02;
  out.push_back(potato);

  MaterialParams carrot;
  carrot.name = "carrot";
  carrot.depth_stiffness = 120.0;
  carrot.sawing_friction = 700.0;
  carrot.breakaway_speed_per_newton = 0.02;
  carrot.inclusions.push_back({0.010, 0.018, 3.0});  // dense core
  out.push_back(carrot);
  return out;
}

Trial simulate_cut(const ControllerConfig& cfg, const TrajectorySpec& traj,
                   const MaterialParams& mat, std::uint64_t seed, const NoiseConfig& noise,
                   CutStateTrace* state) {
  cfg.validate();
  traj.validate();
  mat.validate_cut();
  require(traj.sample_count() > 0, "cut: empty trajectory");

  const std::size_t n = traj.sample_count();
  const double dt = cfg.dt;
  const double surface = mat.surface_height;
  auto resistance = [&](double d) { return mat.depth_stiffness * d * mat.resistance_multiplier(d); };

  Trial trial;
  trial.task = TaskKind::kCut;
  trial.meta.seed = seed;
  trial.meta.controller = cfg;
  trial.meta.material = mat;
  trial.meta.trajectory = traj;
  trial.meta.noise = noise;
  trial.time.resize(n);
  trial.position.resize(n);
  trial.force.resize(n);
  trial.command.resize(n);
  if (state) *state = CutStateTrace{};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vec3 p{0.0, 0.0, 0.0};
  Vec3 p_d = p;
  double depth = 0.0;
  bool stalled = false;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double bottom = surface - depth;
    const double indentation = std::max(0.0, bottom - p[2]);
    const double f_z = mat.indentation_stiffness * indentation;
    const double blade_in_material = std::max(0.0, surface - p[2]);

    Vec3 measured_p{};
    Vec3 sensor_noise{};
    for (int a = 0; a < 3; ++a) measured_p[a] = p[a] + noise.position_sigma * gauss(rng);
    for (int a = 0; a < 3; ++a) sensor_noise[a] = noise.force_sigma * gauss(rng);

    const Vec3 v_d = traj.velocity_at(t);
    Vec3 e{};
    for (int a = 0; a < 3; ++a) e[a] = measured_p[a] - p_d[a];

    // Sawing friction F_y = -c d ydot acts on the velocity being commanded,
    // so solve the y loop implicitly.
    const double viscous = mat.sawing_friction * blade_in_material;
    const double ka_y = cfg.ka[1];
    const double u_y = (ka_y * sensor_noise[1] - cfg.kp[1] * e[1] + v_d[1]) / (1.0 + ka_y * viscous);
    const Vec3 f_true{0.0, -viscous * u_y, f_z};

    Vec3 f_s{};
    for (int a = 0; a < 3; ++a) f_s[a] = f_true[a] + sensor_noise[a];
    const Vec3 u = admittance_step(e, v_d, f_s, cfg);

    trial.time[i] = t;
    trial.position[i] = measured_p;
    trial.force[i] = f_s;
    trial.command[i] = u;
    if (state) {
      state->depth.push_back(depth);
      state->vertical_force.push_back(f_z);
      state->stalled.push_back(stalled);
    }

    for (int a = 0; a < 3; ++a) {
      p[a] += u[a] * dt;
      p_d[a] += v_d[a] * dt;
    }

    // Material yields where blade pressure exceeds the cutting resistance,
    // gated by sawing speed.
    stalled = false;
    const double pressed = surface - depth - p[2];
    if (pressed > 0.0) {
      const double candidate = depth + pressed - resistance(depth) / mat.indentation_stiffness;
      if (candidate > depth) {
        const double threshold = mat.breakaway_speed_per_newton * resistance(candidate);
        if (std::abs(u[1]) >= threshold) {
          depth = candidate;
        } else {
          stalled = true;
        }
      }
    }
  }
  return trial;
}

}  // namespace kdi
