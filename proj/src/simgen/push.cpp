// Pushing plant: a rigid pusher drives a box along +y through a compliant,
// damped contact. The box obeys Coulomb stick-slip friction.

#include <cmath>
#include <random>

#include "kdi/error.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

void MaterialParams::validate_push() const {
  require(mass > 0.0, "material: mass must be positive");
  require(kinetic_friction >= 0.0 && static_friction >= 0.0,
          "material: friction coefficients must be non-negative");
  require(static_friction >= kinetic_friction,
          "material: static friction must not be below kinetic friction");
  require(contact_stiffness > 0.0, "material: contact stiffness must be positive");
  require(initial_gap >= 0.0, "material: initial gap must be non-negative");
}

double MaterialParams::effective_contact_damping() const {
  return contact_damping >= 0.0 ? contact_damping : 2.0 * std::sqrt(contact_stiffness * mass);
}

std::vector<MaterialParams> push_materials() {
  struct Surface {
    const char* name;
    double mu_s, mu_k;
  };
  constexpr Surface kSurfaces[] = {
      {"cork", 0.60, 0.45},          {"sandpaper", 0.80, 0.60}, {"felt", 0.45, 0.33},
      {"gouache_paper", 0.38, 0.26}, {"crafting_paper", 0.28, 0.19},
  };
  std::vector<MaterialParams> out;
  for (const auto& s : kSurfaces) {
    MaterialParams m;
    m.name = s.name;
    m.static_friction = s.mu_s;
    m.kinetic_friction = s.mu_k;
    out.push_back(m);
  }
  return out;
}

Trial simulate_push(const ControllerConfig& cfg, const TrajectorySpec& traj,
                    const MaterialParams& mat, std::uint64_t seed, const NoiseConfig& noise,
                    PushStateTrace* state) {
  cfg.validate();
  traj.validate();
  mat.validate_push();

  const std::size_t n = traj.sample_count();
  const double dt = cfg.dt;
  const double weight = mat.mass * kGravity;
  const double breakaway = mat.static_friction * weight;
  const double kinetic = mat.kinetic_friction * weight;
  const double damping = mat.effective_contact_damping();

  Trial trial;
  trial.task = TaskKind::kPush;
  trial.meta.seed = seed;
  trial.meta.controller = cfg;
  trial.meta.material = mat;
  trial.meta.trajectory = traj;
  trial.meta.noise = noise;
  trial.time.resize(n);
  trial.position.resize(n);
  trial.force.resize(n);
  trial.command.resize(n);
  if (state) *state = PushStateTrace{};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vec3 p{0.0, 0.0, 0.0};
  Vec3 p_d = p;
  double pusher_velocity = 0.0;
  double box = mat.initial_gap;
  double box_velocity = 0.0;
  bool sticking = true;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;

    const double penetration = p[1] - box;
    double contact = 0.0;
    if (penetration > 0.0) {
      contact = mat.contact_stiffness * penetration + damping * (pusher_velocity - box_velocity);
      contact = std::max(contact, 0.0);
    }
    if (sticking && contact > breakaway) sticking = false;

    Vec3 measured_p{};
    Vec3 f_s{};
    for (int a = 0; a < 3; ++a) measured_p[a] = p[a] + noise.position_sigma * gauss(rng);
    for (int a = 0; a < 3; ++a) f_s[a] = noise.force_sigma * gauss(rng);
    f_s[1] -= contact;  // the object pushes back against +y motion

    const Vec3 v_d = traj.velocity_at(t);
    Vec3 e{};
    for (int a = 0; a < 3; ++a) e[a] = measured_p[a] - p_d[a];
    const Vec3 u = admittance_step(e, v_d, f_s, cfg);

    trial.time[i] = t;
    trial.position[i] = measured_p;
    trial.force[i] = f_s;
    trial.command[i] = u;
    if (state) {
      state->object_position.push_back(box);
      state->object_velocity.push_back(box_velocity);
      state->contact_force.push_back(contact);
      state->sticking.push_back(sticking);
    }

    for (int a = 0; a < 3; ++a) {
      p[a] += u[a] * dt;
      p_d[a] += v_d[a] * dt;
    }
    pusher_velocity = u[1];

    if (!sticking) {
      box_velocity += (contact - kinetic) / mat.mass * dt;
      if (box_velocity <= 0.0) {
        box_velocity = 0.0;
        sticking = true;
      }
      box += box_velocity * dt;
    }
  }
  return trial;
}

}  // namespace kdi
