#pragma once

// Synthetic admittance-controlled manipulation trials.
//
// The controller commands an end-effector velocity
//     u = Ka * f_s - Kp * e + dp_d,     e = p - p_d,
// which is the composition of the admittance law u = Ka (f_s - f_r) with the
// compliant reference f_r = Ka^-1 (Kp e - dp_d). The end effector tracks u
// exactly; the plant models below produce the sensed force f_s.

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace kdi {

using Vec3 = std::array<double, 3>;

inline constexpr double kControlRate = 200.0;
inline constexpr double kControlPeriod = 0.005;
inline constexpr double kGravity = 9.81;

enum class TaskKind { kPush, kCut };

std::string to_string(TaskKind task);
TaskKind parse_task(const std::string& name);

struct ControllerConfig {
  Vec3 ka{0.005, 0.005, 0.005};  // compliance gain, diagonal, m/s per N
  Vec3 kp{0.5, 0.5, 0.5};        // position gain, diagonal, 1/s
  double dt = kControlPeriod;

  void validate() const;
};

Vec3 admittance_step(const Vec3& e, const Vec3& dp_d, const Vec3& f_s, const ControllerConfig& cfg);

enum class ProfileShape {
  kHold,       // zero velocity
  kConstant,   // amplitude
  kBump,       // amplitude * sin^2(pi * s / duration): starts and ends at rest
  kOscillate,  // amplitude * sin(2 pi * s / period)
};

struct Phase {
  double duration = 0.0;  // s
  // Each axis has its own shape so sawing (y) and slicing (z) can coexist.
  std::array<ProfileShape, 3> shape{ProfileShape::kHold, ProfileShape::kHold, ProfileShape::kHold};
  Vec3 amplitude{0.0, 0.0, 0.0};  // m/s
  double period = 1.0;            // s, kOscillate only
};

struct TrajectorySpec {
  std::vector<Phase> phases;

  double total_duration() const;
  std::size_t sample_count() const;  // round(total_duration * 200)
  Vec3 velocity_at(double t) const;  // desired velocity, zero past the end
  void validate() const;
};

// Fixtures used by the CLI defaults and tests.
TrajectorySpec push_trajectory(double total_duration, const std::array<double, 3>& peak_speeds);
TrajectorySpec default_push_trajectory();  // three bumps, 20 s
// approach_speed is the mean descent speed; repetitions alternate a sawing
// descent of slicing_distance with sawing in place.
TrajectorySpec cut_trajectory(double approach_duration, double approach_speed, int repetitions,
                              double repetition_duration, double sawing_range,
                              double slicing_distance);
TrajectorySpec default_cut_trajectory();  // 2 s approach + 6 x 3 s repetitions = 20 s

struct Inclusion {
  double depth_begin = 0.0;  // m, exclusive
  double depth_end = 0.0;    // m, inclusive
  double multiplier = 1.0;
};

struct MaterialParams {
  std::string name = "default";
  // pushing
  double mass = 0.190;  // kg
  double static_friction = 0.5;
  double kinetic_friction = 0.4;
  double contact_stiffness = 500.0;  // N/m, finger/sensor compliance
  double contact_damping = -1.0;     // N s/m; negative means critical damping for `mass`
  double initial_gap = 0.005;        // m between pusher and object at t=0
  // cutting
  double depth_stiffness = 300.0;     // N/m: cutting resistance k * d
  double sawing_friction = 1000.0;    // N s/m per m of depth: F_y = -c * d * ydot
  double breakaway_speed_per_newton = 0.004;  // m/s of sawing needed per N of resistance
  double indentation_stiffness = 2000.0;      // N/m while the blade is stalled
  double surface_height = 0.0;                // m, z of the object top
  std::vector<Inclusion> inclusions;

  double resistance_multiplier(double depth) const;
  void validate_push() const;
  void validate_cut() const;
  double effective_contact_damping() const;
};

// Five pushing surfaces and three cutting objects with plausible parameters.
std::vector<MaterialParams> push_materials();
std::vector<MaterialParams> cut_materials();

struct NoiseConfig {
  double force_sigma = 0.02;     // N
  double position_sigma = 5e-6;  // m
};

struct TrialMetadata {
  std::string trial_id;
  std::uint64_t seed = 0;
  ControllerConfig controller;
  MaterialParams material;
  TrajectorySpec trajectory;
  NoiseConfig noise;
};

struct Trial {
  TaskKind task = TaskKind::kPush;
  std::vector<double> time;
  std::vector<Vec3> position;  // m
  std::vector<Vec3> force;     // N, sensed
  std::vector<Vec3> command;   // m/s
  TrialMetadata meta;

  std::size_t size() const { return time.size(); }
  void validate() const;  // equal lengths, 200 Hz time column
};

// Noise-free plant state alongside the recorded trial, for tests and plots.
struct PushStateTrace {
  std::vector<double> object_position;  // rear face of the pushed object, m
  std::vector<double> object_velocity;
  std::vector<double> contact_force;  // magnitude, >= 0
  std::vector<bool> sticking;
};

struct CutStateTrace {
  std::vector<double> depth;          // m, monotone
  std::vector<double> vertical_force;  // N, >= 0
  std::vector<bool> stalled;
};

Trial simulate_push(const ControllerConfig& cfg, const TrajectorySpec& traj,
                    const MaterialParams& mat, std::uint64_t seed, const NoiseConfig& noise = {},
                    PushStateTrace* state = nullptr);

Trial simulate_cut(const ControllerConfig& cfg, const TrajectorySpec& traj,
                   const MaterialParams& mat, std::uint64_t seed, const NoiseConfig& noise = {},
                   CutStateTrace* state = nullptr);

// Trial CSV + `.meta` companion. `path` is the CSV path.
void write_trial(const Trial& trial, const std::filesystem::path& path);
Trial read_trial(const std::filesystem::path& path);  // reads the .meta too when present
std::string trial_csv(const Trial& trial);

inline constexpr double kNeverSlips = std::numeric_limits<double>::infinity();

}  // namespace kdi
