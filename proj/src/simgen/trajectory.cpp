#include <cmath>
#include <numbers>

#include "kdi/error.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

double TrajectorySpec::total_duration() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

std::size_t TrajectorySpec::sample_count() const {
  return static_cast<std::size_t>(std::llround(total_duration() * kControlRate));
}

namespace {

double shape_value(ProfileShape shape, double amplitude, double s, const Phase& phase) {
  using std::numbers::pi;
  switch (shape) {
    case ProfileShape::kHold:
      return 0.0;
    case ProfileShape::kConstant:
      return amplitude;
    case ProfileShape::kBump: {
      const double x = std::sin(pi * s / phase.duration);
      return amplitude * x * x;
    }
    case ProfileShape::kOscillate:
      return amplitude * std::sin(2.0 * pi * s / phase.period);
  }
  return 0.0;
}

}  // namespace

Vec3 TrajectorySpec::velocity_at(double t) const {
  double start = 0.0;
  for (const auto& phase : phases) {
    if (t < start + phase.duration) {
      const double s = t - start;
      Vec3 v{};
      for (int i = 0; i < 3; ++i) v[i] = shape_value(phase.shape[i], phase.amplitude[i], s, phase);
      return v;
    }
    start += phase.duration;
  }
  return {0.0, 0.0, 0.0};
}

void TrajectorySpec::validate() const {
  require(!phases.empty(), "trajectory: no phases");
  for (const auto& p : phases) {
    require(p.duration > 0.0 && std::isfinite(p.duration), "trajectory: phase duration must be positive");
    for (int i = 0; i < 3; ++i) {
      if (p.shape[i] == ProfileShape::kOscillate) {
        require(p.period > 0.0, "trajectory: oscillation period must be positive");
      }
    }
  }
}

TrajectorySpec push_trajectory(double total_duration, const std::array<double, 3>& peak_speeds) {
  require(total_duration > 0.0, "push trajectory: duration must be positive");
  // 4 rests (start, between pushes, end) take 20% of the time, 3 pushes the rest.
  const double rest = 0.05 * total_duration;
  const double push = (total_duration - 4.0 * rest) / 3.0;
  TrajectorySpec spec;
  auto add_rest = [&] { spec.phases.push_back(Phase{rest, {}, {}, 1.0}); };
  add_rest();
  for (double peak : peak_speeds) {
    Phase p;
    p.duration = push;
    p.shape = {ProfileShape::kHold, ProfileShape::kBump, ProfileShape::kHold};
    p.amplitude = {0.0, peak, 0.0};
    spec.phases.push_back(p);
    add_rest();
  }
  return spec;
}

TrajectorySpec default_push_trajectory() { return push_trajectory(20.0, {0.03, 0.025, 0.035}); }

TrajectorySpec cut_trajectory(double approach_duration, double approach_speed, int repetitions,
                              double repetition_duration, double sawing_range,
                              double slicing_distance) {
  using std::numbers::pi;
  require(repetitions >= 1, "cut trajectory: need at least one repetition");
  TrajectorySpec spec;
  if (approach_duration > 0.0) {
    Phase approach;
    approach.duration = approach_duration;
    approach.shape = {ProfileShape::kHold, ProfileShape::kHold, ProfileShape::kBump};
    approach.amplitude = {0.0, 0.0, -2.0 * approach_speed};
    spec.phases.push_back(approach);
  }
  // Each repetition: slice down while sawing for the first half, saw in place
  // for the second half. Two sawing strokes per half. Descents are sin^2
  // bumps (peak = 2 x mean speed) so the desired velocity never jumps.
  const double half = 0.5 * repetition_duration;
  const double period = 0.5 * half;
  const double saw_speed = pi * sawing_range / period;
  for (int r = 0; r < repetitions; ++r) {
    Phase slice;
    slice.duration = half;
    slice.period = period;
    slice.shape = {ProfileShape::kHold, ProfileShape::kOscillate, ProfileShape::kBump};
    slice.amplitude = {0.0, saw_speed, -2.0 * slicing_distance / half};
    spec.phases.push_back(slice);
    Phase saw = slice;
    saw.shape[2] = ProfileShape::kHold;
    saw.amplitude[2] = 0.0;
    spec.phases.push_back(saw);
  }
  return spec;
}

TrajectorySpec default_cut_trajectory() { return cut_trajectory(2.0, 0.01, 6, 3.0, 0.04, 0.02); }

}  // namespace kdi
