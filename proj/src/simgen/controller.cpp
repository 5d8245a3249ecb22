#include <cmath>

#include "kdi/error.hpp"
#include "kdi/simgen.hpp"

namespace kdi {

std::string to_string(TaskKind task) { return task == TaskKind::kPush ? "push" : "cut"; }

TaskKind parse_task(const std::string& name) {
  if (name == "push") return TaskKind::kPush;
  if (name == "cut") return TaskKind::kCut;
  throw ValidationError("unknown task '" + name + "' (expected push|cut)");
}

void ControllerConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    require(ka[i] > 0.0 && std::isfinite(ka[i]), "controller: Ka diagonal must be positive");
    require(std::isfinite(kp[i]), "controller: Kp must be finite");
  }
  require(dt == kControlPeriod, "controller: dt must be exactly 0.005 s");
}

Vec3 admittance_step(const Vec3& e, const Vec3& dp_d, const Vec3& f_s,
                     const ControllerConfig& cfg) {
  // u = Ka (f_s - f_r), f_r = Ka^-1 (Kp e - dp_d)  =>  u = Ka f_s - Kp e + dp_d
  Vec3 u{};
  for (int i = 0; i < 3; ++i) u[i] = cfg.ka[i] * f_s[i] - cfg.kp[i] * e[i] + dp_d[i];
  return u;
}

}  // namespace kdi
