#pragma once

// Event ordering under 1+1 dimensional Lorentz boosts, for arranging two moving
// analyzers so that each one, in its own rest frame, acts first.
//
// Convention: a frame moving with velocity beta*c along +x assigns
// t' = gamma (t - beta x / c). Events further along the direction of motion
// happen earlier in that frame.

#include <algorithm>
#include <cmath>
#include <string>

#include "chainbell/errors.hpp"

namespace chainbell {

inline constexpr double kSpeedOfLight = 299792458.0;

struct SpacetimeEvent {
  double t = 0.0;  // s
  double x = 0.0;  // m
};

class FrameVelocity {
 public:
  explicit FrameVelocity(double beta = 0.0) : beta_(beta) {
    if (!(std::abs(beta) < 1.0)) throw InputError("frame speed must satisfy |beta| < 1, got " + std::to_string(beta));
  }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return 1.0 / std::sqrt(1.0 - beta_ * beta_); }

 private:
  double beta_;
};

inline void require_positive_c(double c) {
  if (!(c > 0.0)) throw InputError("speed of light must be positive");
}

inline SpacetimeEvent boost(const SpacetimeEvent& e, FrameVelocity f, double c = kSpeedOfLight) {
  require_positive_c(c);
  const double g = f.gamma(), b = f.beta();
  return {g * (e.t - b * e.x / c), g * (e.x - b * c * e.t)};
}

inline double boosted_time(const SpacetimeEvent& e, FrameVelocity f, double c = kSpeedOfLight) {
  return boost(e, f, c).t;
}

inline bool is_spacelike(const SpacetimeEvent& a, const SpacetimeEvent& b, double c = kSpeedOfLight) {
  require_positive_c(c);
  return c * std::abs(b.t - a.t) < std::abs(b.x - a.x);
}

struct BeforeBeforeReport {
  bool holds = false;
  bool spacelike = false;
  // Event times in the frame of each analyzer.
  double a_frame_t_a = 0.0, a_frame_t_b = 0.0;
  double b_frame_t_a = 0.0, b_frame_t_b = 0.0;
  bool a_first_in_a_frame = false;
  bool b_first_in_b_frame = false;
  std::string reason;
};

/// Each analyzer must strictly precede the other in its own rest frame.
inline BeforeBeforeReport before_before_holds(const SpacetimeEvent& ea, const SpacetimeEvent& eb, FrameVelocity beta_a,
                                              FrameVelocity beta_b, double c = kSpeedOfLight) {
  BeforeBeforeReport r;
  r.spacelike = is_spacelike(ea, eb, c);
  r.a_frame_t_a = boosted_time(ea, beta_a, c);
  r.a_frame_t_b = boosted_time(eb, beta_a, c);
  r.b_frame_t_a = boosted_time(ea, beta_b, c);
  r.b_frame_t_b = boosted_time(eb, beta_b, c);
  r.a_first_in_a_frame = r.a_frame_t_a < r.a_frame_t_b;
  r.b_first_in_b_frame = r.b_frame_t_b < r.b_frame_t_a;
  if (!r.spacelike) {
    r.reason = "invariant order";
    return r;
  }
  r.holds = r.a_first_in_a_frame && r.b_first_in_b_frame;
  if (r.holds)
    r.reason = "each analyzer first in its own frame";
  else if (!r.a_first_in_a_frame && !r.b_first_in_b_frame)
    r.reason = "neither analyzer first in its own frame";
  else
    r.reason = r.a_first_in_a_frame ? "B not first in its own frame" : "A not first in its own frame";
  return r;
}

struct PriorityThreshold {
  double min_speed = 0.0;  // |beta| above which the local event comes first
  int direction = 0;       // sign of beta required: -1 or +1
};

/// Slowest frame in which a local event precedes a remote one.
/// `delta_t` = t_local - t_remote, `delta_x` = x_remote - x_local. The local event
/// is first iff beta * delta_x / c < -delta_t, i.e. for frames receding from the
/// remote event faster than c * delta_t / |delta_x| (zero when it is already first).
inline PriorityThreshold min_speed_for_priority(double delta_t, double delta_x, double c = kSpeedOfLight) {
  require_positive_c(c);
  if (!(c * std::abs(delta_t) < std::abs(delta_x))) throw InputError("no such frame: events are not spacelike");
  return {std::max(0.0, c * delta_t / std::abs(delta_x)), delta_x > 0 ? -1 : +1};
}

}  // namespace chainbell
