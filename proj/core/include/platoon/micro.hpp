#pragma once

#include <optional>
#include <vector>

#include "platoon/dynamics.hpp"

namespace platoon {

// Microscopic validation of platoon formation on one straight edge: a leader
// cruising at v0 and one CAV follower driven by IDM.
//
// Follower modes:
//   alone     IDM with time gap tau_l
//   catch-up  entered when the time headway drops below tau_c; desired speed
//             is raised by catch_up_speed_factor and the IDM time gap is set so
//             that the equilibrium headway behind the leader equals tau_f
//   platoon   headway <= tau_f (1 + join_tolerance); same controller
// A platoon member that stays above the join band for t_s seconds is split off.
enum class MicroMode { kAlone, kCatchUp, kPlatoon };

struct MicroOptions {
  double dt = 0.05;
  double horizon = 600.0;
  double catch_up_speed_factor = 1.2;
  double join_tolerance = 0.01;
  // From this time on the follower drops its platoon controller (e.g. its
  // route diverges), which exercises the split timer.
  std::optional<double> detach_at;
  double sample_every = 1.0;
};

struct MicroSample {
  double t = 0.0;
  double x_leader = 0.0, v_leader = 0.0;
  double x_follower = 0.0, v_follower = 0.0;
  double headway = 0.0;  // gap / follower speed, s
  MicroMode mode = MicroMode::kAlone;
};

struct MicroResult {
  std::optional<double> join_time;
  std::optional<double> split_time;
  double min_headway = 0.0;
  bool collision = false;
  std::vector<MicroSample> samples;
};

// The follower starts `initial_headway` seconds behind the leader, both at v0.
MicroResult simulate_catch_up(const IdmParams& idm, const PlatoonParams& pp,
                              double initial_headway, const MicroOptions& opts = {});

}  // namespace platoon
