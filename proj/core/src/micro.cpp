#include "platoon/micro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace platoon {

MicroResult simulate_catch_up(const IdmParams& idm, const PlatoonParams& pp,
                              double initial_headway, const MicroOptions& opts) {
  idm.validate();
  pp.validate();
  if (!(initial_headway > 0) || !(opts.dt > 0) || !(opts.catch_up_speed_factor > 1.0))
    throw std::invalid_argument("simulate_catch_up: bad headway, step or speed factor");

  IdmParams alone = idm;
  alone.t_hw = pp.tau_l;
  IdmParams chase = idm;
  chase.v0 = opts.catch_up_speed_factor * idm.v0;
  chase.s0 = 0.0;

  const double join_band = pp.tau_f * (1.0 + opts.join_tolerance);
  double xl = initial_headway * idm.v0, vl = idm.v0;
  double xf = 0.0, vf = idm.v0;
  MicroMode mode = MicroMode::kAlone;
  bool detached = false;
  double above_since = -1.0;

  MicroResult out;
  out.min_headway = initial_headway;
  double next_sample = 0.0;
  const int steps = static_cast<int>(std::ceil(opts.horizon / opts.dt));
  for (int k = 0; k <= steps; ++k) {
    const double t = k * opts.dt;
    const double gap = xl - xf;
    if (!(gap > 0)) {
      out.collision = true;
      break;
    }
    const double headway = gap / std::max(vf, 0.1);
    out.min_headway = std::min(out.min_headway, headway);
    if (opts.detach_at && t >= *opts.detach_at) detached = true;

    if (mode == MicroMode::kAlone && !detached && !out.split_time && headway <= pp.tau_c)
      mode = MicroMode::kCatchUp;
    if (mode == MicroMode::kCatchUp && headway <= join_band) {
      mode = MicroMode::kPlatoon;
      if (!out.join_time) out.join_time = t;
    }
    if (mode == MicroMode::kPlatoon) {
      if (headway > join_band) {
        if (above_since < 0) above_since = t;
        if (t - above_since >= pp.t_s) {
          mode = MicroMode::kAlone;
          out.split_time = t;
        }
      } else {
        above_since = -1.0;
      }
    }

    if (t >= next_sample) {
      out.samples.push_back({t, xl, vl, xf, vf, headway, mode});
      next_sample += opts.sample_every;
    }

    const double al = idm_acceleration(vl, std::nullopt, 0.0, alone);
    double af;
    if (mode != MicroMode::kAlone && !detached) {
      // Time gap whose IDM equilibrium behind a leader at vl is exactly tau_f.
      chase.t_hw = pp.tau_f * std::sqrt(1.0 - std::pow(vl / chase.v0, chase.delta));
      af = idm_acceleration(vf, gap, vf - vl, chase);
    } else {
      af = idm_acceleration(vf, gap, vf - vl, alone);
    }
    vl = std::max(0.0, vl + al * opts.dt);
    vf = std::max(0.0, vf + af * opts.dt);
    xl += vl * opts.dt;
    xf += vf * opts.dt;
  }
  return out;
}

}  // namespace platoon
