#pragma once

#include <optional>

namespace platoon {

// All quantities are SI: seconds, meters, liters, dollars.

struct IdmParams {
  double v0 = 24.0;     // desired speed, m/s
  double s0 = 2.0;      // minimum gap, m
  double t_hw = 1.5;    // desired time headway, s
  double a = 1.0;       // maximum acceleration, m/s^2
  double b = 1.5;       // comfortable deceleration, m/s^2
  double delta = 4.0;   // acceleration exponent

  void validate() const;
  bool operator==(const IdmParams&) const = default;
};

struct FuelModel {
  double a3 = 3.51e-7;   // L s^2 / m^3
  double a1 = 4.07e-4;   // L / m
  double phi = 3.22e-4;  // nominal fuel efficiency, L / m
  double alpha = 3.51e-7;  // speed-adaptation fuel coefficient, L s^2 / m^3
  double eta = 0.1;      // follower fuel saving fraction

  void validate() const;
  bool operator==(const FuelModel&) const = default;
};

struct GreenshieldModel {
  double v0 = 24.0;   // free-flow speed, m/s
  double k_j = 0.07;  // jam density, veh/m/lane

  double k_c() const { return k_j / 2.0; }
  static GreenshieldModel from_critical_density(double v0, double k_c) { return {v0, 2.0 * k_c}; }
  void validate() const;
};

struct PlatoonParams {
  double tau_l = 7.5;  // leader desired headway, s
  double tau_f = 0.5;  // intra-platoon headway, s
  double tau_c = 5.0;  // catch-up headway, s
  double t_s = 30.0;   // split timer, s
  double h0 = 0.5;     // intra-platoon headway seen by arrival detectors, s

  // Road occupancy of a follower relative to a lone vehicle.
  double omega() const { return tau_f / tau_l; }
  void validate() const;
  bool operator==(const PlatoonParams&) const = default;
};

struct CostWeights {
  double w1 = 25.8 / 3600.0;  // value of time, $/s
  double w2 = 0.868;          // fuel price, $/L

  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

// r(v) = a3 v^3 + a1 v, liters per second. Throws std::invalid_argument for v < 0.
double fuel_rate(double v, const FuelModel& fm = {});

// Greenshield equilibrium speed v0 (1 - k/k_j), clamped to [0, v0].
double equilibrium_speed(double k_e, const GreenshieldModel& model);

// IDM acceleration. A missing gap means a free road.
double idm_acceleration(double v, std::optional<double> gap, double dv, const IdmParams& p);

// Reference speed over the coordinating zone for time reduction u:
// D1 / (D1/v0 - u). Throws InfeasibleTimeReduction when u >= D1/v0.
double reference_speed(double u, double d1, double v0);

// Extra fuel over the coordinating zone caused by speed adaptation.
double delta_f1(double u, double d1, double v0, double alpha);

struct SegmentCost {
  double cost = 0.0;  // $
  double fuel = 0.0;  // L
};

// Cost of dt seconds at constant speed v; merged followers pay (1 - eta) of the fuel.
SegmentCost trip_segment_cost(double dt, double v, bool merged_follower, const FuelModel& fm,
                              const CostWeights& w);

struct Occupancy {
  double alone = 0;
  double leaders = 0;
  double followers = 0;
  double background = 0;
};

// Lane density with followers weighted by omega, veh/m/lane.
double effective_density(const Occupancy& n, double length, int lanes, const PlatoonParams& pp);

}  // namespace platoon
