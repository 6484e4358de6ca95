#include "platoon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "platoon/error.hpp"

namespace platoon {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void IdmParams::validate() const {
  require(v0 > 0 && s0 > 0 && t_hw > 0 && a > 0 && b > 0, "IDM parameters must be positive");
  require(delta >= 1.0, "IDM exponent must be >= 1");
}

void FuelModel::validate() const {
  require(a3 > 0 && a1 > 0 && phi > 0 && alpha > 0, "fuel coefficients must be positive");
  require(eta > 0 && eta < 1, "eta must lie in (0,1)");
}

void GreenshieldModel::validate() const {
  require(v0 > 0 && k_j > 0, "Greenshield parameters must be positive");
}

void PlatoonParams::validate() const {
  require(tau_f > 0 && h0 > 0 && t_s > 0, "platoon headways must be positive");
  require(tau_f < tau_c && tau_c < tau_l, "platoon headways must satisfy tau_f < tau_c < tau_l");
}

void CostWeights::validate() const { require(w1 > 0 && w2 > 0, "cost weights must be positive"); }

double fuel_rate(double v, const FuelModel& fm) {
  if (v < 0) throw std::invalid_argument("fuel_rate: negative speed");
  return fm.a3 * v * v * v + fm.a1 * v;
}

double equilibrium_speed(double k_e, const GreenshieldModel& model) {
  const double k = std::clamp(k_e, 0.0, model.k_j);
  return std::max(0.0, model.v0 * (1.0 - k / model.k_j));
}

double idm_acceleration(double v, std::optional<double> gap, double dv, const IdmParams& p) {
  const double free_term = 1.0 - std::pow(v / p.v0, p.delta);
  if (!gap) return p.a * free_term;
  if (!(*gap > 0)) throw std::invalid_argument("idm_acceleration: gap must be positive");
  const double s_star = p.s0 + v * p.t_hw + v * dv / (2.0 * std::sqrt(p.a * p.b));
  const double ratio = s_star / *gap;
  return p.a * (free_term - ratio * ratio);
}

double reference_speed(double u, double d1, double v0) {
  const double remaining = d1 / v0 - u;
  if (!(remaining > 0))
    throw InfeasibleTimeReduction("time reduction " + std::to_string(u) +
                                  " s exceeds the free-flow zone time " +
                                  std::to_string(d1 / v0) + " s");
  return d1 / remaining;
}

double delta_f1(double u, double d1, double v0, double alpha) {
  const double v = reference_speed(u, d1, v0);
  return alpha * d1 * (v * v - v0 * v0);
}

SegmentCost trip_segment_cost(double dt, double v, bool merged_follower, const FuelModel& fm,
                              const CostWeights& w) {
  const double factor = merged_follower ? 1.0 - fm.eta : 1.0;
  SegmentCost out;
  out.fuel = factor * fuel_rate(v, fm) * dt;
  out.cost = w.w1 * dt + w.w2 * out.fuel;
  return out;
}

double effective_density(const Occupancy& n, double length, int lanes, const PlatoonParams& pp) {
  return (n.alone + n.leaders + n.background + pp.omega() * n.followers) / (length * lanes);
}

}  // namespace platoon
