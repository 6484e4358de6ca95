#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>

namespace platoon {

// Every random stream is a std::mt19937_64 whose seed is derived from the run
// seed and a stream id by one SplitMix64 step. Both algorithms are fully
// specified by the standard / their reference, so streams are reproducible
// across platforms. Variates are built by hand (never std::*_distribution,
// whose algorithms are implementation-defined).
std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::uint64_t stream_id);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng);

struct PoissonSource {
  double rate = 1.0;  // veh/s
  int origin = 0;
  int destination = 0;
  std::optional<int> n_total;  // nullopt: unbounded
  std::uint64_t stream = 0;
};

// Exponential variate with mean 1/rate by inverse CDF.
double sample_interarrival(const PoissonSource& source, std::mt19937_64& rng);

// A PoissonSource together with its own random stream.
class ArrivalStream {
 public:
  ArrivalStream(PoissonSource source, std::uint64_t run_seed);

  // Next arrival time, or nullopt once n_total arrivals were produced.
  std::optional<double> next();
  const PoissonSource& source() const { return source_; }

 private:
  PoissonSource source_;
  std::mt19937_64 rng_;
  double clock_ = 0.0;
  int produced_ = 0;
};

// Last M inter-arrival times seen by a junction, most recent first.
class HeadwayHistory {
 public:
  HeadwayHistory(double psi, int window);

  void push(double x);
  double psi() const { return psi_; }
  int window() const { return window_; }
  int size() const { return static_cast<int>(x_.size()); }
  bool empty() const { return x_.empty(); }
  const std::deque<double>& headways() const { return x_; }

 private:
  double psi_;
  int window_;
  std::deque<double> x_;
};

// Discounted arrival-rate estimate [(1-psi) sum_m psi^m x_{k-m}]^-1.
// With m < M observations, the sum is rescaled by (1-psi^M)/(1-psi^m) so a
// constant stream yields the full-window value from the first observation.
// Throws std::invalid_argument when the history is empty or sums to zero.
double estimate_arrival_rate(const HeadwayHistory& history);

}  // namespace platoon
