#include "platoon/arrivals.hpp"

#include <cmath>
#include <stdexcept>

namespace platoon {

std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::uint64_t stream_id) {
  std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_interarrival(const PoissonSource& source, std::mt19937_64& rng) {
  return -std::log1p(-uniform01(rng)) / source.rate;
}

ArrivalStream::ArrivalStream(PoissonSource source, std::uint64_t run_seed)
    : source_(source), rng_(derive_stream_seed(run_seed, source.stream)) {
  if (!(source_.rate > 0)) throw std::invalid_argument("Poisson source rate must be positive");
}

std::optional<double> ArrivalStream::next() {
  if (source_.n_total && produced_ >= *source_.n_total) return std::nullopt;
  clock_ += sample_interarrival(source_, rng_);
  ++produced_;
  return clock_;
}

HeadwayHistory::HeadwayHistory(double psi, int window) : psi_(psi), window_(window) {
  if (!(psi > 0 && psi < 1)) throw std::invalid_argument("psi must lie in (0,1)");
  if (window < 1) throw std::invalid_argument("history window must be >= 1");
}

void HeadwayHistory::push(double x) {
  if (!(x > 0)) throw std::invalid_argument("inter-arrival times must be positive");
  x_.push_front(x);
  if (static_cast<int>(x_.size()) > window_) x_.pop_back();
}

double estimate_arrival_rate(const HeadwayHistory& history) {
  if (history.empty()) throw std::invalid_argument("arrival-rate estimate needs a headway");
  const double psi = history.psi();
  double sum = 0.0;
  double weight = 1.0;
  for (double x : history.headways()) {
    sum += weight * x;
    weight *= psi;
  }
  if (!(sum > 0)) throw std::invalid_argument("arrival-rate estimate: zero headway sum");
  const int m = history.size();
  const double partial = 1.0 - std::pow(psi, m);
  const double full = 1.0 - std::pow(psi, history.window());
  return partial / ((1.0 - psi) * full * sum);
}

}  // namespace platoon
