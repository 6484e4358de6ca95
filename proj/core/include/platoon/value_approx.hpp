#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace platoon {

struct CostSample {
  double h = 0.0;     // predicted headway, s
  double cost = 0.0;  // observed cost-to-go, $
};

// Least-squares polynomial in the standardised headway z = (h - mean) / scale.
struct PolyFit {
  std::vector<double> beta;  // coefficients of z^0..z^n
  double mean = 0.0;
  double scale = 1.0;
  double residual_norm = 0.0;

  int degree() const { return static_cast<int>(beta.size()) - 1; }
  double evaluate(double h) const;
  // Coefficients of h^0..h^n.
  std::vector<double> raw_coefficients() const;
};

// Solves min ||H beta - J|| by Householder QR. Needs at least n+1 distinct
// headways; throws ConditioningError otherwise or when H is numerically rank
// deficient.
PolyFit fit_polynomial(std::span<const CostSample> samples, int degree);

enum class MergeAction : std::uint8_t { kNoMerge = 0, kMerge = 1 };

// Per-junction cost-to-go model: a polynomial in h for merges and a running
// mean for non-merges, each over a FIFO window of recent outcomes.
class PolyCostModel {
 public:
  PolyCostModel(int degree = 3, int window_l = 30, int window_y = 20);

  int degree() const { return degree_; }
  bool merge_fitted() const { return fit_.has_value(); }
  bool nomerge_available() const { return !nomerge_.empty(); }
  const std::optional<PolyFit>& fit() const { return fit_; }
  const std::deque<CostSample>& merge_window() const { return merge_; }
  const std::deque<double>& nomerge_window() const { return nomerge_; }
  int decisions() const { return decisions_; }

  // Throws Error when the merge polynomial has not been fitted yet.
  double estimate_merge_cost(double h) const;
  // Throws Error when no non-merge outcome has been recorded.
  double estimate_nomerge_cost() const;
  // min over actions of the available estimates; nullopt when neither exists.
  std::optional<double> best_estimate(double h) const;

  // Greedy action with ties to merge. The first 2(n+1) decisions alternate
  // merge / no-merge; afterwards a missing estimator forces its action.
  MergeAction decide(double h);

  // Appends a realised cost-to-go (edge cost + downstream estimate) to the
  // window of the action taken; the merge polynomial is refitted once the
  // window holds n+1 samples. A failed refit keeps the previous coefficients.
  void record_outcome(double h, MergeAction action, double realized);

 private:
  int degree_;
  size_t merge_capacity_;
  size_t nomerge_capacity_;
  std::deque<CostSample> merge_;
  std::deque<double> nomerge_;
  std::optional<PolyFit> fit_;
  int decisions_ = 0;
};

}  // namespace platoon
