#include "platoon/value_approx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "platoon/error.hpp"

namespace platoon {

double PolyFit::evaluate(double h) const {
  const double z = (h - mean) / scale;
  double acc = 0.0;
  for (auto it = beta.rbegin(); it != beta.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::vector<double> PolyFit::raw_coefficients() const {
  // Expand sum_k beta_k ((h - m)/s)^k into powers of h.
  const int n = degree();
  std::vector<double> raw(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    const double bk = beta[k] / std::pow(scale, k);
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      raw[j] += bk * binom * std::pow(-mean, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  return raw;
}

PolyFit fit_polynomial(std::span<const CostSample> samples, int degree) {
  if (degree < 0) throw std::invalid_argument("polynomial degree must be >= 0");
  const int cols = degree + 1;
  const int rows = static_cast<int>(samples.size());
  if (rows < cols) throw ConditioningError("fit_polynomial: fewer samples than coefficients");
  std::vector<double> hs;
  hs.reserve(rows);
  for (const auto& s : samples) {
    if (!std::isfinite(s.h) || !std::isfinite(s.cost))
      throw std::invalid_argument("fit_polynomial: non-finite sample");
    hs.push_back(s.h);
  }
  std::vector<double> sorted = hs;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < cols) throw ConditioningError("fit_polynomial: too few distinct headways");

  PolyFit fit;
  fit.mean = std::accumulate(hs.begin(), hs.end(), 0.0) / rows;
  double var = 0.0;
  for (double h : hs) var += (h - fit.mean) * (h - fit.mean);
  fit.scale = std::sqrt(var / rows);
  if (!(fit.scale > 0)) fit.scale = 1.0;

  // Column-major Vandermonde in z, overwritten in place by Householder QR.
  std::vector<double> a(static_cast<size_t>(rows) * cols);
  std::vector<double> rhs(rows);
  auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(c) * rows + r]; };
  for (int r = 0; r < rows; ++r) {
    const double z = (hs[r] - fit.mean) / fit.scale;
    double p = 1.0;
    for (int c = 0; c < cols; ++c, p *= z) at(r, c) = p;
    rhs[r] = samples[r].cost;
  }

  double max_diag = 0.0;
  std::vector<double> diag(cols);
  for (int k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (int r = k; r < rows; ++r) norm += at(r, k) * at(r, k);
    norm = std::sqrt(norm);
    const double alpha = at(k, k) > 0 ? -norm : norm;
    diag[k] = alpha;
    max_diag = std::max(max_diag, std::abs(alpha));
    if (norm == 0.0) continue;
    // v = x - alpha e1, stored in column k.
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (int r = k; r < rows; ++r) vnorm2 += at(r, k) * at(r, k);
    if (vnorm2 == 0.0) continue;
    for (int c = k + 1; c < cols; ++c) {
      double dot = 0.0;
      for (int r = k; r < rows; ++r) dot += at(r, k) * at(r, c);
      const double f = 2.0 * dot / vnorm2;
      for (int r = k; r < rows; ++r) at(r, c) -= f * at(r, k);
    }
    double dot = 0.0;
    for (int r = k; r < rows; ++r) dot += at(r, k) * rhs[r];
    const double f = 2.0 * dot / vnorm2;
    for (int r = k; r < rows; ++r) rhs[r] -= f * at(r, k);
  }
  for (int k = 0; k < cols; ++k)
    if (std::abs(diag[k]) <= 1e-12 * max_diag * rows)
      throw ConditioningError("fit_polynomial: design matrix is rank deficient");

  fit.beta.assign(cols, 0.0);
  for (int k = cols - 1; k >= 0; --k) {
    double s = rhs[k];
    for (int c = k + 1; c < cols; ++c) s -= at(k, c) * fit.beta[c];
    fit.beta[k] = s / diag[k];
  }
  double res = 0.0;
  for (int r = cols; r < rows; ++r) res += rhs[r] * rhs[r];
  fit.residual_norm = std::sqrt(res);
  return fit;
}

PolyCostModel::PolyCostModel(int degree, int window_l, int window_y)
    : degree_(degree),
      merge_capacity_(static_cast<size_t>(window_l) + 1),
      nomerge_capacity_(static_cast<size_t>(window_y) + 1) {
  if (degree < 0) throw std::invalid_argument("degree_n must be >= 0");
  if (window_l + 1 <= degree) throw std::invalid_argument("window_l + 1 must exceed degree_n");
  if (window_y < 0) throw std::invalid_argument("window_y must be >= 0");
}

double PolyCostModel::estimate_merge_cost(double h) const {
  if (!fit_) throw Error("merge cost model is not fitted");
  return fit_->evaluate(h);
}

double PolyCostModel::estimate_nomerge_cost() const {
  if (nomerge_.empty()) throw Error("no non-merge outcome recorded");
  return std::accumulate(nomerge_.begin(), nomerge_.end(), 0.0) / nomerge_.size();
}

std::optional<double> PolyCostModel::best_estimate(double h) const {
  std::optional<double> best;
  if (fit_) best = fit_->evaluate(h);
  if (!nomerge_.empty()) {
    const double nm = estimate_nomerge_cost();
    if (!best || nm < *best) best = nm;
  }
  return best;
}

MergeAction PolyCostModel::decide(double h) {
  const int bootstrap = 2 * (degree_ + 1);
  const int k = decisions_++;
  if (k < bootstrap) return k % 2 == 0 ? MergeAction::kMerge : MergeAction::kNoMerge;
  if (!fit_) return MergeAction::kMerge;
  if (nomerge_.empty()) return MergeAction::kNoMerge;
  return estimate_merge_cost(h) <= estimate_nomerge_cost() ? MergeAction::kMerge
                                                           : MergeAction::kNoMerge;
}

void PolyCostModel::record_outcome(double h, MergeAction action, double realized) {
  if (!std::isfinite(h) || !std::isfinite(realized))
    throw std::invalid_argument("record_outcome: non-finite input");
  if (action == MergeAction::kNoMerge) {
    nomerge_.push_back(realized);
    if (nomerge_.size() > nomerge_capacity_) nomerge_.pop_front();
    return;
  }
  merge_.push_back({h, realized});
  if (merge_.size() > merge_capacity_) merge_.pop_front();
  if (merge_.size() < static_cast<size_t>(degree_) + 1) return;
  std::vector<CostSample> window(merge_.begin(), merge_.end());
  try {
    fit_ = fit_polynomial(window, degree_);
  } catch (const ConditioningError&) {
  }
}

}  // namespace platoon
