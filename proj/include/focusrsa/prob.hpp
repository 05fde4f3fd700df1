// Copyright 2026 The FocusRSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Log-space probability primitives. Every probability in the library lives in
// natural-log space; an exact zero is the sentinel -infinity, never a large
// negative number.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "focusrsa/errors.hpp"

namespace focusrsa {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Tolerance on sum(exp(logits)) for a distribution to count as normalized.
inline constexpr double kNormTolerance = 1e-9;
// Tolerance for equality comparisons between computed probabilities.
inline constexpr double kEqualTolerance = 1e-12;

class LogProb {
 public:
  constexpr LogProb() = default;
  explicit LogProb(double value) : value_(value) {
    if (std::isnan(value)) throw DegenerateDistribution("NaN log-probability");
    // Rounding can push log(1) a few ulps above zero.
    if (value > 0.0) {
      if (value > kNormTolerance) {
        throw DegenerateDistribution("log-probability above zero: " +
                                     std::to_string(value));
      }
      value_ = 0.0;
    }
  }

  static LogProb zero() { return LogProb(kNegInf); }
  static LogProb one() { return LogProb(0.0); }
  static LogProb from_prob(double p) { return LogProb(p > 0.0 ? std::log(p) : kNegInf); }

  double value() const { return value_; }
  double prob() const { return std::exp(value_); }
  bool is_zero() const { return value_ == kNegInf; }

  // Product of probabilities.
  friend LogProb operator+(LogProb a, LogProb b) { return LogProb(a.value_ + b.value_); }
  LogProb& operator+=(LogProb other) { return *this = *this + other; }

  friend auto operator<=>(LogProb a, LogProb b) { return a.value_ <=> b.value_; }
  friend bool operator==(LogProb a, LogProb b) { return a.value_ == b.value_; }

 private:
  double value_ = kNegInf;
};

// log(sum(exp(values))) with a max shift. -inf entries contribute nothing; an
// all -inf input yields -inf.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw UsageError("log_sum_exp of an empty list");
  double top = kNegInf;
  for (double v : values) {
    if (std::isnan(v)) throw DegenerateDistribution("NaN in log_sum_exp input");
    top = std::max(top, v);
  }
  if (top == kNegInf) return kNegInf;
  if (top == std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

inline LogProb log_sum_exp(std::span<const LogProb> values) {
  std::vector<double> raw;
  raw.reserve(values.size());
  for (LogProb v : values) raw.push_back(v.value());
  return LogProb(log_sum_exp(std::span<const double>(raw)));
}

// Distribution over the dense outcome ids [0, size). Logits are natural-log
// masses; they are not necessarily normalized until normalize() is called.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> logits) : logits_(std::move(logits)) {
    for (double v : logits_) {
      if (std::isnan(v)) throw DegenerateDistribution("NaN logit");
    }
  }

  static Distribution uniform(std::size_t n) {
    if (n == 0) throw UsageError("uniform distribution over an empty support");
    return Distribution(std::vector<double>(n, -std::log(static_cast<double>(n))));
  }

  static Distribution from_probs(std::span<const double> probs) {
    std::vector<double> logits;
    logits.reserve(probs.size());
    for (double p : probs) logits.push_back(p > 0.0 ? std::log(p) : kNegInf);
    return Distribution(std::move(logits));
  }

  std::size_t size() const { return logits_.size(); }
  bool empty() const { return logits_.empty(); }
  double logit(std::size_t id) const { return logits_.at(id); }
  double operator[](std::size_t id) const { return logits_[id]; }
  double prob(std::size_t id) const { return std::exp(logits_.at(id)); }
  LogProb log_prob(std::size_t id) const { return LogProb(logits_.at(id)); }
  std::span<const double> logits() const { return logits_; }
  std::vector<double>& mutable_logits() { return logits_; }

  std::vector<double> probs() const {
    std::vector<double> out;
    out.reserve(logits_.size());
    for (double v : logits_) out.push_back(std::exp(v));
    return out;
  }

  double log_total() const { return log_sum_exp(std::span<const double>(logits_)); }

  bool is_normalized(double tol = kNormTolerance) const {
    if (logits_.empty()) return false;
    double total = 0.0;
    for (double v : logits_) total += std::exp(v);
    return std::abs(total - 1.0) <= tol;
  }

  // Lowest id among the maximal logits.
  std::size_t argmax() const {
    if (logits_.empty()) throw UsageError("argmax of an empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits_.size(); ++i) {
      if (logits_[i] > logits_[best]) best = i;
    }
    return best;
  }

  // Ids ordered by descending mass, ties by ascending id.
  std::vector<std::size_t> ranked() const {
    std::vector<std::size_t> ids(logits_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::size_t a, std::size_t b) { return logits_[a] > logits_[b]; });
    return ids;
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> logits_;
};

// Shifts logits by -log_sum_exp. A distribution whose log total is already
// within kEqualTolerance of zero is returned unchanged, which makes the
// operation idempotent bit-for-bit.
inline Distribution normalize(Distribution d) {
  if (d.empty()) throw UsageError("normalize of an empty distribution");
  const double total = d.log_total();
  if (total == kNegInf) {
    throw DegenerateDistribution("every outcome has zero mass");
  }
  if (!std::isfinite(total)) throw DegenerateDistribution("infinite log mass");
  if (std::abs(total) <= kEqualTolerance) return d;
  for (double& v : d.mutable_logits()) v -= total;
  return d;
}

}  // namespace focusrsa
