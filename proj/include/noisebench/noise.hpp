#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "noisebench/core/errors.hpp"
#include "noisebench/core/rng.hpp"

namespace noisebench {

enum class NoiseKind { symmetric, class_dependent };

inline std::string noise_kind_name(NoiseKind k) {
  return k == NoiseKind::symmetric ? "symmetric" : "class_dependent";
}

// Declarative noise model. For class_dependent noise, `groups` lists disjoint
// sets of confusable classes; classes in no group (or singleton groups) keep
// their label with probability 1.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::symmetric;
  double epsilon = 0.0;
  std::vector<std::vector<int>> groups;
  std::uint64_t seed = 0;
};

class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(int num_classes)
      : num_classes_(num_classes), entries_(static_cast<std::size_t>(num_classes) * num_classes, 0.0) {}

  int num_classes() const { return num_classes_; }
  double operator()(int row, int col) const {
    return entries_[static_cast<std::size_t>(row) * num_classes_ + col];
  }
  double& operator()(int row, int col) { return entries_[static_cast<std::size_t>(row) * num_classes_ + col]; }

  void check_row_stochastic(double tol = 1e-12) const {
    for (int k = 0; k < num_classes_; ++k) {
      double sum = 0.0;
      for (int i = 0; i < num_classes_; ++i) {
        const double v = (*this)(k, i);
        if (v < -tol || v > 1.0 + tol)
          throw DataError("transition matrix entry out of [0,1] at (" + std::to_string(k) + "," +
                          std::to_string(i) + ")");
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol)
        throw DataError("transition matrix row " + std::to_string(k) + " sums to " + std::to_string(sum));
    }
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("transition matrix: cannot write '" + path + "'");
    out.precision(17);
    for (int k = 0; k < num_classes_; ++k) {
      for (int i = 0; i < num_classes_; ++i) out << (i ? "," : "") << (*this)(k, i);
      out << "\n";
    }
  }

 private:
  int num_classes_ = 0;
  std::vector<double> entries_;
};

struct NoisyLabelSet {
  std::vector<int> observed;
  std::vector<bool> flipped;  // flipped[i] iff observed[i] != clean[i]
  NoiseSpec source_spec;

  std::size_t flip_count() const {
    return static_cast<std::size_t>(std::count(flipped.begin(), flipped.end(), true));
  }
};

// diagonal 1-eps, off-diagonal eps/(c-1)
inline TransitionMatrix build_symmetric_matrix(int num_classes, double epsilon) {
  if (num_classes < 2) throw DataError("build_symmetric_matrix: need num_classes >= 2");
  if (epsilon < 0.0 || epsilon > 1.0) throw DataError("build_symmetric_matrix: epsilon must be in [0,1]");
  TransitionMatrix m(num_classes);
  const double off = epsilon / (num_classes - 1);
  for (int k = 0; k < num_classes; ++k)
    for (int i = 0; i < num_classes; ++i) m(k, i) = (i == k) ? 1.0 - epsilon : off;
  return m;
}

// Within a dependency group of size s+1: diagonal 1-eps and eps/s on the s
// other members. Ungrouped and singleton-group classes get identity rows
// (the paper's tables print such rows as 1-eps or 0; they are realized as 1).
inline TransitionMatrix build_dependent_matrix(int num_classes, double epsilon,
                                               const std::vector<std::vector<int>>& groups) {
  if (num_classes < 2) throw DataError("build_dependent_matrix: need num_classes >= 2");
  if (epsilon < 0.0 || epsilon > 1.0) throw DataError("build_dependent_matrix: epsilon must be in [0,1]");
  std::vector<int> membership(static_cast<std::size_t>(num_classes), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int cls : groups[g]) {
      if (cls < 0 || cls >= num_classes)
        throw DataError("build_dependent_matrix: group member " + std::to_string(cls) + " out of range");
      if (membership[static_cast<std::size_t>(cls)] != -1)
        throw DataError("build_dependent_matrix: class " + std::to_string(cls) + " appears in two groups");
      membership[static_cast<std::size_t>(cls)] = static_cast<int>(g);
    }
  }
  TransitionMatrix m(num_classes);
  for (int k = 0; k < num_classes; ++k) m(k, k) = 1.0;
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    const double spread = static_cast<double>(group.size() - 1);
    for (int k : group) {
      m(k, k) = 1.0 - epsilon;
      for (int i : group)
        if (i != k) m(k, i) = epsilon / spread;
    }
  }
  return m;
}

inline TransitionMatrix build_matrix(const NoiseSpec& spec, int num_classes) {
  return spec.kind == NoiseKind::symmetric ? build_symmetric_matrix(num_classes, spec.epsilon)
                                           : build_dependent_matrix(num_classes, spec.epsilon, spec.groups);
}

// Each label resampled independently from its matrix row; randomness is keyed
// on (seed, sample index), so the result is order-independent.
inline NoisyLabelSet inject(const std::vector<int>& labels, const TransitionMatrix& matrix, std::uint64_t seed) {
  const int c = matrix.num_classes();
  NoisyLabelSet out;
  out.observed.resize(labels.size());
  out.flipped.resize(labels.size());
  out.source_spec.seed = seed;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= c)
      throw DataError("inject: label " + std::to_string(y) + " out of range at index " + std::to_string(i));
    const double u = counter_uniform(seed, static_cast<std::uint64_t>(i));
    double cum = 0.0;
    int drawn = c - 1;
    for (int j = 0; j < c; ++j) {
      cum += matrix(y, j);
      if (u < cum) {
        drawn = j;
        break;
      }
    }
    out.observed[i] = drawn;
    out.flipped[i] = drawn != y;
  }
  return out;
}

struct AuditResult {
  TransitionMatrix empirical;
  std::vector<std::size_t> class_counts;
  std::vector<int> empty_classes;  // rows left all-zero
};

// Row k = empirical distribution of observed labels among samples whose clean
// label is k.
inline AuditResult audit(const std::vector<int>& clean, const NoisyLabelSet& noisy, int num_classes) {
  if (clean.size() != noisy.observed.size())
    throw DataError("audit: clean/noisy length mismatch (" + std::to_string(clean.size()) + " vs " +
                    std::to_string(noisy.observed.size()) + ")");
  AuditResult res;
  res.empirical = TransitionMatrix(num_classes);
  res.class_counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const int k = clean[i];
    const int o = noisy.observed[i];
    if (k < 0 || k >= num_classes || o < 0 || o >= num_classes)
      throw DataError("audit: label out of range at index " + std::to_string(i));
    res.empirical(k, o) += 1.0;
    res.class_counts[static_cast<std::size_t>(k)]++;
  }
  for (int k = 0; k < num_classes; ++k) {
    const auto n = res.class_counts[static_cast<std::size_t>(k)];
    if (n == 0) {
      res.empty_classes.push_back(k);
      continue;
    }
    for (int i = 0; i < num_classes; ++i) res.empirical(k, i) /= static_cast<double>(n);
  }
  return res;
}

// noisy[i] = sum_k clean[k] * eta_{ki}
inline std::vector<double> noisy_posterior(const std::vector<double>& clean_posterior,
                                           const TransitionMatrix& matrix) {
  const int c = matrix.num_classes();
  if (static_cast<int>(clean_posterior.size()) != c)
    throw DataError("noisy_posterior: posterior size does not match matrix");
  double sum = 0.0;
  for (double p : clean_posterior) sum += p;
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("noisy_posterior: input not normalized (sum=" + std::to_string(sum) + ")");
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  for (int k = 0; k < c; ++k)
    for (int i = 0; i < c; ++i) out[static_cast<std::size_t>(i)] += clean_posterior[static_cast<std::size_t>(k)] * matrix(k, i);
  return out;
}

// Symmetric: (c-1)/c. Class-dependent: min over groups of s/(s+1), the
// within-group argmax-preservation bound (1-eps > eps/s); matches the paper's
// 1/2 for a pair group. Singleton/absent groups never flip, so they are
// excluded.
inline double flipping_threshold(const NoiseSpec& spec, int num_classes) {
  if (num_classes < 2) throw DataError("flipping_threshold: need num_classes >= 2");
  if (spec.kind == NoiseKind::symmetric)
    return static_cast<double>(num_classes - 1) / static_cast<double>(num_classes);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : spec.groups) {
    if (g.size() < 2) continue;
    const double s = static_cast<double>(g.size() - 1);
    best = std::min(best, s / (s + 1.0));
  }
  if (!std::isfinite(best))
    throw DataError("flipping_threshold: class_dependent spec has no group of size >= 2");
  return best;
}

}  // namespace noisebench
