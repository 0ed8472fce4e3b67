#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "avakit/error.hpp"
#include "avakit/types.hpp"

namespace avakit {

/// Symmetric class co-occurrence counts. The diagonal holds per-class label
/// counts, cell (i, j) the number of instances carrying both i and j.
/// Indices are 1-based class ids.
class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(int dim = kAvaNumClasses)
      : dim_(dim), cells_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0) {
    if (dim < 1) throw ConfigError("co-occurrence matrix needs dim >= 1");
  }

  int dim() const noexcept { return dim_; }

  std::int64_t at(ClassId i, ClassId j) const { return cells_[offset(i, j)]; }

  std::int64_t diagonal(ClassId i) const { return at(i, i); }

  void add_instance(const LabelSet& labels) {
    for (ClassId c : labels) check(c);
    const auto& ids = labels.ids();
    for (std::size_t a = 0; a < ids.size(); ++a) {
      ++cells_[offset(ids[a], ids[a])];
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        ++cells_[offset(ids[a], ids[b])];
        ++cells_[offset(ids[b], ids[a])];
      }
    }
  }

  CooccurrenceMatrix& operator+=(const CooccurrenceMatrix& other) {
    if (other.dim_ != dim_) throw ConfigError("co-occurrence matrices differ in dim");
    for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] += other.cells_[k];
    return *this;
  }

  friend CooccurrenceMatrix operator+(CooccurrenceMatrix a, const CooccurrenceMatrix& b) {
    a += b;
    return a;
  }

  friend bool operator==(const CooccurrenceMatrix&, const CooccurrenceMatrix&) = default;

 private:
  void check(ClassId c) const {
    if (c < 1 || c > dim_) {
      throw ConfigError("label " + std::to_string(c) + " outside [1," + std::to_string(dim_) +
                        "]");
    }
  }

  std::size_t offset(ClassId i, ClassId j) const {
    check(i);
    check(j);
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(dim_) +
           static_cast<std::size_t>(j - 1);
  }

  int dim_;
  std::vector<std::int64_t> cells_;
};

inline CooccurrenceMatrix build_com(const std::vector<Instance>& instances,
                                    int dim = kAvaNumClasses) {
  CooccurrenceMatrix com(dim);
  for (const auto& inst : instances) com.add_instance(inst.labels);
  return com;
}

/// Dense row-major dim x dim matrix of reals.
struct DenseMatrix {
  int dim = 0;
  std::vector<double> values;

  double at(ClassId i, ClassId j) const {
    return values[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(dim) +
                  static_cast<std::size_t>(j - 1)];
  }
};

/// log10(e + 1) per cell, so empty cells render as exactly 0.
inline DenseMatrix log10_render(const CooccurrenceMatrix& com) {
  DenseMatrix out{com.dim(), {}};
  out.values.reserve(static_cast<std::size_t>(com.dim()) * static_cast<std::size_t>(com.dim()));
  for (ClassId i = 1; i <= com.dim(); ++i) {
    for (ClassId j = 1; j <= com.dim(); ++j) {
      out.values.push_back(std::log10(static_cast<double>(com.at(i, j)) + 1.0));
    }
  }
  return out;
}

/// Raw log10(e) per cell; empty cells are NaN and meant to be blanked on export.
inline DenseMatrix log10_raw_render(const CooccurrenceMatrix& com) {
  DenseMatrix out{com.dim(), {}};
  for (ClassId i = 1; i <= com.dim(); ++i) {
    for (ClassId j = 1; j <= com.dim(); ++j) {
      const auto e = com.at(i, j);
      out.values.push_back(e == 0 ? std::nan("") : std::log10(static_cast<double>(e)));
    }
  }
  return out;
}

/// e_ij / e_ii for every j with e_ij > 0.
inline std::map<ClassId, double> correlation_profile(const CooccurrenceMatrix& com, ClassId i) {
  const auto diag = com.diagonal(i);
  if (diag == 0) {
    throw Error("correlation profile of class " + std::to_string(i) + " is undefined (no labels)");
  }
  std::map<ClassId, double> profile;
  for (ClassId j = 1; j <= com.dim(); ++j) {
    const auto e = com.at(i, j);
    if (e > 0) profile.emplace(j, static_cast<double>(e) / static_cast<double>(diag));
  }
  return profile;
}

}  // namespace avakit
