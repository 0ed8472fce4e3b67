#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "avakit/error.hpp"
#include "avakit/types.hpp"

namespace avakit {

/// Per-class label counts C_i, their total N, and percentages P_i = 100 * C_i / N.
///
/// Only classes with C_i > 0 are stored; lookups of other classes return 0.
struct ClassStats {
  std::map<ClassId, std::int64_t> counts;
  std::int64_t total = 0;
  std::map<ClassId, double> percentages;

  std::int64_t count(ClassId c) const noexcept {
    auto it = counts.find(c);
    return it == counts.end() ? 0 : it->second;
  }

  double percentage(ClassId c) const noexcept {
    auto it = percentages.find(c);
    return it == percentages.end() ? 0.0 : it->second;
  }

  /// Builds stats from raw counts; zero entries are dropped.
  static ClassStats from_counts(const std::map<ClassId, std::int64_t>& raw) {
    ClassStats s;
    for (const auto& [c, n] : raw) {
      if (n < 0) throw ConfigError("negative class count");
      if (n == 0) continue;
      s.counts.emplace(c, n);
      s.total += n;
    }
    if (s.total == 0) throw EmptyDatasetError("class statistics need at least one label");
    for (const auto& [c, n] : s.counts) {
      s.percentages.emplace(c, 100.0 * static_cast<double>(n) / static_cast<double>(s.total));
    }
    return s;
  }
};

inline ClassStats class_stats(const std::vector<Instance>& instances) {
  if (instances.empty()) throw EmptyDatasetError("class statistics of an empty dataset");
  std::map<ClassId, std::int64_t> counts;
  for (const auto& inst : instances) {
    for (ClassId c : inst.labels) ++counts[c];
  }
  return ClassStats::from_counts(counts);
}

}  // namespace avakit
