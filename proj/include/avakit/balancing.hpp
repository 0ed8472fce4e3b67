#pragma once

// Label subsampling (LS) of over-represented classes and correlation-preserving
// instance augmentation (CP-IA) of rare classes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "avakit/error.hpp"
#include "avakit/rng.hpp"
#include "avakit/stats.hpp"
#include "avakit/types.hpp"

namespace avakit {

struct SubsampleConfig {
  double threshold = 0.3;
  std::int64_t common_cutoff = 10'000;
  bool protect_last_label = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must be in [0,1]");
    if (common_cutoff < 1) throw ConfigError("common cutoff must be >= 1");
  }
};

struct DropProbabilities {
  std::map<ClassId, double> probs;

  double of(ClassId c) const noexcept {
    auto it = probs.find(c);
    return it == probs.end() ? 0.0 : it->second;
  }
};

struct AugmentConfig {
  /// Classes with 0 < C_i < rare_cutoff are rare. Unset: median of nonzero counts.
  std::optional<double> rare_cutoff;
  /// Desired post-augmentation count of each rare class. Unset: ceil(rare_cutoff).
  std::optional<std::int64_t> target_count;
  double jitter_frac = 0.05;
  int max_copies_per_instance = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(jitter_frac >= 0.0 && jitter_frac < 0.5)) throw ConfigError("jitter must be in [0,0.5)");
    if (max_copies_per_instance < 1) throw ConfigError("max copies per instance must be >= 1");
    if (rare_cutoff && !(*rare_cutoff >= 0.0)) throw ConfigError("rare cutoff must be >= 0");
    if (rare_cutoff && target_count && static_cast<double>(*target_count) < *rare_cutoff) {
      throw ConfigError("target count must be >= rare cutoff");
    }
  }
};

/// Classes strictly above the cutoff.
inline std::set<ClassId> select_common_classes(const ClassStats& stats, std::int64_t cutoff) {
  std::set<ClassId> out;
  for (const auto& [c, n] : stats.counts) {
    if (n > cutoff) out.insert(c);
  }
  return out;
}

/// clamp(T - 1/P, 0, 1) with P in percent.
inline double drop_probability(double percentage, double threshold) {
  if (!(percentage > 0.0)) throw Error("drop probability of a class with zero share");
  return std::clamp(threshold - 1.0 / percentage, 0.0, 1.0);
}

inline DropProbabilities drop_probabilities(const ClassStats& stats, const SubsampleConfig& config) {
  config.validate();
  DropProbabilities out;
  for (ClassId c : select_common_classes(stats, config.common_cutoff)) {
    out.probs.emplace(c, drop_probability(stats.percentage(c), config.threshold));
  }
  return out;
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stable identity of an instance, independent of its position in a list.
inline std::uint64_t instance_key(const Instance& inst) noexcept {
  return rng::splitmix64(fnv1a(inst.video_id) ^
                         rng::splitmix64(static_cast<std::uint64_t>(inst.timestamp) ^
                                         rng::splitmix64(static_cast<std::uint64_t>(inst.person_id))));
}

}  // namespace detail

/// Drops each (instance, label) pair independently with its class probability.
///
/// Draws are keyed by (seed, instance identity, label), so the result does not
/// depend on list order. Boxes, ids and the instance count never change.
inline std::vector<Instance> subsample_labels(const std::vector<Instance>& instances,
                                              const DropProbabilities& probs,
                                              const SubsampleConfig& config) {
  config.validate();
  std::vector<Instance> out;
  out.reserve(instances.size());
  std::vector<ClassId> kept;
  for (const auto& inst : instances) {
    const auto key = detail::instance_key(inst);
    kept.clear();
    std::optional<ClassId> last_dropped;
    for (ClassId c : inst.labels) {
      const double p = probs.of(c);
      if (p > 0.0 &&
          rng::uniform(config.seed, rng::Stream::kSubsample,
                       {key, static_cast<std::uint64_t>(c)}) < p) {
        last_dropped = c;
      } else {
        kept.push_back(c);
      }
    }
    Instance next = inst;
    if (kept.empty() && last_dropped && config.protect_last_label) kept.push_back(*last_dropped);
    next.labels = LabelSet(kept);
    out.push_back(std::move(next));
  }
  return out;
}

/// Independently seeded variant for epoch `epoch` of a run seeded with `seed`.
inline std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) noexcept {
  return rng::hash(seed, rng::Stream::kEpoch, {epoch});
}

inline double median_nonzero_count(const ClassStats& stats) {
  std::vector<std::int64_t> v;
  for (const auto& [c, n] : stats.counts) {
    if (n > 0) v.push_back(n);
  }
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  if (v.size() % 2 == 1) return static_cast<double>(v[mid]);
  return 0.5 * (static_cast<double>(v[mid - 1]) + static_cast<double>(v[mid]));
}

/// Cutoff and target with defaults filled in from the dataset.
struct ResolvedAugment {
  double rare_cutoff = 0.0;
  std::int64_t target_count = 0;
};

inline ResolvedAugment resolve(const AugmentConfig& config, const ClassStats& stats) {
  config.validate();
  ResolvedAugment r;
  r.rare_cutoff = config.rare_cutoff ? *config.rare_cutoff : median_nonzero_count(stats);
  r.target_count = config.target_count
                       ? *config.target_count
                       : static_cast<std::int64_t>(std::ceil(r.rare_cutoff));
  if (static_cast<double>(r.target_count) < r.rare_cutoff) {
    throw ConfigError("target count must be >= rare cutoff");
  }
  return r;
}

/// Classes with 0 < C_i < cutoff.
inline std::set<ClassId> select_rare_classes(const ClassStats& stats, double rare_cutoff) {
  std::set<ClassId> out;
  for (const auto& [c, n] : stats.counts) {
    if (n > 0 && static_cast<double>(n) < rare_cutoff) out.insert(c);
  }
  return out;
}

inline std::set<ClassId> select_rare_classes(const ClassStats& stats, const AugmentConfig& config) {
  return select_rare_classes(stats, resolve(config, stats).rare_cutoff);
}

/// Redraws allowed when jitter yields a degenerate box; after that the box is copied as is.
inline constexpr int kMaxJitterRedraws = 10;

/// Perturbs each coordinate uniformly by up to jitter_frac of the box width
/// (x) or height (y), then clips to [0, 1].
inline BoundingBox jitter_box(const BoundingBox& box, double jitter_frac, std::uint64_t seed,
                              std::uint64_t source_key, std::uint64_t copy_ordinal) {
  if (jitter_frac == 0.0) return box;
  const double dx = jitter_frac * box.width();
  const double dy = jitter_frac * box.height();
  for (int attempt = 0; attempt <= kMaxJitterRedraws; ++attempt) {
    rng::Sequence seq(rng::hash(seed, rng::Stream::kJitter,
                                {source_key, copy_ordinal, static_cast<std::uint64_t>(attempt)}));
    BoundingBox b{std::clamp(box.x1 + seq.uniform(-dx, dx), 0.0, 1.0),
                  std::clamp(box.y1 + seq.uniform(-dy, dy), 0.0, 1.0),
                  std::clamp(box.x2 + seq.uniform(-dx, dx), 0.0, 1.0),
                  std::clamp(box.y2 + seq.uniform(-dy, dy), 0.0, 1.0)};
    if (b.valid()) return b;
  }
  return box;
}

struct RareClassReport {
  ClassId class_id = 0;
  std::int64_t before = 0;
  std::int64_t after = 0;
  /// Copies generated while this class was being filled.
  std::int64_t copies = 0;
  /// The per-instance copy cap stopped augmentation short of the target.
  bool capped = false;
};

struct AugmentResult {
  std::vector<Instance> instances;
  ResolvedAugment resolved;
  std::vector<RareClassReport> rare;
};

/// CP-IA with a per-class report.
///
/// Rare classes are filled in ascending id order. For each one, copies of the
/// original instances carrying it are made round-robin until its count reaches
/// the target or every source has hit the copy cap. A copy keeps the full label
/// set of its source, so all co-occurring labels grow with it. Counts are shared
/// across classes: copies made for one rare class count toward every label they
/// carry. Originals come first in the output, unchanged, followed by the copies.
/// Copies get fresh person ids (max input person id + 1, + 2, ...) so the
/// output still groups into distinct instances.
inline AugmentResult augment_instances(const std::vector<Instance>& instances,
                                       const AugmentConfig& config) {
  config.validate();
  AugmentResult result;
  result.instances = instances;
  if (instances.empty()) return result;

  const ClassStats stats = class_stats(instances);
  result.resolved = resolve(config, stats);
  const auto rare = select_rare_classes(stats, result.resolved.rare_cutoff);
  if (rare.empty()) return result;

  std::map<ClassId, std::int64_t> counts = stats.counts;
  std::vector<int> copies_of(instances.size(), 0);
  std::int64_t next_person = 0;
  for (const auto& inst : instances) next_person = std::max(next_person, inst.person_id + 1);

  for (ClassId c : rare) {
    std::vector<std::size_t> sources;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      if (instances[k].labels.contains(c)) sources.push_back(k);
    }
    RareClassReport report{c, counts[c], 0, 0, false};
    std::size_t cursor = 0;
    while (counts[c] < result.resolved.target_count) {
      std::optional<std::size_t> pick;
      for (std::size_t step = 0; step < sources.size(); ++step) {
        const std::size_t pos = (cursor + step) % sources.size();
        if (copies_of[sources[pos]] < config.max_copies_per_instance) {
          pick = pos;
          break;
        }
      }
      if (!pick) {
        report.capped = true;
        break;
      }
      const std::size_t src = sources[*pick];
      cursor = *pick + 1;
      Instance copy = instances[src];
      copy.box = jitter_box(copy.box, config.jitter_frac, config.seed,
                            detail::instance_key(instances[src]),
                            static_cast<std::uint64_t>(copies_of[src]));
      copy.person_id = next_person++;
      ++copies_of[src];
      for (ClassId l : copy.labels) ++counts[l];
      ++report.copies;
      result.instances.push_back(std::move(copy));
    }
    report.after = counts[c];
    result.rare.push_back(report);
  }
  // Later classes' copies may also have raised earlier rare classes.
  for (auto& r : result.rare) {
    r.after = counts[r.class_id];
    r.capped = r.capped && r.after < result.resolved.target_count;
  }
  return result;
}

inline std::vector<Instance> cp_ia(const std::vector<Instance>& instances,
                                   const AugmentConfig& config) {
  return augment_instances(instances, config).instances;
}

struct BalanceResult {
  std::vector<Instance> instances;
  AugmentResult augment;
  DropProbabilities drop;
};

/// CP-IA first, then LS with probabilities computed on the augmented statistics.
inline BalanceResult balance(const std::vector<Instance>& instances, const AugmentConfig& aug,
                             const SubsampleConfig& sub) {
  sub.validate();
  BalanceResult r;
  r.augment = augment_instances(instances, aug);
  if (r.augment.instances.empty()) return r;
  r.drop = drop_probabilities(class_stats(r.augment.instances), sub);
  r.instances = subsample_labels(r.augment.instances, r.drop, sub);
  return r;
}

inline std::vector<Instance> balance_pipeline(const std::vector<Instance>& instances,
                                              const AugmentConfig& aug,
                                              const SubsampleConfig& sub) {
  return balance(instances, aug, sub).instances;
}

}  // namespace avakit
