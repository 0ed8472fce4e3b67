#pragma once

// Synthetic annotations and detections with known statistics.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "avakit/balancing.hpp"
#include "avakit/error.hpp"
#include "avakit/keyvalue.hpp"
#include "avakit/rng.hpp"
#include "avakit/types.hpp"

namespace avakit {

struct SynthSpec {
  std::int64_t num_instances = 0;
  /// Sampling weight of each class as the primary label.
  std::map<ClassId, double> class_weights;
  /// (i, j) -> probability that j co-occurs when i is the primary label.
  std::map<std::pair<ClassId, ClassId>, double> pair_affinities;
  /// Weights over the maximum label-set size; empty means uncapped.
  std::map<int, double> labels_per_instance;
  int num_classes = kAvaNumClasses;
  int persons_per_frame = 3;
  int frames_per_video = 100;
  std::int64_t first_timestamp = 902;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_instances < 0) throw ConfigError("num_instances must be >= 0");
    if (persons_per_frame < 1 || frames_per_video < 1) {
      throw ConfigError("persons_per_frame and frames_per_video must be >= 1");
    }
    if (first_timestamp < 0) throw ConfigError("first_timestamp must be >= 0");
    double total = 0.0;
    for (const auto& [c, w] : class_weights) {
      if (c < 1 || c > num_classes) throw ConfigError("weight for class outside vocabulary");
      if (!(w >= 0.0)) throw ConfigError("class weights must be >= 0");
      total += w;
    }
    if (num_instances > 0 && !(total > 0.0)) {
      throw ConfigError("at least one class weight must be positive");
    }
    for (const auto& [pair, a] : pair_affinities) {
      const auto [i, j] = pair;
      if (i < 1 || i > num_classes || j < 1 || j > num_classes || i == j) {
        throw ConfigError("affinity pair outside vocabulary or on the diagonal");
      }
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("affinities must be in [0,1]");
    }
    for (const auto& [n, w] : labels_per_instance) {
      if (n < 1 || !(w >= 0.0)) throw ConfigError("labels_per_instance needs sizes >= 1, weights >= 0");
    }
  }

  /// Keys: num_instances, seed, num_classes, persons_per_frame,
  /// frames_per_video, first_timestamp, weight.<c>, affinity.<i>.<j>,
  /// labels_per_instance.<n>.
  static SynthSpec from_key_values(const KeyValues& kv) {
    SynthSpec s;
    s.seed = kv.require_seed();
    for (const auto& [key, value] : kv.values()) {
      if (key == "seed") continue;
      if (key == "num_instances") {
        s.num_instances = KeyValues::to_int(key, value);
      } else if (key == "num_classes") {
        s.num_classes = static_cast<int>(KeyValues::to_int(key, value));
      } else if (key == "persons_per_frame") {
        s.persons_per_frame = static_cast<int>(KeyValues::to_int(key, value));
      } else if (key == "frames_per_video") {
        s.frames_per_video = static_cast<int>(KeyValues::to_int(key, value));
      } else if (key == "first_timestamp") {
        s.first_timestamp = KeyValues::to_int(key, value);
      } else if (key.starts_with("weight.")) {
        s.class_weights[static_cast<ClassId>(KeyValues::to_int(key, key.substr(7)))] =
            KeyValues::to_double(key, value);
      } else if (key.starts_with("labels_per_instance.")) {
        s.labels_per_instance[static_cast<int>(KeyValues::to_int(key, key.substr(20)))] =
            KeyValues::to_double(key, value);
      } else if (key.starts_with("affinity.")) {
        const auto rest = key.substr(9);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw ConfigError("affinity key must be affinity.<i>.<j>");
        const auto i = static_cast<ClassId>(KeyValues::to_int(key, rest.substr(0, dot)));
        const auto j = static_cast<ClassId>(KeyValues::to_int(key, rest.substr(dot + 1)));
        s.pair_affinities[{i, j}] = KeyValues::to_double(key, value);
      } else {
        throw ConfigError("unknown synth spec key '" + key + "'");
      }
    }
    s.validate();
    return s;
  }
};

struct NoiseSpec {
  /// Standard deviation of the additive per-coordinate box noise (normalized units).
  double localization_sigma = 0.0;
  double miss_rate = 0.0;
  /// Mean number of false positives per keyframe (Poisson).
  double false_positive_rate = 0.0;
  /// Scores are clipped normal draws.
  double tp_score_mean = 1.0;
  double tp_score_sd = 0.0;
  double fp_score_mean = 0.3;
  double fp_score_sd = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(localization_sigma >= 0.0)) throw ConfigError("localization_sigma must be >= 0");
    if (!(miss_rate >= 0.0 && miss_rate <= 1.0)) throw ConfigError("miss_rate must be in [0,1]");
    if (!(false_positive_rate >= 0.0)) throw ConfigError("false_positive_rate must be >= 0");
    if (!(tp_score_sd >= 0.0 && fp_score_sd >= 0.0)) throw ConfigError("score sd must be >= 0");
  }

  static NoiseSpec from_key_values(const KeyValues& kv) {
    static const std::set<std::string> known{
        "seed",          "localization_sigma", "miss_rate",     "false_positive_rate",
        "tp_score_mean", "tp_score_sd",        "fp_score_mean", "fp_score_sd"};
    for (const auto& [key, value] : kv.values()) {
      if (!known.contains(key)) throw ConfigError("unknown noise spec key '" + key + "'");
    }
    NoiseSpec n;
    n.seed = kv.require_seed();
    n.localization_sigma = kv.get_double("localization_sigma", n.localization_sigma);
    n.miss_rate = kv.get_double("miss_rate", n.miss_rate);
    n.false_positive_rate = kv.get_double("false_positive_rate", n.false_positive_rate);
    n.tp_score_mean = kv.get_double("tp_score_mean", n.tp_score_mean);
    n.tp_score_sd = kv.get_double("tp_score_sd", n.tp_score_sd);
    n.fp_score_mean = kv.get_double("fp_score_mean", n.fp_score_mean);
    n.fp_score_sd = kv.get_double("fp_score_sd", n.fp_score_sd);
    n.validate();
    return n;
  }
};

namespace detail {

inline constexpr double kMinSynthSide = 0.02;

inline BoundingBox random_box(rng::Sequence& seq) {
  auto side = [&](double& lo, double& hi) {
    do {
      lo = seq.uniform();
      hi = seq.uniform();
      if (lo > hi) std::swap(lo, hi);
    } while (hi - lo < kMinSynthSide);
  };
  BoundingBox b;
  side(b.x1, b.x2);
  side(b.y1, b.y2);
  return b;
}

template <typename Map>
auto weighted_pick(rng::Sequence& seq, const Map& weights) {
  double total = 0.0;
  for (const auto& [k, w] : weights) total += w;
  const double u = seq.uniform() * total;
  double acc = 0.0;
  typename Map::key_type last{};
  for (const auto& [k, w] : weights) {
    if (w <= 0.0) continue;
    acc += w;
    last = k;
    if (u < acc) return k;
  }
  return last;
}

inline std::string synth_video_id(std::int64_t video) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth_%05lld", static_cast<long long>(video));
  return buf;
}

}  // namespace detail

/// Instances in canonical (video, timestamp, person) order. Instance k draws
/// only from a generator keyed by (seed, k).
inline std::vector<Instance> generate_dataset(const SynthSpec& spec) {
  spec.validate();
  std::map<ClassId, std::vector<std::pair<ClassId, double>>> partners;
  for (const auto& [pair, a] : spec.pair_affinities) partners[pair.first].emplace_back(pair.second, a);

  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(spec.num_instances));
  for (std::int64_t k = 0; k < spec.num_instances; ++k) {
    rng::Sequence seq(rng::hash(spec.seed, rng::Stream::kSynthInstance,
                                {static_cast<std::uint64_t>(k)}));
    const ClassId primary = detail::weighted_pick(seq, spec.class_weights);
    std::size_t cap = std::numeric_limits<std::size_t>::max();
    if (!spec.labels_per_instance.empty()) {
      cap = static_cast<std::size_t>(detail::weighted_pick(seq, spec.labels_per_instance));
    }
    Instance inst;
    const std::int64_t frame = k / spec.persons_per_frame;
    inst.person_id = k % spec.persons_per_frame;
    inst.video_id = detail::synth_video_id(frame / spec.frames_per_video);
    inst.timestamp = spec.first_timestamp + frame % spec.frames_per_video;
    inst.labels.insert(primary);
    if (auto it = partners.find(primary); it != partners.end()) {
      for (const auto& [j, a] : it->second) {
        const bool hit = seq.uniform() < a;
        if (hit && inst.labels.size() < cap) inst.labels.insert(j);
      }
    }
    inst.box = detail::random_box(seq);
    out.push_back(std::move(inst));
  }
  return out;
}

/// One detection per ground-truth (instance, label) row unless missed, all
/// labels of an instance sharing one perturbed box, plus Poisson false
/// positives per keyframe on classes present in the ground truth.
inline std::vector<DetectionRecord> generate_detections(const std::vector<Instance>& gts,
                                                        const NoiseSpec& noise) {
  noise.validate();
  std::vector<DetectionRecord> out;
  std::vector<FrameKey> frames;
  std::set<FrameKey> seen;
  std::set<ClassId> classes;
  for (const auto& inst : gts) {
    rng::Sequence seq(rng::hash(noise.seed, rng::Stream::kSynthDetection,
                                {detail::instance_key(inst)}));
    BoundingBox box = inst.box;
    if (noise.localization_sigma > 0.0) {
      for (int attempt = 0; attempt <= kMaxJitterRedraws; ++attempt) {
        BoundingBox b{std::clamp(seq.normal(inst.box.x1, noise.localization_sigma), 0.0, 1.0),
                      std::clamp(seq.normal(inst.box.y1, noise.localization_sigma), 0.0, 1.0),
                      std::clamp(seq.normal(inst.box.x2, noise.localization_sigma), 0.0, 1.0),
                      std::clamp(seq.normal(inst.box.y2, noise.localization_sigma), 0.0, 1.0)};
        if (b.valid()) {
          box = b;
          break;
        }
      }
    }
    for (ClassId c : inst.labels) {
      classes.insert(c);
      const bool missed = seq.uniform() < noise.miss_rate;
      const double score = std::clamp(seq.normal(noise.tp_score_mean, noise.tp_score_sd), 0.0, 1.0);
      if (missed) continue;
      out.push_back(DetectionRecord{inst.video_id, inst.timestamp, box, c, score});
    }
    FrameKey fk{inst.video_id, inst.timestamp};
    if (seen.insert(fk).second) frames.push_back(std::move(fk));
  }
  if (noise.false_positive_rate > 0.0 && !classes.empty()) {
    const std::vector<ClassId> pool(classes.begin(), classes.end());
    for (const auto& fk : frames) {
      rng::Sequence seq(rng::hash(noise.seed, rng::Stream::kSynthFalsePositive,
                                  {detail::fnv1a(fk.video_id),
                                   static_cast<std::uint64_t>(fk.timestamp)}));
      const auto n = seq.poisson(noise.false_positive_rate);
      for (std::uint64_t k = 0; k < n; ++k) {
        const BoundingBox box = detail::random_box(seq);
        const auto pick = static_cast<std::size_t>(seq.uniform() * static_cast<double>(pool.size()));
        const double score = std::clamp(seq.normal(noise.fp_score_mean, noise.fp_score_sd), 0.0, 1.0);
        out.push_back(DetectionRecord{fk.video_id, fk.timestamp, box, pool[std::min(pick, pool.size() - 1)],
                                      score});
      }
    }
  }
  return out;
}

}  // namespace avakit
