#pragma once

// Clip frame plans for the slow/fast pathways and the annotation-space side of
// the common augmentations (multi-scale resize, crop, horizontal flip).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "avakit/error.hpp"
#include "avakit/rng.hpp"
#include "avakit/types.hpp"

namespace avakit {

struct ClipSpec {
  double clip_seconds = 2.0;
  int frame_count = 40;
  int slow_stride = 8;
  int fast_stride = 2;
  double fps = 20.0;

  void validate() const {
    if (!(clip_seconds > 0.0)) throw ConfigError("clip length must be > 0");
    if (!(fps > 0.0)) throw ConfigError("fps must be > 0");
    if (frame_count < 1) throw ConfigError("frame count must be >= 1");
    if (slow_stride < 1 || fast_stride < 1) throw ConfigError("strides must be >= 1");
    if (frame_count % slow_stride != 0 || frame_count % fast_stride != 0) {
      throw ConfigError("frame count must be divisible by both strides");
    }
  }

  /// Source frames covered by one clip.
  std::int64_t window_frames() const {
    return std::max<std::int64_t>(1, std::llround(clip_seconds * fps));
  }
};

struct ClipPlan {
  /// The frame_count resampled source frames, in temporal order.
  std::vector<std::int64_t> frames;
  std::vector<std::int64_t> slow;
  std::vector<std::int64_t> fast;
  /// First source frame of the window and its length.
  std::int64_t window_start = 0;
  std::int64_t window_frames = 0;
  /// The window would have started before frame 0 and was shifted to it.
  bool clamped = false;
};

/// Plans the frames of one clip around a keyframe.
///
/// Frame f spans the time interval [f / fps, (f + 1) / fps). The window covers
/// round(clip_seconds * fps) frames centred on the keyframe time; the k-th of
/// the frame_count output frames is the source frame containing the window
/// position (k + 1/2) * window / frame_count. With temporal jitter the window
/// is shifted uniformly by up to half the slack (window - frame_count) frames.
inline ClipPlan sample_clip_frames(double center_timestamp, const ClipSpec& spec,
                                   bool temporal_jitter, std::uint64_t seed = 0) {
  spec.validate();
  if (!(center_timestamp >= 0.0)) throw ConfigError("center timestamp must be >= 0");
  const std::int64_t window = spec.window_frames();
  const double count = static_cast<double>(spec.frame_count);
  double start = center_timestamp * spec.fps - 0.5 * static_cast<double>(window);
  if (temporal_jitter) {
    const double slack = std::max(0.0, static_cast<double>(window) - count);
    const double u = rng::uniform(seed, rng::Stream::kTemporalJitter,
                                  {static_cast<std::uint64_t>(std::llround(center_timestamp * 1e6))});
    start += (2.0 * u - 1.0) * 0.5 * slack;
  }
  ClipPlan plan;
  if (start < 0.0) {
    start = 0.0;
    plan.clamped = true;
  }
  plan.window_frames = window;
  plan.window_start = static_cast<std::int64_t>(std::floor(start));
  const double step = static_cast<double>(window) / count;
  const std::int64_t last = static_cast<std::int64_t>(std::ceil(start + static_cast<double>(window))) - 1;
  plan.frames.reserve(static_cast<std::size_t>(spec.frame_count));
  for (int k = 0; k < spec.frame_count; ++k) {
    auto f = static_cast<std::int64_t>(std::floor(start + (k + 0.5) * step));
    plan.frames.push_back(std::clamp(f, plan.window_start, std::max(plan.window_start, last)));
  }
  for (int k = 0; k < spec.frame_count; ++k) {
    if (k % spec.slow_stride == 0) plan.slow.push_back(plan.frames[static_cast<std::size_t>(k)]);
    if (k % spec.fast_stride == 0) plan.fast.push_back(plan.frames[static_cast<std::size_t>(k)]);
  }
  return plan;
}

/// Shorter-side sizes used for multi-scale training and inference.
inline constexpr std::array<int, 3> kMultiScaleTargets{224, 256, 320};

/// Resize factor mapping the shorter frame side to `target` pixels.
/// Normalized box coordinates are invariant under this resize.
inline double scale_shorter_side(int frame_w, int frame_h, int target) {
  if (frame_w <= 0 || frame_h <= 0 || target <= 0) {
    throw ConfigError("frame sides and target must be > 0");
  }
  return static_cast<double>(target) / static_cast<double>(std::min(frame_w, frame_h));
}

inline BoundingBox horizontal_flip(const BoundingBox& box) noexcept {
  return BoundingBox{1.0 - box.x2, box.y1, 1.0 - box.x1, box.y2};
}

inline constexpr double kDefaultMinVisibility = 0.25;

/// Maps a box into the coordinates of a crop window. Returns nullopt when the
/// visible fraction of the box is below min_visibility (or zero).
inline std::optional<BoundingBox> crop_transform(const BoundingBox& box, const BoundingBox& crop,
                                                 double min_visibility = kDefaultMinVisibility) {
  const double ix1 = std::max(box.x1, crop.x1);
  const double iy1 = std::max(box.y1, crop.y1);
  const double ix2 = std::min(box.x2, crop.x2);
  const double iy2 = std::min(box.y2, crop.y2);
  if (!(ix1 < ix2 && iy1 < iy2)) return std::nullopt;
  const double visible = (ix2 - ix1) * (iy2 - iy1) / box.area();
  if (visible < min_visibility) return std::nullopt;
  const double cw = crop.width();
  const double ch = crop.height();
  BoundingBox out{std::clamp((ix1 - crop.x1) / cw, 0.0, 1.0),
                  std::clamp((iy1 - crop.y1) / ch, 0.0, 1.0),
                  std::clamp((ix2 - crop.x1) / cw, 0.0, 1.0),
                  std::clamp((iy2 - crop.y1) / ch, 0.0, 1.0)};
  if (!out.valid()) return std::nullopt;
  return out;
}

}  // namespace avakit
