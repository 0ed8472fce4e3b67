#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace avakit {

/// Number of action classes in the AVA vocabulary. Class ids are 1-based.
inline constexpr int kAvaNumClasses = 80;

using ClassId = int;

/// Actor box in normalized image coordinates.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 1.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  /// 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
  bool valid() const noexcept {
    return 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 && y2 <= 1.0 &&
           area() > 0.0;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline bool nearly_equal(const BoundingBox& a, const BoundingBox& b, double tol) noexcept {
  return std::abs(a.x1 - b.x1) <= tol && std::abs(a.y1 - b.y1) <= tol &&
         std::abs(a.x2 - b.x2) <= tol && std::abs(a.y2 - b.y2) <= tol;
}

struct GroundTruthRecord {
  std::string video_id;
  std::int64_t timestamp = 0;
  BoundingBox box;
  ClassId action_id = 1;
  std::int64_t person_id = 0;

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

/// One scored (box, action) row; the AVA submission convention.
struct DetectionRecord {
  std::string video_id;
  std::int64_t timestamp = 0;
  BoundingBox box;
  ClassId action_id = 1;
  double score = 0.0;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Sorted, duplicate-free set of action ids.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<ClassId> ids) : ids_(ids) { normalize(); }
  explicit LabelSet(std::vector<ClassId> ids) : ids_(std::move(ids)) { normalize(); }

  bool insert(ClassId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) return false;
    ids_.insert(it, id);
    return true;
  }

  bool erase(ClassId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return false;
    ids_.erase(it);
    return true;
  }

  bool contains(ClassId id) const noexcept {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  ClassId front() const { return ids_.front(); }
  ClassId back() const { return ids_.back(); }
  const std::vector<ClassId>& ids() const noexcept { return ids_; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  std::vector<ClassId> ids_;
};

/// One actor box at one keyframe with its full multi-label action set.
struct Instance {
  std::string video_id;
  std::int64_t timestamp = 0;
  std::int64_t person_id = 0;
  BoundingBox box;
  LabelSet labels;

  auto key() const { return std::tie(video_id, timestamp, person_id); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Identifies one keyframe.
struct FrameKey {
  std::string video_id;
  std::int64_t timestamp = 0;

  friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
};

}  // namespace avakit
