#pragma once

// AVA-style CSV files: no header, unquoted fields, LF line endings.
//
//   ground truth: video_id,timestamp,x1,y1,x2,y2,action_id,person_id
//   detections:   video_id,timestamp,x1,y1,x2,y2,action_id,score
//   label map:    id<TAB>name, ids 1..K

#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "avakit/error.hpp"
#include "avakit/types.hpp"

namespace avakit {

struct ParseOptions {
  /// Action ids must lie in [1, num_classes].
  int num_classes = kAvaNumClasses;
};

namespace detail {

/// Calls fn(row_number, line) for every non-empty line; row numbers are 1-based.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t row = 0;
  while (!text.empty()) {
    ++row;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    fn(row, line);
  }
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline bool parse_number(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline double field_double(std::size_t row, std::string_view s, const char* name) {
  double v = 0.0;
  if (!parse_number(s, v)) {
    throw ParseError(row, std::string("field '") + name + "' is not a number: '" +
                              std::string(s) + "'");
  }
  return v;
}

/// Integer field; a well-formed but fractional number is a validation error.
inline std::int64_t field_int(std::size_t row, std::string_view s, const char* name) {
  std::int64_t v = 0;
  if (parse_number(s, v)) return v;
  double d = 0.0;
  if (parse_number(s, d)) {
    throw ValidationError(row, std::string("field '") + name + "' must be an integer: '" +
                                   std::string(s) + "'");
  }
  throw ParseError(row, std::string("field '") + name + "' is not a number: '" +
                            std::string(s) + "'");
}

inline BoundingBox field_box(std::size_t row, const std::vector<std::string_view>& f) {
  BoundingBox box{field_double(row, f[2], "x1"), field_double(row, f[3], "y1"),
                  field_double(row, f[4], "x2"), field_double(row, f[5], "y2")};
  if (!box.valid()) {
    throw ValidationError(row, "invalid box (need 0<=x1<x2<=1 and 0<=y1<y2<=1): " +
                                   std::string(f[2]) + "," + std::string(f[3]) + "," +
                                   std::string(f[4]) + "," + std::string(f[5]));
  }
  return box;
}

inline void check_common(std::size_t row, const std::vector<std::string_view>& f,
                         std::int64_t timestamp, std::int64_t action, const ParseOptions& opt) {
  if (f[0].empty()) throw ValidationError(row, "empty video_id");
  if (timestamp < 0) throw ValidationError(row, "negative timestamp");
  if (action < 1 || action > opt.num_classes) {
    throw ValidationError(row, "action_id " + std::to_string(action) + " outside [1," +
                                   std::to_string(opt.num_classes) + "]");
  }
}

/// Shortest representation that parses back to the same double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

inline void append_box(std::string& out, const BoundingBox& b) {
  append_double(out, b.x1);
  out += ',';
  append_double(out, b.y1);
  out += ',';
  append_double(out, b.x2);
  out += ',';
  append_double(out, b.y2);
}

}  // namespace detail

inline std::string format_double(double v) {
  std::string s;
  detail::append_double(s, v);
  return s;
}

inline std::vector<GroundTruthRecord> parse_ground_truth(std::string_view csv_text,
                                                         const ParseOptions& opt = {}) {
  std::vector<GroundTruthRecord> out;
  detail::for_each_line(csv_text, [&](std::size_t row, std::string_view line) {
    const auto f = detail::split(line, ',');
    if (f.size() != 8) {
      throw ParseError(row, "expected 8 fields, got " + std::to_string(f.size()));
    }
    GroundTruthRecord r;
    r.video_id = std::string(f[0]);
    r.timestamp = detail::field_int(row, f[1], "timestamp");
    r.box = detail::field_box(row, f);
    const auto action = detail::field_int(row, f[6], "action_id");
    r.person_id = detail::field_int(row, f[7], "person_id");
    detail::check_common(row, f, r.timestamp, action, opt);
    if (r.person_id < 0) throw ValidationError(row, "negative person_id");
    r.action_id = static_cast<ClassId>(action);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<DetectionRecord> parse_detections(std::string_view csv_text,
                                                     const ParseOptions& opt = {}) {
  std::vector<DetectionRecord> out;
  detail::for_each_line(csv_text, [&](std::size_t row, std::string_view line) {
    const auto f = detail::split(line, ',');
    if (f.size() != 8) {
      throw ParseError(row, "expected 8 fields, got " + std::to_string(f.size()));
    }
    DetectionRecord r;
    r.video_id = std::string(f[0]);
    r.timestamp = detail::field_int(row, f[1], "timestamp");
    r.box = detail::field_box(row, f);
    const auto action = detail::field_int(row, f[6], "action_id");
    r.score = detail::field_double(row, f[7], "score");
    detail::check_common(row, f, r.timestamp, action, opt);
    if (!(r.score >= 0.0 && r.score <= 1.0)) {
      throw ValidationError(row, "score outside [0,1]: " + std::string(f[7]));
    }
    r.action_id = static_cast<ClassId>(action);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::string write_ground_truth(const std::vector<GroundTruthRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.video_id;
    out += ',';
    out += std::to_string(r.timestamp);
    out += ',';
    detail::append_box(out, r.box);
    out += ',';
    out += std::to_string(r.action_id);
    out += ',';
    out += std::to_string(r.person_id);
    out += '\n';
  }
  return out;
}

inline std::string write_detections(const std::vector<DetectionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.video_id;
    out += ',';
    out += std::to_string(r.timestamp);
    out += ',';
    detail::append_box(out, r.box);
    out += ',';
    out += std::to_string(r.action_id);
    out += ',';
    detail::append_double(out, r.score);
    out += '\n';
  }
  return out;
}

/// Tolerance for boxes of records that belong to one instance.
inline constexpr double kGroupBoxTolerance = 1e-6;

/// Merges records sharing (video_id, timestamp, person_id) into multi-label
/// instances, sorted by that key. The box of the first record wins.
inline std::vector<Instance> group_instances(const std::vector<GroundTruthRecord>& records) {
  using Key = std::tuple<std::string_view, std::int64_t, std::int64_t>;
  std::map<Key, std::size_t> index;
  std::vector<Instance> grouped;
  for (const auto& r : records) {
    auto [it, inserted] =
        index.try_emplace(Key{r.video_id, r.timestamp, r.person_id}, grouped.size());
    if (inserted) {
      grouped.push_back(Instance{r.video_id, r.timestamp, r.person_id, r.box, {}});
    }
    Instance& inst = grouped[it->second];
    if (!nearly_equal(inst.box, r.box, kGroupBoxTolerance)) {
      throw InconsistencyError("records for " + r.video_id + "," + std::to_string(r.timestamp) +
                               ", person " + std::to_string(r.person_id) +
                               " carry different boxes");
    }
    inst.labels.insert(r.action_id);
  }
  std::vector<Instance> out;
  out.reserve(grouped.size());
  for (const auto& [key, pos] : index) out.push_back(std::move(grouped[pos]));
  return out;
}

/// Expands instances back to one record per (instance, label), labels ascending.
inline std::vector<GroundTruthRecord> to_records(const std::vector<Instance>& instances) {
  std::vector<GroundTruthRecord> out;
  for (const auto& inst : instances) {
    for (ClassId label : inst.labels) {
      out.push_back(GroundTruthRecord{inst.video_id, inst.timestamp, inst.box, label,
                                      inst.person_id});
    }
  }
  return out;
}

inline std::string write_instances(const std::vector<Instance>& instances) {
  return write_ground_truth(to_records(instances));
}

/// id -> name, ids contiguous from 1.
struct LabelMap {
  std::map<ClassId, std::string> names;

  int num_classes() const noexcept {
    return names.empty() ? 0 : names.rbegin()->first;
  }
};

inline LabelMap parse_label_map(std::string_view text) {
  LabelMap map;
  detail::for_each_line(text, [&](std::size_t row, std::string_view line) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(row, "expected id<TAB>name");
    const auto id = detail::field_int(row, line.substr(0, tab), "id");
    if (id < 1) throw ValidationError(row, "label id must be >= 1");
    if (!map.names.emplace(static_cast<ClassId>(id), std::string(line.substr(tab + 1))).second) {
      throw ValidationError(row, "duplicate label id " + std::to_string(id));
    }
  });
  const int k = map.num_classes();
  if (static_cast<std::size_t>(k) != map.names.size()) {
    throw ValidationError(0, "label ids must be exactly 1.." + std::to_string(k));
  }
  return map;
}

}  // namespace avakit
