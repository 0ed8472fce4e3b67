// avakit: dataset balancing and frame-mAP evaluation for AVA-style action
// localization annotations.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avakit/avakit.hpp"
#include "cli_io.hpp"

namespace {

using nlohmann::ordered_json;
using namespace avakit;
using cli::CliError;

struct Globals {
  std::string label_map;
  int num_classes = kAvaNumClasses;
};

Globals g_globals;

ParseOptions parse_options() { return ParseOptions{g_globals.num_classes}; }

/// Runs a parser over a file, prefixing errors with the file name.
template <typename Fn>
auto load(const std::string& path, Fn&& parse) {
  const std::string text = cli::read_file(path);
  try {
    return parse(text);
  } catch (const ConfigError& e) {
    throw CliError(2, path + ": " + e.what());
  } catch (const avakit::Error& e) {
    throw CliError(1, path + ": " + e.what());
  }
}

std::vector<Instance> load_instances(const std::string& path) {
  return load(path, [](const std::string& t) {
    return group_instances(parse_ground_truth(t, parse_options()));
  });
}

std::vector<GroundTruthRecord> load_ground_truth(const std::string& path) {
  return load(path, [](const std::string& t) { return parse_ground_truth(t, parse_options()); });
}

std::vector<DetectionRecord> load_detections(const std::string& path) {
  return load(path, [](const std::string& t) { return parse_detections(t, parse_options()); });
}

void check_distinct(const std::vector<std::string>& inputs, const std::string& output) {
  for (const auto& in : inputs) {
    if (cli::same_file(in, output)) {
      throw CliError(2, "output " + output + " would overwrite input " + in);
    }
  }
}

ordered_json base_summary(const std::string& command, const std::vector<std::string>& inputs) {
  ordered_json s;
  s["command"] = command;
  s["inputs"] = inputs;
  return s;
}

std::size_t label_rows(const std::vector<Instance>& instances) {
  std::size_t n = 0;
  for (const auto& i : instances) n += i.labels.size();
  return n;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (auto part : detail::split(text, ',')) {
    double v = 0.0;
    if (!detail::parse_number(part, v)) {
      throw CliError(2, std::string(what) + ": not a number: '" + std::string(part) + "'");
    }
    out.push_back(v);
  }
  return out;
}

// stats ----------------------------------------------------------------------

struct StatsArgs {
  std::string input;
  std::string output;
};

void run_stats(const StatsArgs& a) {
  const auto instances = load_instances(a.input);
  const auto stats = [&] {
    try {
      return class_stats(instances);
    } catch (const EmptyDatasetError& e) {
      throw CliError(1, a.input + ": " + e.what());
    }
  }();
  std::string out = "class,count,percentage\n";
  for (const auto& [c, n] : stats.counts) {
    out += std::to_string(c) + "," + std::to_string(n) + "," + format_double(stats.percentage(c)) + "\n";
  }
  out += "total," + std::to_string(stats.total) + ",100\n";
  auto summary = base_summary("stats", {a.input});
  summary["rows"] = {{"instances", instances.size()}, {"labels", stats.total}};
  if (!a.output.empty()) check_distinct({a.input}, a.output);
  cli::emit(a.output, out, summary);
}

// com ------------------------------------------------------------------------

struct ComArgs {
  std::string input;
  std::string output;
  bool log10 = false;
  bool log10_raw = false;
  int dim = 0;
  int profile_class = 0;
};

std::string dense_csv(const DenseMatrix& m, bool blank_nan) {
  std::string out;
  for (int i = 1; i <= m.dim; ++i) {
    for (int j = 1; j <= m.dim; ++j) {
      if (j > 1) out += ',';
      const double v = m.at(i, j);
      if (!(blank_nan && std::isnan(v))) out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

CooccurrenceMatrix load_com(const ComArgs& a) {
  const int dim = a.dim > 0 ? a.dim : g_globals.num_classes;
  const auto instances = load_instances(a.input);
  try {
    return build_com(instances, dim);
  } catch (const avakit::Error& e) {
    throw CliError(1, a.input + ": " + e.what());
  }
}

void run_com_export(const ComArgs& a) {
  if (a.log10 && a.log10_raw) throw CliError(2, "--log10 and --log10-raw are exclusive");
  const auto com = load_com(a);
  std::string out;
  if (a.log10) {
    out = dense_csv(log10_render(com), false);
  } else if (a.log10_raw) {
    out = dense_csv(log10_raw_render(com), true);
  } else {
    for (int i = 1; i <= com.dim(); ++i) {
      for (int j = 1; j <= com.dim(); ++j) {
        if (j > 1) out += ',';
        out += std::to_string(com.at(i, j));
      }
      out += '\n';
    }
  }
  auto summary = base_summary("com export", {a.input});
  summary["parameters"] = {{"dim", com.dim()},
                           {"rendering", a.log10 ? "log10(e+1)" : a.log10_raw ? "log10(e)" : "counts"}};
  if (!a.output.empty()) check_distinct({a.input}, a.output);
  cli::emit(a.output, out, summary);
}

void run_com_profile(const ComArgs& a) {
  const auto com = load_com(a);
  std::map<ClassId, double> profile;
  try {
    profile = correlation_profile(com, a.profile_class);
  } catch (const avakit::Error& e) {
    throw CliError(1, a.input + ": " + e.what());
  }
  std::string out = "class,ratio\n";
  for (const auto& [j, r] : profile) out += std::to_string(j) + "," + format_double(r) + "\n";
  auto summary = base_summary("com profile", {a.input});
  summary["parameters"] = {{"class", a.profile_class}};
  if (!a.output.empty()) check_distinct({a.input}, a.output);
  cli::emit(a.output, out, summary);
}

// balance --------------------------------------------------------------------

struct BalanceArgs {
  std::string input;
  std::string output;
  std::string report;
  std::uint64_t seed = 0;
  // subsample
  double threshold = 0.3;
  std::int64_t cutoff = 10'000;
  bool no_protect = false;
  int epochs = 1;
  // augment
  std::optional<double> rare_cutoff;
  std::optional<std::int64_t> target;
  double jitter = 0.05;
  int max_copies = 10;
};

SubsampleConfig subsample_config(const BalanceArgs& a) {
  SubsampleConfig c;
  c.threshold = a.threshold;
  c.common_cutoff = a.cutoff;
  c.protect_last_label = !a.no_protect;
  c.seed = a.seed;
  return c;
}

AugmentConfig augment_config(const BalanceArgs& a) {
  AugmentConfig c;
  c.rare_cutoff = a.rare_cutoff;
  c.target_count = a.target;
  c.jitter_frac = a.jitter;
  c.max_copies_per_instance = a.max_copies;
  c.seed = a.seed;
  return c;
}

template <typename Fn>
auto with_config_errors(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw CliError(2, e.what());
  }
}

ordered_json subsample_params(const SubsampleConfig& c) {
  return {{"threshold", c.threshold},
          {"common_cutoff", c.common_cutoff},
          {"protect_last_label", c.protect_last_label}};
}

ordered_json augment_params(const AugmentConfig& c, const ResolvedAugment& r) {
  return {{"rare_cutoff", r.rare_cutoff},
          {"target_count", r.target_count},
          {"jitter_frac", c.jitter_frac},
          {"max_copies_per_instance", c.max_copies_per_instance}};
}

/// kind,i,j,before,after,delta rows: class counts and percentages, rare-class
/// outcomes, and every co-occurrence cell (i <= j) that is nonzero on either side.
std::string balance_report(const std::vector<Instance>& before, const std::vector<Instance>& after,
                           const AugmentResult* augment, int dim) {
  std::string out = "kind,i,j,before,after,delta\n";
  const auto sb = before.empty() ? ClassStats{} : class_stats(before);
  const auto sa = after.empty() ? ClassStats{} : class_stats(after);
  std::set<ClassId> classes;
  for (const auto& [c, n] : sb.counts) classes.insert(c);
  for (const auto& [c, n] : sa.counts) classes.insert(c);
  for (ClassId c : classes) {
    out += "count," + std::to_string(c) + ",," + std::to_string(sb.count(c)) + "," +
           std::to_string(sa.count(c)) + "," + std::to_string(sa.count(c) - sb.count(c)) + "\n";
  }
  for (ClassId c : classes) {
    out += "percent," + std::to_string(c) + ",," + format_double(sb.percentage(c)) + "," +
           format_double(sa.percentage(c)) + "," + format_double(sa.percentage(c) - sb.percentage(c)) +
           "\n";
  }
  if (augment) {
    for (const auto& r : augment->rare) {
      out += "rare," + std::to_string(r.class_id) + ",," + std::to_string(r.before) + "," +
             std::to_string(r.after) + "," + std::to_string(r.copies) + "\n";
      if (r.capped) out += "capped," + std::to_string(r.class_id) + ",,,,\n";
    }
  }
  const auto cb = build_com(before, dim);
  const auto ca = build_com(after, dim);
  for (ClassId i = 1; i <= dim; ++i) {
    for (ClassId j = i; j <= dim; ++j) {
      const auto x = cb.at(i, j), y = ca.at(i, j);
      if (x == 0 && y == 0) continue;
      out += "com," + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(x) + "," +
             std::to_string(y) + "," + std::to_string(y - x) + "\n";
    }
  }
  return out;
}

std::string epoch_path(const std::string& output, int epoch) {
  std::filesystem::path p(output);
  auto name = p.stem().string() + ".e" + std::to_string(epoch) + p.extension().string();
  return (p.parent_path() / name).string();
}

void run_subsample(const BalanceArgs& a) {
  check_distinct({a.input}, a.output);
  const auto cfg = subsample_config(a);
  with_config_errors([&] { cfg.validate(); return 0; });
  if (a.epochs < 1) throw CliError(2, "--epochs must be >= 1");
  const auto instances = load_instances(a.input);
  if (instances.empty()) throw CliError(1, a.input + ": no instances");
  const auto probs = drop_probabilities(class_stats(instances), cfg);
  ordered_json drop = ordered_json::object();
  for (const auto& [c, p] : probs.probs) drop[std::to_string(c)] = p;
  for (int e = 0; e < a.epochs; ++e) {
    SubsampleConfig ec = cfg;
    if (a.epochs > 1) ec.seed = epoch_seed(cfg.seed, static_cast<std::uint64_t>(e));
    const auto out = subsample_labels(instances, probs, ec);
    const std::string path = a.epochs > 1 ? epoch_path(a.output, e) : a.output;
    auto summary = base_summary("balance subsample", {a.input});
    summary["seed"] = a.seed;
    if (a.epochs > 1) summary["epoch"] = {{"index", e}, {"seed", ec.seed}};
    summary["parameters"] = subsample_params(cfg);
    summary["drop_probabilities"] = drop;
    summary["rows"] = {{"input_instances", instances.size()},
                       {"input_labels", label_rows(instances)},
                       {"output_instances", out.size()},
                       {"output_labels", label_rows(out)}};
    cli::write_output(path, write_instances(out), summary);
  }
}

void run_augment(const BalanceArgs& a) {
  check_distinct({a.input}, a.output);
  if (!a.report.empty()) check_distinct({a.input}, a.report);
  const auto cfg = augment_config(a);
  with_config_errors([&] { cfg.validate(); return 0; });
  const auto instances = load_instances(a.input);
  const auto result = with_config_errors([&] { return augment_instances(instances, cfg); });
  auto summary = base_summary("balance augment", {a.input});
  summary["seed"] = a.seed;
  summary["parameters"] = augment_params(cfg, result.resolved);
  ordered_json rare = ordered_json::array();
  for (const auto& r : result.rare) {
    rare.push_back({{"class", r.class_id}, {"before", r.before}, {"after", r.after},
                    {"copies", r.copies}, {"capped", r.capped}});
  }
  summary["rare_classes"] = rare;
  summary["rows"] = {{"input_instances", instances.size()},
                     {"output_instances", result.instances.size()},
                     {"output_labels", label_rows(result.instances)}};
  cli::write_output(a.output, write_instances(result.instances), summary);
  if (!a.report.empty()) {
    cli::write_output(a.report,
                      balance_report(instances, result.instances, &result, g_globals.num_classes),
                      base_summary("balance augment --report", {a.input}));
  }
}

void run_pipeline(const BalanceArgs& a) {
  check_distinct({a.input}, a.output);
  if (!a.report.empty()) check_distinct({a.input}, a.report);
  const auto aug = augment_config(a);
  const auto sub = subsample_config(a);
  with_config_errors([&] { aug.validate(); sub.validate(); return 0; });
  const auto instances = load_instances(a.input);
  const auto result = with_config_errors([&] { return balance(instances, aug, sub); });
  auto summary = base_summary("balance pipeline", {a.input});
  summary["seed"] = a.seed;
  summary["parameters"] = {{"augment", augment_params(aug, result.augment.resolved)},
                           {"subsample", subsample_params(sub)}};
  ordered_json drop = ordered_json::object();
  for (const auto& [c, p] : result.drop.probs) drop[std::to_string(c)] = p;
  summary["drop_probabilities"] = drop;
  summary["rows"] = {{"input_instances", instances.size()},
                     {"augmented_instances", result.augment.instances.size()},
                     {"output_instances", result.instances.size()},
                     {"output_labels", label_rows(result.instances)}};
  cli::write_output(a.output, write_instances(result.instances), summary);
  if (!a.report.empty()) {
    cli::write_output(a.report,
                      balance_report(instances, result.instances, &result.augment, g_globals.num_classes),
                      base_summary("balance pipeline --report", {a.input}));
  }
}

// sample plan ----------------------------------------------------------------

struct SampleArgs {
  ClipSpec spec;
  double center = 0.0;
  bool jitter = false;
  std::optional<std::uint64_t> seed;
};

void run_sample_plan(const SampleArgs& a) {
  if (a.jitter && !a.seed) throw CliError(2, "--jitter requires --seed");
  const auto plan = with_config_errors([&] { return sample_clip_frames(a.center, a.spec, a.jitter, a.seed.value_or(0)); });
  auto list = [](const char* name, const std::vector<std::int64_t>& v) {
    std::string s = name;
    for (auto f : v) s += "," + std::to_string(f);
    return s + "\n";
  };
  std::string out;
  out += "window_start," + std::to_string(plan.window_start) + "\n";
  out += "window_frames," + std::to_string(plan.window_frames) + "\n";
  out += std::string("clamped,") + (plan.clamped ? "1" : "0") + "\n";
  out += list("frames", plan.frames);
  out += list("slow", plan.slow);
  out += list("fast", plan.fast);
  if (plan.clamped) std::fprintf(stderr, "warning: window clamped to frame 0\n");
  std::fwrite(out.data(), 1, out.size(), stdout);
}

// augment geom ---------------------------------------------------------------

struct GeomArgs {
  std::string input;
  std::string output;
  std::string format = "gt";
  std::string crop;
  double min_visibility = kDefaultMinVisibility;
  int width = 0;
  int height = 0;
  int target = 256;
};

BoundingBox parse_crop(const std::string& text) {
  const auto v = parse_double_list(text, "--crop");
  if (v.size() != 4) throw CliError(2, "--crop needs x1,y1,x2,y2");
  BoundingBox b{v[0], v[1], v[2], v[3]};
  if (!b.valid()) throw CliError(2, "--crop is not a valid normalized box");
  return b;
}

void run_geom(const GeomArgs& a, const std::function<std::optional<BoundingBox>(const BoundingBox&)>& op,
              const std::string& name, ordered_json params) {
  check_distinct({a.input}, a.output);
  auto summary = base_summary("augment geom " + name, {a.input});
  summary["parameters"] = std::move(params);
  std::size_t in_rows = 0;
  std::string out;
  if (a.format == "gt") {
    auto rows = load_ground_truth(a.input);
    in_rows = rows.size();
    std::vector<GroundTruthRecord> kept;
    for (auto& r : rows) {
      if (auto b = op(r.box)) {
        r.box = *b;
        kept.push_back(std::move(r));
      }
    }
    out = write_ground_truth(kept);
    summary["rows"] = {{"input", in_rows}, {"output", kept.size()}};
  } else {
    auto rows = load_detections(a.input);
    in_rows = rows.size();
    std::vector<DetectionRecord> kept;
    for (auto& r : rows) {
      if (auto b = op(r.box)) {
        r.box = *b;
        kept.push_back(std::move(r));
      }
    }
    out = write_detections(kept);
    summary["rows"] = {{"input", in_rows}, {"output", kept.size()}};
  }
  cli::write_output(a.output, out, summary);
}

// eval -----------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string det;
  std::string output;
  std::string box_scores;
  double iou = kDefaultIouThreshold;
  std::optional<double> score_thr;
  std::string thresholds = "0,0.2,0.4,0.6,0.8,0.85,0.9";
};

void require_eval_inputs(const EvalArgs& a) {
  if (a.gt.empty() || a.det.empty()) throw CliError(2, "eval needs --gt and --det");
  if (!(a.iou > 0.0 && a.iou <= 1.0)) throw CliError(2, "--iou must be in (0,1]");
  if (!a.output.empty()) check_distinct({a.gt, a.det}, a.output);
}

std::vector<std::string> eval_inputs(const EvalArgs& a) {
  std::vector<std::string> v{a.gt, a.det};
  if (!a.box_scores.empty()) v.push_back(a.box_scores);
  return v;
}

void run_eval(const EvalArgs& a) {
  require_eval_inputs(a);
  const auto gts = load_ground_truth(a.gt);
  auto dets = load_detections(a.det);
  const std::size_t det_rows = dets.size();
  if (a.score_thr) {
    if (!a.box_scores.empty()) {
      const auto scores = load(a.box_scores, [](const std::string& t) { return parse_box_scores(t); });
      dets = load(a.det, [&](const std::string&) { return filter_by_box_score(dets, scores, *a.score_thr); });
    } else {
      dets = filter_by_score(dets, *a.score_thr);
    }
  }
  const auto report = load(a.gt, [&](const std::string&) { return frame_map(dets, gts, a.iou); });
  auto summary = base_summary("eval", eval_inputs(a));
  summary["parameters"] = {{"iou", a.iou}};
  if (a.score_thr) summary["parameters"]["score_threshold"] = *a.score_thr;
  summary["rows"] = {{"ground_truth", gts.size()}, {"detections", det_rows}, {"evaluated", dets.size()},
                     {"classes", report.evaluated_classes.size()}};
  cli::emit(a.output, write_ap_report(report), summary);
}

void run_sweep(const EvalArgs& a) {
  require_eval_inputs(a);
  const auto thresholds = parse_double_list(a.thresholds, "--thresholds");
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (!(thresholds[k] > thresholds[k - 1])) throw CliError(2, "--thresholds must be strictly increasing");
  }
  const auto gts = load_ground_truth(a.gt);
  const auto dets = load_detections(a.det);
  std::optional<BoxScores> scores;
  if (!a.box_scores.empty()) {
    scores = load(a.box_scores, [](const std::string& t) { return parse_box_scores(t); });
  }
  const auto rows = [&] {
    try {
      return threshold_sweep(dets, gts, thresholds, a.iou, scores ? &*scores : nullptr);
    } catch (const ConfigError& e) {
      throw CliError(2, e.what());
    } catch (const avakit::Error& e) {
      throw CliError(1, a.det + ": " + e.what());
    }
  }();
  auto summary = base_summary("eval sweep", eval_inputs(a));
  summary["parameters"] = {{"iou", a.iou}, {"thresholds", thresholds},
                           {"filter", scores ? "person box score" : "row score"}};
  summary["rows"] = {{"ground_truth", gts.size()}, {"detections", dets.size()}, {"sweep", rows.size()}};
  cli::emit(a.output, write_sweep(rows), summary);
}

// fuse, report ---------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> inputs;
  std::string output;
};

void run_fuse(const FuseArgs& a) {
  check_distinct(a.inputs, a.output);
  std::vector<std::vector<DetectionRecord>> sets;
  std::size_t total = 0;
  for (const auto& p : a.inputs) {
    sets.push_back(load_detections(p));
    total += sets.back().size();
  }
  const auto fused = ensemble_average(sets);
  auto summary = base_summary("fuse", a.inputs);
  summary["rows"] = {{"input", total}, {"output", fused.size()}};
  cli::write_output(a.output, write_detections(fused), summary);
}

struct DeltaArgs {
  std::string base;
  std::string improved;
  std::string output;
};

void run_delta(const DeltaArgs& a) {
  if (!a.output.empty()) check_distinct({a.base, a.improved}, a.output);
  const auto base = load(a.base, [](const std::string& t) { return parse_ap_report(t); });
  const auto improved = load(a.improved, [](const std::string& t) { return parse_ap_report(t); });
  const auto rows = classwise_delta(base, improved);
  auto summary = base_summary("report delta", {a.base, a.improved});
  summary["rows"] = {{"classes", rows.size()}};
  cli::emit(a.output, write_delta(rows), summary);
}

// synth ----------------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string noise;
  std::string gt;
  std::string output;
};

void run_synth_dataset(const SynthArgs& a) {
  check_distinct({a.spec}, a.output);
  const auto spec = load(a.spec, [](const std::string& t) {
    return SynthSpec::from_key_values(KeyValues::parse(t));
  });
  const auto data = generate_dataset(spec);
  auto summary = base_summary("synth dataset", {a.spec});
  summary["seed"] = spec.seed;
  summary["rows"] = {{"instances", data.size()}, {"labels", label_rows(data)}};
  cli::write_output(a.output, write_instances(data), summary);
}

void run_synth_detections(const SynthArgs& a) {
  check_distinct({a.gt, a.noise}, a.output);
  const auto noise = load(a.noise, [](const std::string& t) {
    return NoiseSpec::from_key_values(KeyValues::parse(t));
  });
  const auto gts = load_instances(a.gt);
  const auto dets = generate_detections(gts, noise);
  auto summary = base_summary("synth detections", {a.gt, a.noise});
  summary["seed"] = noise.seed;
  summary["rows"] = {{"instances", gts.size()}, {"detections", dets.size()}};
  cli::write_output(a.output, write_detections(dets), summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset balancing and frame-mAP evaluation for AVA-style action localization"};
  app.require_subcommand(1);
  app.add_option("--label-map", g_globals.label_map, "Label map (id<TAB>name) defining the class vocabulary")
      ->check(CLI::ExistingFile);

  std::function<void()> action;
  auto on = [&](CLI::App* sub, std::function<void()> fn) { sub->final_callback([&action, fn] { action = fn; }); };

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Per-class label counts and percentages");
  stats_cmd->add_option("input", stats.input, "Ground-truth CSV")->required();
  stats_cmd->add_option("-o,--output", stats.output, "Write to file instead of stdout");
  on(stats_cmd, [&] { run_stats(stats); });

  ComArgs com;
  auto* com_cmd = app.add_subcommand("com", "Class co-occurrence matrix")->require_subcommand(1);
  auto* com_export = com_cmd->add_subcommand("export", "Dense CSV of the co-occurrence matrix");
  com_export->add_option("input", com.input, "Ground-truth CSV")->required();
  com_export->add_option("-o,--output", com.output, "Write to file instead of stdout");
  com_export->add_flag("--log10", com.log10, "Render log10(e+1)");
  com_export->add_flag("--log10-raw", com.log10_raw, "Render log10(e) with empty cells blank");
  com_export->add_option("--dim", com.dim, "Matrix dimension (default: vocabulary size)");
  on(com_export, [&] { run_com_export(com); });
  auto* com_profile = com_cmd->add_subcommand("profile", "Ratios e_ij / e_ii for one class");
  com_profile->add_option("input", com.input, "Ground-truth CSV")->required();
  com_profile->add_option("--class", com.profile_class, "Class id")->required();
  com_profile->add_option("-o,--output", com.output, "Write to file instead of stdout");
  com_profile->add_option("--dim", com.dim, "Matrix dimension (default: vocabulary size)");
  on(com_profile, [&] { run_com_profile(com); });

  BalanceArgs bal;
  auto* balance_cmd = app.add_subcommand("balance", "Label subsampling and instance augmentation")
                          ->require_subcommand(1);
  auto add_io = [&](CLI::App* c) {
    c->add_option("input", bal.input, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
    c->add_option("output", bal.output, "Output ground-truth CSV")->required();
    c->add_option("--seed", bal.seed, "RNG seed")->required();
  };
  auto add_subsample = [&](CLI::App* c) {
    c->add_option("--threshold", bal.threshold, "Probability threshold T")->capture_default_str();
    c->add_option("--cutoff", bal.cutoff, "Label count above which a class is common")->capture_default_str();
    c->add_flag("--no-protect", bal.no_protect, "Allow dropping the last label of an instance");
  };
  auto add_augment = [&](CLI::App* c) {
    c->add_option("--rare-cutoff", bal.rare_cutoff, "Label count below which a class is rare (default: median)");
    c->add_option("--target", bal.target, "Target count for rare classes (default: rare cutoff)");
    c->add_option("--jitter", bal.jitter, "Maximum jitter as a fraction of box size")->capture_default_str();
    c->add_option("--max-copies", bal.max_copies, "Copies allowed per source instance")->capture_default_str();
  };
  auto* sub_cmd = balance_cmd->add_subcommand("subsample", "Drop labels of common classes");
  add_io(sub_cmd);
  add_subsample(sub_cmd);
  sub_cmd->add_option("--epochs", bal.epochs, "Emit this many independently seeded variants")->capture_default_str();
  on(sub_cmd, [&] { run_subsample(bal); });
  auto* aug_cmd = balance_cmd->add_subcommand("augment", "Copy rare-class instances with jittered boxes");
  add_io(aug_cmd);
  add_augment(aug_cmd);
  aug_cmd->add_option("--report", bal.report, "Before/after statistics CSV");
  on(aug_cmd, [&] { run_augment(bal); });
  auto* pipe_cmd = balance_cmd->add_subcommand("pipeline", "Augment, then subsample on the augmented statistics");
  add_io(pipe_cmd);
  add_subsample(pipe_cmd);
  add_augment(pipe_cmd);
  pipe_cmd->add_option("--report", bal.report, "Before/after statistics CSV");
  on(pipe_cmd, [&] { run_pipeline(bal); });

  SampleArgs sample;
  std::uint64_t sample_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Clip frame sampling")->require_subcommand(1);
  auto* plan_cmd = sample_cmd->add_subcommand("plan", "Print slow/fast pathway frame indices");
  plan_cmd->add_option("--fps", sample.spec.fps, "Source frames per second")->required();
  plan_cmd->add_option("--center", sample.center, "Keyframe timestamp in seconds")->required();
  plan_cmd->add_flag("--jitter", sample.jitter, "Shift the window randomly");
  auto* seed_opt = plan_cmd->add_option("--seed", sample_seed, "RNG seed (required with --jitter)");
  plan_cmd->add_option("--clip-seconds", sample.spec.clip_seconds)->capture_default_str();
  plan_cmd->add_option("--frames", sample.spec.frame_count)->capture_default_str();
  plan_cmd->add_option("--slow-stride", sample.spec.slow_stride)->capture_default_str();
  plan_cmd->add_option("--fast-stride", sample.spec.fast_stride)->capture_default_str();
  on(plan_cmd, [&] {
    if (seed_opt->count() > 0) sample.seed = sample_seed;
    run_sample_plan(sample);
  });

  GeomArgs geom;
  auto* augment_cmd = app.add_subcommand("augment", "Annotation-space augmentations")->require_subcommand(1);
  auto* geom_cmd = augment_cmd->add_subcommand("geom", "Box geometry transforms")->require_subcommand(1);
  auto add_geom_io = [&](CLI::App* c) {
    c->add_option("input", geom.input, "Ground-truth or detection CSV")->required()->check(CLI::ExistingFile);
    c->add_option("output", geom.output, "Output CSV")->required();
    c->add_option("--format", geom.format, "Row format")->check(CLI::IsMember({"gt", "det"}))->capture_default_str();
  };
  auto* flip_cmd = geom_cmd->add_subcommand("flip", "Mirror boxes horizontally");
  add_geom_io(flip_cmd);
  on(flip_cmd, [&] {
    run_geom(geom, [](const BoundingBox& b) { return std::optional<BoundingBox>(horizontal_flip(b)); }, "flip",
             ordered_json::object());
  });
  auto* crop_cmd = geom_cmd->add_subcommand("crop", "Map boxes into a crop window, dropping hidden ones");
  add_geom_io(crop_cmd);
  crop_cmd->add_option("--crop", geom.crop, "Crop window x1,y1,x2,y2 (normalized)")->required();
  crop_cmd->add_option("--min-visibility", geom.min_visibility)->capture_default_str();
  on(crop_cmd, [&] {
    const auto window = parse_crop(geom.crop);
    const double mv = geom.min_visibility;
    run_geom(geom, [&](const BoundingBox& b) { return crop_transform(b, window, mv); }, "crop",
             {{"crop", geom.crop}, {"min_visibility", mv}});
  });
  auto* scale_cmd = geom_cmd->add_subcommand("scale", "Print the shorter-side resize factor");
  scale_cmd->add_option("--width", geom.width)->required();
  scale_cmd->add_option("--height", geom.height)->required();
  scale_cmd->add_option("--target", geom.target, "Shorter-side length (224, 256 or 320)")->capture_default_str();
  on(scale_cmd, [&] {
    const double f = with_config_errors([&] { return scale_shorter_side(geom.width, geom.height, geom.target); });
    std::printf("%s\n", format_double(f).c_str());
  });

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Frame-mAP evaluation")->require_subcommand(0, 1);
  auto add_eval = [&](CLI::App* c) {
    c->add_option("--gt", ev.gt, "Ground-truth CSV")->check(CLI::ExistingFile);
    c->add_option("--det", ev.det, "Detection CSV")->check(CLI::ExistingFile);
    c->add_option("--iou", ev.iou, "IoU threshold")->capture_default_str();
    c->add_option("--box-scores", ev.box_scores, "Person-box scores CSV (video,ts,x1,y1,x2,y2,score)")
        ->check(CLI::ExistingFile);
    c->add_option("-o,--output", ev.output, "Write to file instead of stdout");
  };
  add_eval(eval_cmd);
  eval_cmd->add_option("--score-thr", ev.score_thr, "Keep detections scoring above this");
  auto* sweep_cmd = eval_cmd->add_subcommand("sweep", "mAP over detector-confidence thresholds");
  add_eval(sweep_cmd);
  sweep_cmd->add_option("--thresholds", ev.thresholds, "Comma-separated, strictly increasing")->capture_default_str();
  on(sweep_cmd, [&] { run_sweep(ev); });
  eval_cmd->final_callback([&] {
    if (sweep_cmd->parsed()) {
      action = [&] { run_sweep(ev); };
    } else {
      action = [&] { run_eval(ev); };
    }
  });

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Average detection scores across runs");
  fuse_cmd->add_option("inputs", fuse.inputs, "Detection CSVs")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("-o,--output", fuse.output, "Fused detection CSV")->required();
  on(fuse_cmd, [&] { run_fuse(fuse); });

  DeltaArgs delta;
  auto* report_cmd = app.add_subcommand("report", "Report tables")->require_subcommand(1);
  auto* delta_cmd = report_cmd->add_subcommand("delta", "Class-wise AP comparison of two eval reports");
  delta_cmd->add_option("base", delta.base, "Baseline AP report")->required()->check(CLI::ExistingFile);
  delta_cmd->add_option("improved", delta.improved, "Improved AP report")->required()->check(CLI::ExistingFile);
  delta_cmd->add_option("-o,--output", delta.output, "Write to file instead of stdout");
  on(delta_cmd, [&] { run_delta(delta); });

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic data with known statistics")->require_subcommand(1);
  auto* ds_cmd = synth_cmd->add_subcommand("dataset", "Generate ground truth from a spec file");
  ds_cmd->add_option("--spec", synth.spec, "key=value spec file")->required()->check(CLI::ExistingFile);
  ds_cmd->add_option("-o,--output", synth.output, "Ground-truth CSV")->required();
  on(ds_cmd, [&] { run_synth_dataset(synth); });
  auto* det_cmd = synth_cmd->add_subcommand("detections", "Generate detections from ground truth");
  det_cmd->add_option("--gt", synth.gt, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
  det_cmd->add_option("--noise", synth.noise, "key=value noise file")->required()->check(CLI::ExistingFile);
  det_cmd->add_option("-o,--output", synth.output, "Detection CSV")->required();
  on(det_cmd, [&] { run_synth_detections(synth); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!g_globals.label_map.empty()) {
      const auto map = load(g_globals.label_map, [](const std::string& t) { return parse_label_map(t); });
      if (map.num_classes() == 0) throw CliError(1, g_globals.label_map + ": label map defines no classes");
      g_globals.num_classes = map.num_classes();
    }
    if (action) action();
    return 0;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const avakit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
