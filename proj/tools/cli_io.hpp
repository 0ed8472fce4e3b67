#pragma once

// File plumbing for the avakit command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace avakit::cli {

/// Exit code 1: bad input data. Exit code 2: bad usage.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(1, path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(1, path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw CliError(1, path + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw CliError(1, path + ": cannot move output into place");
  }
}

inline bool same_file(const std::string& a, const std::string& b) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const auto ca = fs::weakly_canonical(a, ec);
  const auto cb = fs::weakly_canonical(b, ec);
  return ca == cb;
}

/// Output file plus `<path>.summary.json` describing the run.
inline void write_output(const std::string& path, const std::string& content,
                         nlohmann::ordered_json summary) {
  write_atomic(path, content);
  summary["output"] = path;
  summary["output_bytes"] = content.size();
  write_atomic(path + ".summary.json", summary.dump(2) + "\n");
}

/// Writes to `path`, or to stdout when it is empty.
inline void emit(const std::string& path, const std::string& content,
                 nlohmann::ordered_json summary) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  write_output(path, content, std::move(summary));
}

}  // namespace avakit::cli
