#pragma once

// Run configurations, deterministic artifacts (CSV / JSON manifests / SVG
// charts), and the on-disk cache of finished runs keyed by the canonical
// config hash.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gibbslab::harness {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CacheIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string text;  // canonical JSON (sorted keys, fixed spacing)

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& json_text);
  std::string kind() const;
  std::string hash() const;  // fnv-1a 64 of the canonical text, hex
};

struct RunOptions {
  std::string out_dir = "out";
  int threads = 2;
  bool no_cache = false;
};

struct RunResult {
  std::vector<std::string> artifacts;  // file names inside out_dir
  bool from_cache = false;
  double wall_seconds = 0.0;
};

// executes the config; throws ValidationError (exit 2) on schema problems,
// std::runtime_error (exit 3) on numeric failures
RunResult cmd_run(const RunConfig& config, const RunOptions& opts);

// action: list | clear | verify
int cmd_cache(const std::string& action, const std::string& out_dir);

// shortest round-trip decimal formatting (reproducible artifacts)
std::string format_double(double v);

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace gibbslab::harness
