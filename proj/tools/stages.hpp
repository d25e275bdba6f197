#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "slowman/errors.hpp"

namespace slowman::cli {

enum class Stage { family, floquet, project, homological, reduce, verify };

[[nodiscard]] Stage parse_stage(const std::string& name);  // ConfigError on unknown names
[[nodiscard]] std::string to_string(Stage s);

/// An upstream artifact needed with --stage-cache is absent or stale.
class DependencyError : public ConfigError {
 public:
  DependencyError(const std::string& what, Stage stage) : ConfigError(what), stage_(stage) {}
  [[nodiscard]] Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct RunOptions {
  std::filesystem::path out = "out";
  bool stage_cache = false;  // load upstream artifacts from `out` instead of recomputing
  std::optional<std::filesystem::path> family_in;
  std::optional<std::filesystem::path> family_out;
};

enum ExitCode : int { exit_pass = 0, exit_tolerance = 1, exit_usage = 2, exit_numerical = 3 };

struct RunResult {
  int exit_code = exit_pass;
  nlohmann::json report;  // also written to <out>/report_<stage>.json
};

/// Runs `stage` and everything upstream of it. Never throws for pipeline
/// errors: they are mapped to exit codes and recorded in the report.
[[nodiscard]] RunResult run_stage(Stage stage, const RunConfig& config, const RunOptions& options, std::ostream& log);

}  // namespace slowman::cli
