#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scatlab {

// Config/schema violations exit with status 1; numerical-check failures with 2.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExperimentVerdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunRecord {
  nlohmann::json config_echo;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<ExperimentVerdict> verdicts;
  std::vector<std::pair<std::string, std::string>> manifest;  // file, digest

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct CatalogEntry {
  std::string kind;
  std::string description;
  std::vector<std::string> required_keys;
};

const std::vector<CatalogEntry>& list_experiments();

// Dispatches on config["kind"], writes artifact files + record.json into
// out_dir, returns the record. Throws UsageError on schema problems.
RunRecord run_experiment(const nlohmann::json& config, const std::string& out_dir,
                         unsigned long long seed_override = 0);

RunRecord run_experiment_file(const std::string& config_path,
                              const std::string& out_dir_override);

}  // namespace scatlab
