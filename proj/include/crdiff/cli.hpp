#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crdiff::cli {

inline constexpr const char* kVersion = "0.3.0";
/// Default directory for output files when no explicit path is given.
inline constexpr const char* kOutputDirEnv = "CRDIFF_OUTPUT_DIR";

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Kind { text, choice, integer, unsigned_integer, real, real_list, boolean };

struct KeySpec {
  std::string section;
  std::string key;
  std::string flag;  // long flag name without dashes
  Kind kind = Kind::text;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;
  std::optional<double> min;  // numeric lower bound
  bool strict_min = false;    // min is exclusive
  bool hashed = true;         // part of the config hash

  std::string qualified() const { return section + "." + key; }
};

/// Every recognised key, in canonical order.
const std::vector<KeySpec>& schema();
const KeySpec* find_key(const std::string& qualified);
const KeySpec* find_flag(const std::string& flag);

/// Effective configuration: one canonical string per schema key.
class RunConfig {
 public:
  RunConfig();

  /// Parses, validates and normalises `raw`; throws ConfigError naming the key.
  void set(const std::string& qualified, const std::string& raw);

  const std::string& command() const { return text("run.command"); }
  const std::string& text(const std::string& qualified) const;
  long long integer(const std::string& qualified) const;
  std::uint64_t unsigned_integer(const std::string& qualified) const;
  double real(const std::string& qualified) const;
  std::vector<double> reals(const std::string& qualified) const;
  bool boolean(const std::string& qualified) const;

  /// Canonical INI text. With `hashed_only`, keys excluded from the hash
  /// (worker count, output location) are omitted.
  std::string to_ini(bool hashed_only = false) const;
  /// FNV-1a 64 of the hashed canonical INI, as 16 hex digits.
  std::string hash() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

 private:
  std::map<std::string, std::string> values_;
};

/// Merges a `key = value` file with [sections] into `cfg`. Keys outside a
/// section may use their flag name.
void load_config_file(const std::string& path, RunConfig& cfg);
void load_config_text(const std::string& text, RunConfig& cfg);

/// Command line: `crdiff <command> [--config FILE] [--key value ...]`.
/// File values are applied first, flags override them.
struct ParsedArgs {
  RunConfig config;
  bool dump_config = false;
  bool help = false;
  std::string help_text;
};
ParsedArgs parse_args(int argc, const char* const* argv);

/// Runs the configured command. Returns 0 on success, 1 on runtime failure.
/// Throws ConfigError for inconsistent settings discovered while running.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full entry point with exit-code mapping (0 / 1 / 2).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crdiff::cli
