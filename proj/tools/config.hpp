#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "commsense/channel_sim.hpp"
#include "commsense/errors.hpp"

namespace commsense::cli {

/// Config problems; the message names the file, line and field.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, std::string source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& require(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;

  /// Rejects any key outside `known`, naming its line.
  void check_keys(const std::vector<std::string>& known) const;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Scenario keys: bursts, tsc, snr_db (number or `none`), seed, oversample, and either
/// `cir` (whitespace-separated `re,im` taps) or `cir_length` with optional `cir_decay`
/// and `cir_seed`. Optional: spread, guard_amplitude, label, freq_offset_hz.
struct ScenarioConfig {
  ScenarioSpec spec;
  double freq_offset_hz = 0.0;
};

ScenarioConfig scenario_from_config(const KeyValueConfig& config);

}  // namespace commsense::cli
