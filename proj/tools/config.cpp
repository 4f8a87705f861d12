#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace commsense::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_full(const std::string& s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, std::string source) {
  KeyValueConfig cfg;
  cfg.source_ = std::move(source);
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = cfg.source_ + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    if (value.empty()) throw ConfigError(where + "field '" + key + "' has no value");
    const auto [it, inserted] = cfg.entries_.emplace(key, Entry{value, line_no});
    if (!inserted) {
      throw ConfigError(where + "field '" + key + "' repeats line " + std::to_string(it->second.line));
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  const std::string where =
      it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": field '" + key + "': " + what);
}

const std::string& KeyValueConfig::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing required field '" + key + "'");
  return it->second.value;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

double KeyValueConfig::number(const std::string& key) const {
  const std::string& v = require(key);
  double out = 0.0;
  if (!parse_full(v, out)) fail(key, "expected a number, got '" + v + "'");
  return out;
}

std::int64_t KeyValueConfig::integer(const std::string& key) const {
  const std::string& v = require(key);
  std::int64_t out = 0;
  if (!parse_full(v, out)) fail(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t KeyValueConfig::unsigned_integer(const std::string& key) const {
  const std::string& v = require(key);
  std::uint64_t out = 0;
  if (!parse_full(v, out)) fail(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

void KeyValueConfig::check_keys(const std::vector<std::string>& known) const {
  for (const auto& [key, entry] : entries_) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) {
      throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": unknown field '" + key + "'");
    }
  }
}

ScenarioConfig scenario_from_config(const KeyValueConfig& c) {
  c.check_keys({"bursts", "tsc", "snr_db", "seed", "oversample", "cir", "cir_length", "cir_decay",
                "cir_seed", "spread", "guard_amplitude", "label", "freq_offset_hz"});
  ScenarioConfig out;
  ScenarioSpec& s = out.spec;

  const auto bursts = c.integer("bursts");
  if (bursts < 1) c.fail("bursts", "must be >= 1");
  s.bursts = static_cast<std::size_t>(bursts);

  const auto tsc = c.integer("tsc");
  if (tsc < 0 || tsc > 7) c.fail("tsc", "must be in 0..7");
  s.tsc = static_cast<int>(tsc);

  if (c.require("snr_db") == "none") {
    s.snr_db.reset();
  } else {
    s.snr_db = c.number("snr_db");
    if (!std::isfinite(*s.snr_db)) c.fail("snr_db", "must be finite");
  }
  s.seed = c.unsigned_integer("seed");

  const auto os = c.integer("oversample");
  if (os < 1 || os > 64) c.fail("oversample", "must be in 1..64");
  s.oversample = static_cast<int>(os);

  if (c.has("cir") && c.has("cir_length")) c.fail("cir_length", "conflicts with 'cir'");
  if (!c.has("cir_length")) (void)c.require("cir");
  if (c.has("cir")) {
    s.cir_template.clear();
    std::istringstream taps(c.require("cir"));
    std::string tok;
    while (taps >> tok) {
      const auto comma = tok.find(',');
      double re = 0.0;
      double im = 0.0;
      const bool ok = comma == std::string::npos
                          ? parse_full(tok, re)
                          : parse_full(tok.substr(0, comma), re) && parse_full(tok.substr(comma + 1), im);
      if (!ok) c.fail("cir", "bad tap '" + tok + "', expected 're' or 're,im'");
      s.cir_template.emplace_back(re, im);
    }
  } else {
    const auto len = c.integer("cir_length");
    if (len < 1) c.fail("cir_length", "must be >= 1");
    const double decay = c.has("cir_decay") ? c.number("cir_decay") : 1.5;
    if (!(decay > 0.0)) c.fail("cir_decay", "must be positive");
    const std::uint64_t seed = c.has("cir_seed") ? c.unsigned_integer("cir_seed") : 1;
    s.cir_template = random_cir(static_cast<std::size_t>(len), decay, seed);
  }

  if (c.has("spread")) {
    s.perturbation_spread = c.number("spread");
    if (!(s.perturbation_spread >= 0.0)) c.fail("spread", "must be >= 0");
  }
  if (c.has("guard_amplitude")) {
    s.guard_amplitude = c.number("guard_amplitude");
    if (!(s.guard_amplitude >= 0.0)) c.fail("guard_amplitude", "must be >= 0");
  }
  if (c.has("label")) s.label = c.require("label");
  if (c.has("freq_offset_hz")) out.freq_offset_hz = c.number("freq_offset_hz");
  return out;
}

}  // namespace commsense::cli
