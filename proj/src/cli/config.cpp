#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "crdiff/cli.hpp"

namespace crdiff::cli {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error("config error: " + key + ": " + message), key_(std::move(key)) {}

namespace {

const std::vector<std::string> kCommands = {"simulate",        "density",          "line-integral", "charfn",
                                            "check-model",     "check-hormander",  "check-smoothness",
                                            "dirichlet"};

std::vector<KeySpec> build_schema() {
  std::vector<KeySpec> s;
  auto add = [&s](std::string section, std::string key, std::string flag, Kind kind, std::string def,
                  std::string help) -> KeySpec& {
    KeySpec k;
    k.section = std::move(section);
    k.key = std::move(key);
    k.flag = std::move(flag);
    k.kind = kind;
    k.default_value = std::move(def);
    k.help = std::move(help);
    s.push_back(std::move(k));
    return s.back();
  };
  auto positive = [](KeySpec& k) { k.min = 0.0, k.strict_min = true; };
  auto at_least = [](KeySpec& k, double v) { k.min = v; };

  add("run", "command", "command", Kind::choice, "", "command to run").choices = kCommands;
  add("run", "output", "output", Kind::text, "", "output file ('-' for stdout)").hashed = false;
  add("run", "format", "format", Kind::choice, "csv", "csv | text").choices = {"csv", "text"};
  at_least(add("run", "workers", "workers", Kind::integer, "0", "worker threads (0 = all)"), 0);
  s.back().hashed = false;

  add("model", "name", "model", Kind::choice, "heisenberg", "heisenberg | gauge_phase | gauge_constant").choices = {
      "heisenberg", "gauge_phase", "gauge_constant"};
  at_least(add("model", "n", "n", Kind::integer, "1", "CR dimension n"), 1);
  add("model", "kappa", "kappa", Kind::real, "1", "gauge parameter");

  positive(add("sim", "t", "t", Kind::real, "1", "time horizon"));
  at_least(add("sim", "steps", "steps", Kind::integer, "1000", "integration steps"), 1);
  at_least(add("sim", "paths", "paths", Kind::integer, "1000", "number of paths"), 1);
  add("sim", "seed", "seed", Kind::unsigned_integer, "0", "64-bit seed");
  at_least(add("sim", "reunitarize_every", "reunitarize-every", Kind::integer, "1", "0 disables"), 0);
  at_least(add("sim", "record_stride", "record-stride", Kind::integer, "1", "record every k-th state"), 1);
  positive(add("sim", "cap", "cap", Kind::real, "1e6", "coordinate cap"));
  add("sim", "start", "start", Kind::real_list, "", "start point (default origin)");
  add("sim", "terminal_only", "terminal-only", Kind::boolean, "false", "simulate: write terminal states only");

  add("density", "lower", "lower", Kind::real_list, "", "window lower corner (default sample min)");
  add("density", "upper", "upper", Kind::real_list, "", "window upper corner (default sample max)");
  at_least(add("density", "grid", "grid", Kind::integer, "16", "grid points per axis"), 2);
  add("density", "bandwidth", "bandwidth", Kind::real_list, "", "per-axis bandwidth (default Scott)");

  add("form", "name", "form", Kind::choice, "du", "theta | du | area | zero").choices = {"theta", "du", "area",
                                                                                          "zero"};
  at_least(add("form", "alpha", "alpha", Kind::integer, "1", "form index alpha"), 1);

  at_least(add("charfn", "coordinate", "coordinate", Kind::integer, "0", "1-based coordinate (0 = last)"), 0);
  add("charfn", "lambdas", "lambdas", Kind::real_list, "0.5,1,2", "frequencies");

  at_least(add("check", "points", "points", Kind::integer, "10", "random probe points"), 1);
  positive(add("check", "radius", "sample-radius", Kind::real, "2", "probe box half-width"));
  at_least(add("check", "max_order", "max-order", Kind::integer, "2", "bracket / Phi order"), 1);
  add("check", "point", "point", Kind::real_list, "", "check-smoothness point (default origin)");

  add("dirichlet", "mode", "mode", Kind::choice, "solve", "solve | probe | exit_time").choices = {"solve", "probe",
                                                                                                  "exit_time"};
  add("dirichlet", "domain", "domain", Kind::choice, "koranyi_ball", "domain preset").choices = {"koranyi_ball"};
  positive(add("dirichlet", "radius", "radius", Kind::real, "1", "domain radius"));
  add("dirichlet", "boundary", "boundary", Kind::choice, "coordinate", "coordinate | constant").choices = {
      "coordinate", "constant"};
  at_least(add("dirichlet", "coordinate", "boundary-coordinate", Kind::integer, "1", "1-based coordinate"), 1);
  add("dirichlet", "constant", "constant", Kind::real, "1", "constant boundary value");
  positive(add("dirichlet", "horizon", "horizon", Kind::real, "10", "give-up time"));
  positive(add("dirichlet", "dt", "dt", Kind::real, "1e-3", "time step"));
  positive(add("dirichlet", "delta_band", "delta-band", Kind::real, "1e-4", "exit localisation tolerance"));
  at_least(add("dirichlet", "max_refine", "max-refine", Kind::integer, "10", "increment halving levels"), 0);
  at_least(add("dirichlet", "threshold", "threshold", Kind::real, "0.01", "max horizon fraction"), 0);
  add("dirichlet", "probe_times", "probe-times", Kind::real_list, "0.001", "probe mode times");
  add("dirichlet", "records", "records", Kind::boolean, "false", "also write per-path exit records");
  return s;
}

/// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

double parse_real(const KeySpec& k, const std::string& raw) {
  const std::string t = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(k.qualified(), "expected a real number, got '" + raw + "'");
  return v;
}

void check_min(const KeySpec& k, double v, const std::string& raw) {
  if (!k.min) return;
  if (k.strict_min ? !(v > *k.min) : !(v >= *k.min)) {
    const std::string bound = k.strict_min ? "> " : ">= ";
    throw ConfigError(k.qualified(), "must be " + bound + format_real(*k.min) + ", got '" + raw + "'");
  }
}

std::string normalise(const KeySpec& k, const std::string& raw_in) {
  const std::string raw = unquote(raw_in);
  switch (k.kind) {
    case Kind::text:
      return raw;
    case Kind::choice:
      if (raw.empty() && k.default_value.empty()) return raw;
      for (const auto& c : k.choices)
        if (c == raw) return raw;
      {
        std::string opts;
        for (const auto& c : k.choices) opts += (opts.empty() ? "" : " | ") + c;
        throw ConfigError(k.qualified(), "expected one of " + opts + ", got '" + raw + "'");
      }
    case Kind::integer: {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError(k.qualified(), "expected an integer, got '" + raw + "'");
      if (v > std::numeric_limits<int>::max()) throw ConfigError(k.qualified(), "value too large: '" + raw + "'");
      check_min(k, static_cast<double>(v), raw);
      return std::to_string(v);
    }
    case Kind::unsigned_integer: {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError(k.qualified(), "expected a non-negative integer, got '" + raw + "'");
      return std::to_string(v);
    }
    case Kind::real: {
      const double v = parse_real(k, raw);
      check_min(k, v, raw);
      return format_real(v);
    }
    case Kind::real_list: {
      std::string out;
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (trim(item).empty() && raw.find_first_not_of(" \t") == std::string::npos) break;
        out += (out.empty() ? "" : ",") + format_real(parse_real(k, item));
      }
      return out;
    }
    case Kind::boolean:
      if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return "true";
      if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return "false";
      throw ConfigError(k.qualified(), "expected true or false, got '" + raw + "'");
  }
  return raw;
}

const KeySpec& require_key(const std::string& qualified) {
  const KeySpec* k = find_key(qualified);
  if (!k) throw std::logic_error("unknown config key " + qualified);
  return *k;
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = build_schema();
  return s;
}

const KeySpec* find_key(const std::string& qualified) {
  for (const auto& k : schema())
    if (k.qualified() == qualified) return &k;
  return nullptr;
}

const KeySpec* find_flag(const std::string& flag) {
  for (const auto& k : schema())
    if (k.flag == flag) return &k;
  return nullptr;
}

RunConfig::RunConfig() {
  for (const auto& k : schema()) values_[k.qualified()] = normalise(k, k.default_value);
}

void RunConfig::set(const std::string& qualified, const std::string& raw) {
  const KeySpec* k = find_key(qualified);
  if (!k) throw ConfigError(qualified, "unknown key");
  values_[qualified] = normalise(*k, raw);
}

const std::string& RunConfig::text(const std::string& qualified) const {
  require_key(qualified);
  return values_.at(qualified);
}

long long RunConfig::integer(const std::string& qualified) const { return std::stoll(text(qualified)); }

std::uint64_t RunConfig::unsigned_integer(const std::string& qualified) const {
  return std::stoull(text(qualified));
}

double RunConfig::real(const std::string& qualified) const { return std::stod(text(qualified)); }

std::vector<double> RunConfig::reals(const std::string& qualified) const {
  std::vector<double> out;
  std::stringstream ss(text(qualified));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

bool RunConfig::boolean(const std::string& qualified) const { return text(qualified) == "true"; }

std::string RunConfig::to_ini(bool hashed_only) const {
  std::string out;
  std::string section;
  for (const auto& k : schema()) {
    if (hashed_only && !k.hashed) continue;
    if (k.section != section) {
      out += (out.empty() ? "[" : "\n[") + k.section + "]\n";
      section = k.section;
    }
    out += k.key + " = " + values_.at(k.qualified()) + "\n";
  }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_ini(true)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void apply_tree(const boost::property_tree::ptree& tree, RunConfig& cfg) {
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      // key outside any section: accept the flag spelling
      const KeySpec* k = find_flag(name);
      if (!k) throw ConfigError(name, "unknown key");
      cfg.set(k->qualified(), node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(name + "." + key, "nested sections are not supported");
      if (!find_key(name + "." + key)) throw ConfigError(name + "." + key, "unknown key");
      cfg.set(name + "." + key, leaf.data());
    }
  }
}

}  // namespace

void load_config_text(const std::string& text, RunConfig& cfg) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  apply_tree(tree, cfg);
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load_config_text(ss.str(), cfg);
}

ParsedArgs parse_args(int argc, const char* const* argv) {
  CLI::App app{"Diffusions on strictly pseudoconvex CR manifolds", "crdiff"};
  app.set_help_flag();
  ParsedArgs result;
  std::string command;
  std::string config_path;
  bool help = false;
  app.add_option("command", command, "command to run");
  app.add_option("--config", config_path, "config file (key = value with [sections])");
  app.add_flag("--dump-config", result.dump_config, "print the effective config and exit");
  app.add_flag("-h,--help", help, "show help");

  const auto& keys = schema();
  std::vector<std::string> raw(keys.size());
  std::vector<CLI::Option*> opts(keys.size(), nullptr);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].flag == "command") continue;
    const std::string name = "--" + keys[i].flag;
    if (keys[i].kind == Kind::boolean)
      opts[i] = app.add_flag(name + "{true}", raw[i], keys[i].help)->expected(0, 1);
    else
      opts[i] = app.add_option(name, raw[i], keys[i].help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.get_name(), e.what());
  }
  if (help) {
    result.help = true;
    result.help_text = app.help();
    return result;
  }
  if (!config_path.empty()) load_config_file(config_path, result.config);
  if (!command.empty()) result.config.set("run.command", command);
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (opts[i] && opts[i]->count() > 0) result.config.set(keys[i].qualified(), raw[i]);
  if (result.config.command().empty() && !result.dump_config) throw ConfigError("command", "missing command");
  return result;
}

}  // namespace crdiff::cli
