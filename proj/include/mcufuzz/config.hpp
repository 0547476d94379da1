#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcufuzz/fuzzer.hpp"

namespace mcufuzz {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Campaign configuration, parsed from line-oriented `key = value` text.
// `#` and `;` start comments; hex values take a 0x prefix.
struct CampaignConfig {
  std::string image_path;
  std::string symbols_path;  // defaults to image_path + ".sym"
  std::string seed_input_path;
  std::string out_dir;
  bool pip = true;
  bool fec = true;
  uint64_t irq_interval = 1000;
  uint32_t irq_enable_addr = 0x4000'F000;
  uint64_t instr_budget = 5'000'000;
  uint64_t exec_budget = 2'000'000;
  double wall_budget_s = 0;
  std::vector<std::string> snapshots;  // symbol names or hex addresses
  std::vector<uint32_t> passthrough;
  uint64_t seed = 1;
  bool disable_cond3 = false;
  bool disable_cond4 = false;
  bool flash_writable = false;
  uint32_t flash_size = 64 * 1024;
  uint32_t ram_size = 16 * 1024;
  uint64_t map_size = kDefaultMapSize;
  uint64_t max_input = 1024;
  uint64_t stats_every = 10'000;
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline uint64_t parse_u64(std::string_view key, std::string_view v) {
  try {
    const std::string s(v);
    size_t used = 0;
    const uint64_t out = std::stoull(s, &used, 0);  // accepts 0x prefix
    if (used != s.size()) throw ConfigError("");
    return out;
  } catch (...) {
    throw ConfigError("bad numeric value for '" + std::string(key) + "': " +
                      std::string(v));
  }
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': " +
                    std::string(v));
}

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const size_t comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace config_detail

inline CampaignConfig parse_config(std::string_view text) {
  using namespace config_detail;
  CampaignConfig cfg;
  size_t pos = 0;
  unsigned line_no = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    line_no++;

    if (const size_t c = line.find_first_of("#;"); c != std::string_view::npos)
      line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));

    if (key == "image") cfg.image_path = value;
    else if (key == "symbols") cfg.symbols_path = value;
    else if (key == "seed_input") cfg.seed_input_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "pip") cfg.pip = parse_bool(key, value);
    else if (key == "fec") cfg.fec = parse_bool(key, value);
    else if (key == "irq_interval") cfg.irq_interval = parse_u64(key, value);
    else if (key == "irq_enable_addr")
      cfg.irq_enable_addr = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "instr_budget") cfg.instr_budget = parse_u64(key, value);
    else if (key == "exec_budget") cfg.exec_budget = parse_u64(key, value);
    else if (key == "wall_budget_s")
      cfg.wall_budget_s = static_cast<double>(parse_u64(key, value));
    else if (key == "snapshots") cfg.snapshots = split_list(value);
    else if (key == "passthrough") {
      for (const auto& item : split_list(value))
        cfg.passthrough.push_back(static_cast<uint32_t>(parse_u64(key, item)));
    }
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "disable_cond3") cfg.disable_cond3 = parse_bool(key, value);
    else if (key == "disable_cond4") cfg.disable_cond4 = parse_bool(key, value);
    else if (key == "flash_writable") cfg.flash_writable = parse_bool(key, value);
    else if (key == "flash_size")
      cfg.flash_size = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "ram_size")
      cfg.ram_size = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "map_size") cfg.map_size = parse_u64(key, value);
    else if (key == "max_input") cfg.max_input = parse_u64(key, value);
    else if (key == "stats_every") cfg.stats_every = parse_u64(key, value);
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
  }

  if (cfg.image_path.empty()) throw ConfigError("config missing 'image'");
  if (cfg.exec_budget == 0 && cfg.wall_budget_s == 0)
    throw ConfigError("config needs exec_budget or wall_budget_s");
  if (cfg.map_size == 0 || (cfg.map_size & (cfg.map_size - 1)))
    throw ConfigError("map_size must be a power of two");
  if (cfg.symbols_path.empty()) cfg.symbols_path = cfg.image_path + ".sym";
  return cfg;
}

// Serializes back to the file syntax; parse(render(cfg)) == cfg.
inline std::string render_config(const CampaignConfig& cfg) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  auto hex = [](uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(v));
    return std::string(buf);
  };
  kv("image", cfg.image_path);
  kv("symbols", cfg.symbols_path);
  if (!cfg.seed_input_path.empty()) kv("seed_input", cfg.seed_input_path);
  if (!cfg.out_dir.empty()) kv("out_dir", cfg.out_dir);
  kv("pip", cfg.pip ? "on" : "off");
  kv("fec", cfg.fec ? "on" : "off");
  kv("irq_interval", std::to_string(cfg.irq_interval));
  kv("irq_enable_addr", hex(cfg.irq_enable_addr));
  kv("instr_budget", std::to_string(cfg.instr_budget));
  kv("exec_budget", std::to_string(cfg.exec_budget));
  if (cfg.wall_budget_s > 0)
    kv("wall_budget_s", std::to_string(static_cast<uint64_t>(cfg.wall_budget_s)));
  if (!cfg.snapshots.empty()) {
    std::string list;
    for (const auto& s : cfg.snapshots) list += (list.empty() ? "" : ",") + s;
    kv("snapshots", list);
  }
  if (!cfg.passthrough.empty()) {
    std::string list;
    for (uint32_t a : cfg.passthrough)
      list += (list.empty() ? "" : ",") + hex(a);
    kv("passthrough", list);
  }
  kv("seed", std::to_string(cfg.seed));
  kv("disable_cond3", cfg.disable_cond3 ? "on" : "off");
  kv("disable_cond4", cfg.disable_cond4 ? "on" : "off");
  kv("flash_writable", cfg.flash_writable ? "on" : "off");
  kv("flash_size", std::to_string(cfg.flash_size));
  kv("ram_size", std::to_string(cfg.ram_size));
  kv("map_size", std::to_string(cfg.map_size));
  kv("max_input", std::to_string(cfg.max_input));
  kv("stats_every", std::to_string(cfg.stats_every));
  return out;
}

// Resolves paths and symbols into runnable settings. `symbols` may be
// empty when every snapshot entry is a hex address.
inline FuzzSettings to_settings(const CampaignConfig& cfg,
                                std::vector<uint8_t> image,
                                const std::map<std::string, uint32_t>& symbols,
                                std::vector<uint8_t> seed_input = {}) {
  FuzzSettings s;
  s.image = std::move(image);
  s.map.flash_size = cfg.flash_size;
  s.map.ram_size = cfg.ram_size;
  s.map.flash_writable = cfg.flash_writable;
  s.map.irq_enable_addr = cfg.irq_enable_addr;
  s.pip = cfg.pip;
  s.fec = cfg.fec;
  s.irq_interval = cfg.irq_interval;
  s.instr_budget = cfg.instr_budget;
  s.exec_budget = cfg.exec_budget;
  s.wall_budget_s = cfg.wall_budget_s;
  s.passthrough = cfg.passthrough;
  s.rng_seed = cfg.seed;
  s.disable_cond3 = cfg.disable_cond3;
  s.disable_cond4 = cfg.disable_cond4;
  s.map_size = cfg.map_size;
  s.max_input = cfg.max_input;
  s.stats_every = cfg.stats_every;
  s.seed_input = std::move(seed_input);
  for (const auto& name : cfg.snapshots) {
    if (name.size() > 2 && name[0] == '0' && (name[1] == 'x' || name[1] == 'X')) {
      s.snapshot_pcs.push_back(
          static_cast<uint32_t>(config_detail::parse_u64("snapshots", name)));
    } else {
      const auto it = symbols.find(name);
      if (it == symbols.end())
        throw ConfigError("snapshot symbol not found: " + name);
      s.snapshot_pcs.push_back(it->second);
    }
  }
  return s;
}

}  // namespace mcufuzz
