// Command-line front end: assemble firmware, run single inputs with traces,
// launch fuzzing campaigns, reproduce crashes, and run ablation experiments.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcufuzz/assembler.hpp"
#include "mcufuzz/config.hpp"
#include "mcufuzz/corpus.hpp"
#include "mcufuzz/executor.hpp"
#include "mcufuzz/fuzzer.hpp"

namespace fs = std::filesystem;
using namespace mcufuzz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCampaign = 3;

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string s = ss.str();
  return {s.begin(), s.end()};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::map<std::string, uint32_t> load_symbols(const std::string& path) {
  std::map<std::string, uint32_t> out;
  std::ifstream in(path);
  if (!in) return out;  // missing symbol file is fine for hex-only configs
  std::string name, addr;
  while (in >> name >> addr) out[name] = std::stoul(addr, nullptr, 0);
  return out;
}

std::string render_symbols(const std::map<std::string, uint32_t>& symbols) {
  std::string out;
  char line[128];
  for (const auto& [name, addr] : symbols) {
    std::snprintf(line, sizeof line, "%s 0x%04X\n", name.c_str(), addr);
    out += line;
  }
  return out;
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::InputExhausted: return "input_exhausted";
    case Outcome::Crash: return "crash";
    case Outcome::SelfJumpExit: return "self_jump_exit";
    case Outcome::BudgetExceeded: return "budget_exceeded";
  }
  return "?";
}

std::string crash_key_of(const ExecResult& res) {
  CrashReport r;
  r.kind = res.crash_kind;
  r.pc = res.crash_pc;
  r.in_interrupt = res.crash_in_interrupt;
  return r.key();
}

std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::string out = "unix_time,execs,blocks_covered,edges_covered,queue_len,crashes_unique\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.3f,%llu,%zu,%zu,%zu,%zu\n", r.time_s,
                  static_cast<unsigned long long>(r.execs), r.blocks_covered,
                  r.edges_covered, r.queue_len, r.crashes_unique);
    out += line;
  }
  return out;
}

std::string summary_text(const CampaignResult& res) {
  std::ostringstream ss;
  ss << "execs: " << res.execs << "\n"
     << "blocks_covered: " << res.blocks_covered << "\n"
     << "edges_covered: " << res.edges_covered << "\n"
     << "queue_len: " << res.queue_len << "\n"
     << "crashes_unique: " << res.crashes_unique << "\n"
     << "snapshots: " << res.snapshot_count << "\n"
     << "total_instructions: " << res.total_instructions << "\n";
  return ss.str();
}

fs::path resolve_out_dir(const std::string& cli_out, const CampaignConfig& cfg) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("MCUFUZZ_OUT"); env && *env) return env;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  return "mcufuzz-out";
}

void write_campaign_artifacts(const fs::path& dir, const CampaignConfig& cfg,
                              const CampaignResult& res) {
  fs::create_directories(dir / "queue");
  fs::create_directories(dir / "crashes");
  write_text(dir / "stats.csv", stats_csv(res.rows));
  write_text(dir / "summary.txt", summary_text(res));
  write_text(dir / "config.txt", render_config(cfg));
  write_bytes(dir / "coverage.map", res.coverage_map);
  for (size_t i = 0; i < res.queue.size(); ++i) {
    const auto& e = res.queue[i];
    const char* reason = e.reason == QueueEntry::Reason::Seed        ? "seed"
                         : e.reason == QueueEntry::Reason::NewEdge   ? "new_edge"
                                                                     : "new_bucket";
    char name[96];
    std::snprintf(name, sizeof name, "id_%06zu_%s_snap%zu.bin", i, reason,
                  e.snapshot_id);
    write_bytes(dir / "queue" / name, e.input);
  }
  for (const auto& crash : res.crashes)
    write_bytes(dir / "crashes" / (crash.key() + ".bin"), crash.input);
}

struct PrintSink {
  bool verbose = false;
  void on_block(uint32_t pc, bool in_int) {
    if (verbose) std::printf("block 0x%08X int=%d\n", pc, in_int ? 1 : 0);
  }
  void on_mmio_read(uint32_t addr, unsigned w, uint32_t v) {
    if (verbose) std::printf("mmio_read 0x%08X w=%u -> 0x%08X\n", addr, w, v);
  }
  void on_mmio_write(uint32_t addr, unsigned w, uint32_t v) {
    if (verbose) std::printf("mmio_write 0x%08X w=%u <- 0x%08X\n", addr, w, v);
  }
  void on_irq(unsigned v, uint32_t handler) {
    if (verbose) std::printf("irq %u -> 0x%08X\n", v, handler);
  }
  void on_sleep(uint32_t pc) {
    if (verbose) std::printf("sleep pc=0x%08X\n", pc);
  }
};

int cmd_assemble(const std::string& src_path, const std::string& out_path) {
  Assembled assembled;
  try {
    assembled = assemble(read_text(src_path));
  } catch (const AsmError& e) {
    std::fprintf(stderr, "%s: %s\n", src_path.c_str(), e.what());
    return kExitConfig;
  }
  write_bytes(out_path, assembled.image);
  write_text(out_path + ".sym", render_symbols(assembled.symbols));
  std::printf("%s: %zu bytes, %zu symbols -> %s\n", src_path.c_str(),
              assembled.image.size(), assembled.symbols.size(), out_path.c_str());
  return kExitOk;
}

FuzzSettings settings_from(const CampaignConfig& cfg) {
  auto image = read_bytes(cfg.image_path);
  const auto symbols = load_symbols(cfg.symbols_path);
  std::vector<uint8_t> seed_input;
  if (!cfg.seed_input_path.empty()) seed_input = read_bytes(cfg.seed_input_path);
  return to_settings(cfg, std::move(image), symbols, std::move(seed_input));
}

int cmd_run(const std::string& image_path, const std::string& input_path,
            bool trace, const std::string& config_path) {
  CampaignConfig cfg;
  if (!config_path.empty()) cfg = parse_config(read_text(config_path));
  cfg.image_path = image_path;

  const auto image = read_bytes(image_path);
  const auto input = read_bytes(input_path);

  MemoryMap map;
  map.flash_size = cfg.flash_size;
  map.ram_size = cfg.ram_size;
  map.flash_writable = cfg.flash_writable;
  map.irq_enable_addr = cfg.irq_enable_addr;

  const Snapshot boot =
      boot_snapshot(load_image(image, map), cfg.passthrough, cfg.irq_interval);
  ExecConfig exec_cfg;
  exec_cfg.pip = cfg.pip;
  exec_cfg.cov_mode = cfg.fec ? CoverageMode::Fec : CoverageMode::Baseline;
  exec_cfg.irq_interval = cfg.irq_interval;
  exec_cfg.instr_budget = cfg.instr_budget;
  exec_cfg.disable_cond3 = cfg.disable_cond3;
  exec_cfg.disable_cond4 = cfg.disable_cond4;

  ExecEnv env(cfg.map_size);
  PrintSink sink{trace};
  const ExecResult res = execute_into(env, boot, input, exec_cfg, sink);

  std::printf("outcome: %s\n", outcome_name(res.outcome).c_str());
  if (res.outcome == Outcome::Crash) {
    std::printf("crash: key=%s pc=0x%08X addr=0x%08X int=%d\n",
                crash_key_of(res).c_str(), res.crash_pc, res.crash_addr,
                res.crash_in_interrupt ? 1 : 0);
  }
  std::printf("blocks=%llu bytes=%llu instructions=%llu\n",
              static_cast<unsigned long long>(res.blocks_executed),
              static_cast<unsigned long long>(res.bytes_consumed),
              static_cast<unsigned long long>(res.instructions));
  return kExitOk;
}

int cmd_fuzz(const std::string& config_path, const std::string& cli_out) {
  const CampaignConfig cfg = parse_config(read_text(config_path));
  const FuzzSettings settings = settings_from(cfg);
  CampaignResult res;
  try {
    res = run_campaign(settings);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "campaign failed: %s\n", e.what());
    return kExitCampaign;
  }
  const fs::path out = resolve_out_dir(cli_out, cfg);
  write_campaign_artifacts(out, cfg, res);
  std::printf("campaign done: execs=%llu blocks=%zu paths=%zu crashes=%zu -> %s\n",
              static_cast<unsigned long long>(res.execs), res.blocks_covered,
              res.queue_len, res.crashes_unique, out.string().c_str());
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, unsigned trials, unsigned jobs,
               const std::string& cli_out) {
  if (trials < 3 || trials % 2 == 0)
    throw ConfigError("--trials must be an odd number >= 3");
  const CampaignConfig cfg = parse_config(read_text(config_path));
  const FuzzSettings settings = settings_from(cfg);

  AblationReport report;
  try {
    report = run_ablation(settings, trials, jobs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ablation failed: %s\n", e.what());
    return kExitCampaign;
  }

  std::printf("%-10s %14s %13s\n", "arm", "median_blocks", "median_queue");
  for (const auto& arm : report.arms)
    std::printf("%-10s %14.1f %13.1f\n", arm.name.c_str(), arm.median_blocks,
                arm.median_queue);
  std::printf("queue reduction (+PIP -> +PIP+FEC): %.1f%%\n",
              report.queue_reduction_pct);
  std::printf("medians over %u trials per arm; desk-scale samples are too "
              "small for rank tests\n", trials);

  std::string csv = "arm,trial,blocks,queue_len,crashes,execs\n";
  char line[160];
  for (const auto& arm : report.arms)
    for (size_t t = 0; t < arm.trials.size(); ++t) {
      const auto& tr = arm.trials[t];
      std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%zu,%llu\n",
                    arm.name.c_str(), t, tr.blocks, tr.queue_len, tr.crashes,
                    static_cast<unsigned long long>(tr.execs));
      csv += line;
    }
  const fs::path out = resolve_out_dir(cli_out, cfg);
  fs::create_directories(out);
  write_text(out / "ablate.csv", csv);
  return kExitOk;
}

int cmd_stats(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base / "summary.txt"))
    throw ConfigError("no campaign summary under " + dir);
  std::printf("%s", read_text((base / "summary.txt").string()).c_str());
  const auto map = read_bytes((base / "coverage.map").string());
  size_t seen = 0;
  for (uint8_t b : map) seen += b != 0;
  std::printf("coverage_map: %zu/%zu indices seen\n", seen, map.size());
  const std::string csv = read_text((base / "stats.csv").string());
  const size_t last_nl = csv.find_last_of('\n', csv.size() - 2);
  std::printf("last stats row: %s",
              csv.substr(last_nl == std::string::npos ? 0 : last_nl + 1).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage-guided fuzzer for miniature monolithic firmware"};
  app.require_subcommand(1);

  std::string src_path, out_path = "firmware.img";
  auto* cmd_asm = app.add_subcommand("assemble", "assemble a firmware source");
  cmd_asm->add_option("src", src_path, "assembly source")->required();
  cmd_asm->add_option("-o,--output", out_path, "output image path");

  std::string image_path, input_path, run_config;
  bool trace = false;
  auto* cmd_r = app.add_subcommand("run", "execute one input");
  cmd_r->add_option("image", image_path, "firmware image")->required();
  cmd_r->add_option("input", input_path, "input bytes")->required();
  cmd_r->add_flag("--trace", trace, "print per-block trace and MMIO events");
  cmd_r->add_option("--config", run_config, "campaign config for flags");

  std::string fuzz_config, fuzz_out;
  auto* cmd_f = app.add_subcommand("fuzz", "run a fuzzing campaign");
  cmd_f->add_option("config", fuzz_config, "campaign config")->required();
  cmd_f->add_option("--out", fuzz_out, "output directory");

  std::string ablate_config, ablate_out;
  unsigned trials = 5, jobs = 1;
  auto* cmd_a = app.add_subcommand("ablate", "baseline / +PIP / +PIP+FEC report");
  cmd_a->add_option("config", ablate_config, "campaign config")->required();
  cmd_a->add_option("--trials", trials, "trials per arm (odd, >= 3)");
  cmd_a->add_option("--jobs", jobs, "parallel campaigns");
  cmd_a->add_option("--out", ablate_out, "output directory");

  std::string stats_dir;
  auto* cmd_s = app.add_subcommand("stats", "summarize a campaign directory");
  cmd_s->add_option("dir", stats_dir, "campaign output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (cmd_asm->parsed()) return cmd_assemble(src_path, out_path);
    if (cmd_r->parsed()) return cmd_run(image_path, input_path, trace, run_config);
    if (cmd_f->parsed()) return cmd_fuzz(fuzz_config, fuzz_out);
    if (cmd_a->parsed()) return cmd_ablate(ablate_config, trials, jobs, ablate_out);
    if (cmd_s->parsed()) return cmd_stats(stats_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const AsmError& e) {
    std::fprintf(stderr, "assembly error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCampaign;
  }
  return kExitOk;
}
