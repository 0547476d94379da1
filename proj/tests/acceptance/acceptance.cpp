// Acceptance suite: runs every acceptance check at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// usage: acceptance [cli-binary] [source-dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcufuzz/assembler.hpp"
#include "mcufuzz/config.hpp"
#include "mcufuzz/corpus.hpp"
#include "mcufuzz/executor.hpp"
#include "mcufuzz/fuzzer.hpp"
#include "mcufuzz/mmio.hpp"
#include "mcufuzz/rng.hpp"

namespace fs = std::filesystem;
using namespace mcufuzz;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli = "tools/mcufuzz";
fs::path g_work;
int g_failures = 0;

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail = "") {
  std::printf("%s  criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) g_failures++;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0 : (v.size() % 2 ? v[v.size() / 2]
                                       : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2);
}

// ---------------------------------------------------------------------------
// 1. playback byte efficiency: 16 identical 32-bit reads from 8 bytes

void criterion_1() {
  PeripheralStore store;
  const std::vector<uint8_t> input{0xFD, 0xFF, 0xFF, 0xFF,
                                   0x78, 0x56, 0x34, 0x12};
  InputCursor cursor{input, 0};
  bool ok = true;
  for (int i = 0; i < 16; ++i) {
    const auto v = mmio_read(store, cursor, 0x4000'0000, 4, true);
    ok = ok && v && *v == 0x12345678u;
  }
  ok = ok && cursor.offset == 8;
  report(1, ok, "playback reports one value 16 times from 8 input bytes");
}

// ---------------------------------------------------------------------------
// 2. equivalence against a standalone brute-force decoder

void criterion_2() {
  // local reference decoder, independent of the production code path
  struct RefReg {
    uint32_t word = 0;
    std::vector<int> fields;
    size_t next_field = 0;
  };
  const auto started = Clock::now();
  Rng rng(0xACCE55);
  bool ok = true;
  for (int iter = 0; iter < 10'000 && ok; ++iter) {
    std::vector<uint8_t> input(rng.below(96));
    for (auto& b : input) b = rng.next_byte();
    struct Acc {
      bool write;
      uint32_t addr;
      unsigned width;
      uint32_t value;
    };
    std::vector<Acc> seq(rng.below(48) + 1);
    for (auto& a : seq) {
      a.write = rng.chance_one_in(5);
      a.addr = 0x4000'0000 + static_cast<uint32_t>(rng.below(6)) * 4 +
               static_cast<uint32_t>(rng.below(4));
      const unsigned widths[3] = {1, 2, 4};
      a.width = widths[rng.below(3)];
      a.value = rng.next_u32();
    }

    // reference pass
    std::map<uint32_t, RefReg> regs;
    std::vector<uint32_t> want;
    bool want_exhausted = false;
    size_t pos = 0;
    auto need = [&](unsigned n, uint32_t& out_v) {
      if (input.size() - pos < n) return false;
      out_v = 0;
      for (unsigned i = 0; i < n; ++i)
        out_v |= static_cast<uint32_t>(input[pos + i]) << (8 * i);
      pos += n;
      return true;
    };
    for (const auto& a : seq) {
      RefReg& reg = regs[a.addr & ~3u];
      if (a.write) {
        for (unsigned i = 0; i < a.width && (a.addr & 3u) + i < 4; ++i) {
          const unsigned sh = 8 * ((a.addr & 3u) + i);
          reg.word =
              (reg.word & ~(0xFFu << sh)) | (((a.value >> (8 * i)) & 0xFFu) << sh);
        }
        continue;
      }
      if (reg.next_field >= reg.fields.size()) {
        uint32_t control;
        if (!need(4, control)) {
          want_exhausted = true;
          break;
        }
        for (int k = 0; k < 16; ++k)
          reg.fields.push_back(static_cast<int>((control >> (2 * k)) & 3));
      }
      const int field = reg.fields[reg.next_field++];
      uint32_t value;
      const uint32_t mask =
          a.width >= 4 ? 0xFFFFFFFFu : ((1u << (8 * a.width)) - 1);
      if (field == 3) {
        value = reg.word & mask;
      } else if (!need(a.width, value)) {
        want_exhausted = true;
        break;
      }
      reg.word = value;
      want.push_back(value);
    }

    // production pass
    PeripheralStore store;
    InputCursor cursor{input, 0};
    std::vector<uint32_t> got;
    bool got_exhausted = false;
    for (const auto& a : seq) {
      if (a.write) {
        mmio_write(store, a.addr, a.width, a.value);
        continue;
      }
      const auto v = mmio_read(store, cursor, a.addr, a.width, true);
      if (!v) {
        got_exhausted = true;
        break;
      }
      got.push_back(*v);
    }

    ok = got == want && got_exhausted == want_exhausted &&
         cursor.offset == pos;
  }
  const double elapsed = seconds_since(started);
  report(2, ok && elapsed < 10.0,
         "10000 random access sequences match the reference decoder",
         "elapsed " + std::to_string(elapsed) + "s");
}

// ---------------------------------------------------------------------------
// 3. repeat rate over one million control fields

void criterion_3() {
  const auto started = Clock::now();
  Rng rng(0x9A7E);
  PeripheralStore store;
  std::vector<uint8_t> input(5 * 1'000'000 + 64);
  for (auto& b : input) b = rng.next_byte();
  InputCursor cursor{input, 0};
  uint64_t reads = 0, repeats = 0;
  while (reads < 1'000'000) {
    const bool refill = store.lookup(0x4000'0000).batch_remaining == 0;
    const size_t before = cursor.offset;
    const auto v = mmio_read(store, cursor, 0x4000'0000, 4, true);
    if (!v) break;
    reads++;
    if (cursor.offset - before == (refill ? 4u : 0u)) repeats++;
  }
  const double rate = static_cast<double>(repeats) / static_cast<double>(reads);
  const double elapsed = seconds_since(started);
  char detail[96];
  std::snprintf(detail, sizeof detail, "rate %.4f over %llu reads, %.2fs", rate,
                static_cast<unsigned long long>(reads), elapsed);
  report(3, reads == 1'000'000 && rate > 0.24 && rate < 0.26 && elapsed < 5.0,
         "repeat fields trigger on one in four reads", detail);
}

// ---------------------------------------------------------------------------
// 4. trigger-point invariance on the neutral-handler counter firmware

void criterion_4() {
  const auto started = Clock::now();
  const auto assembled = assemble(corpus::irq_counter_neutral);
  const Snapshot boot = boot_snapshot(load_image(assembled.image, MemoryMap{}),
                                      {}, 1000);
  // fixed input with a data byte mix so several loop paths run
  std::vector<uint8_t> input;
  Rng rng(0x7A17);
  for (int i = 0; i < 48; ++i) {
    const uint32_t status = rng.chance_one_in(2) ? 0x01 : 0x00;
    for (int b = 0; b < 4; ++b) input.push_back(static_cast<uint8_t>(status >> (8 * b)));
    if (status == 0x01) input.push_back(rng.next_byte());
  }

  ExecConfig base_cfg;
  base_cfg.pip = false;
  base_cfg.periodic_irq = false;
  ExecEnv env;
  const ExecResult plain = execute(env, boot, input, base_cfg);
  const uint64_t total_blocks = plain.blocks_executed;

  size_t fired = 0;
  std::set<std::vector<uint8_t>> fec_maps, baseline_maps;
  for (uint64_t trig = 1; trig <= total_blocks; ++trig) {
    for (const auto mode : {CoverageMode::Fec, CoverageMode::Baseline}) {
      ExecConfig cfg = base_cfg;
      cfg.cov_mode = mode;
      cfg.inject_at_block = trig;
      cfg.inject_vector = 1;
      const ExecResult res = execute(env, boot, input, cfg);
      if (res.blocks_executed == total_blocks) continue;  // no legal fire here
      if (mode == CoverageMode::Fec) {
        fired++;
        fec_maps.insert(env.map.counts());
      } else {
        baseline_maps.insert(env.map.counts());
      }
    }
  }
  const double elapsed = seconds_since(started);
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%zu trigger points, %zu fec map(s), %zu baseline maps, %.2fs",
                fired, fec_maps.size(), baseline_maps.size(), elapsed);
  report(4,
         fired >= 10 && fec_maps.size() == 1 && baseline_maps.size() >= 3 &&
             elapsed < 10.0,
         "every interrupt trigger point yields one identical fec map", detail);
}

// ---------------------------------------------------------------------------
// 5. return-edge exclusion on a hand-built trace

void criterion_5() {
  const uint32_t A = 0x100, B = 0x200, H1 = 0x400, H2 = 0x420;
  EdgeMap map;
  CoverageContext ctx(CoverageMode::Fec);
  ctx.record_block(map, A, false);
  ctx.record_block(map, H1, true);
  ctx.record_block(map, H2, true);
  ctx.record_block(map, B, false);
  const bool has_ab = map.counts()[edge_index(A, B, map.size())] != 0;
  const bool has_h2b = map.counts()[edge_index(H2, B, map.size())] != 0;
  const bool has_h1h2 = map.counts()[edge_index(H1, H2, map.size())] != 0;
  report(5, has_ab && has_h1h2 && !has_h2b,
         "interrupted program edge survives; the return edge is excluded");
}

// ---------------------------------------------------------------------------
// 6. queue reduction via the ablate command on irq_counter

void criterion_6() {
  const auto started = Clock::now();
  const fs::path dir = g_work / "c6";
  fs::create_directories(dir);

  const auto assembled = assemble(corpus::irq_counter);
  std::ofstream img(dir / "irq_counter.img", std::ios::binary);
  img.write(reinterpret_cast<const char*>(assembled.image.data()),
            static_cast<std::streamsize>(assembled.image.size()));
  img.close();

  write_file(dir / "campaign.cfg",
             "image = " + (dir / "irq_counter.img").string() + "\n" +
                 "irq_interval = 50\n"
                 "exec_budget = 2000000\n"
                 "seed = 1\n");
  const int rc = run_cli("ablate " + (dir / "campaign.cfg").string() +
                             " --trials 5 --jobs 2 --out " + dir.string(),
                         dir / "ablate.log");

  std::map<std::string, std::vector<double>> queues;
  std::istringstream csv(read_file(dir / "ablate.csv"));
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string arm, field;
    std::getline(row, arm, ',');
    std::getline(row, field, ',');  // trial
    std::getline(row, field, ',');  // blocks
    std::getline(row, field, ',');  // queue_len
    queues[arm].push_back(std::stod(field));
  }
  const double pip_q = median(queues["pip"]);
  const double fec_q = median(queues["pip_fec"]);
  const double elapsed = seconds_since(started);
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "median queue +PIP %.0f vs +PIP+FEC %.0f (%.1f%%), %.0fs",
                pip_q, fec_q, pip_q > 0 ? 100.0 * fec_q / pip_q : 0.0, elapsed);
  report(6,
         rc == 0 && queues["pip"].size() == 5 && queues["pip_fec"].size() == 5 &&
             pip_q > 0 && fec_q <= 0.5 * pip_q && elapsed <= 900.0,
         "fec at least halves the queue next to plain playback", detail);
}

// ---------------------------------------------------------------------------
// 7. ablation ordering and post-init reach on i2c_init and serial_reset

void criterion_7() {
  const auto started = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* name : {"i2c_init", "serial_reset"}) {
    const auto assembled = assemble(corpus::all().at(name));
    const uint32_t main_loop = assembled.symbols.at("main_loop");

    struct ArmSpec {
      const char* label;
      bool pip, fec;
      std::vector<double> blocks;
      size_t reached = 0;
    } arms[3] = {{"baseline", false, false, {}, 0},
                 {"pip", true, false, {}, 0},
                 {"pip_fec", true, true, {}, 0}};

    for (auto& arm : arms) {
      arm.blocks.resize(5);
      std::vector<size_t> reach_flags(5, 0);
      std::atomic<int> next{0};
      auto worker = [&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= 5) return;
          FuzzSettings s;
          s.image = assembled.image;
          s.pip = arm.pip;
          s.fec = arm.fec;
          s.exec_budget = 1'000'000;
          s.rng_seed = 1 + static_cast<uint64_t>(t);
          const CampaignResult res = run_campaign(std::move(s));
          arm.blocks[t] = static_cast<double>(res.blocks_covered);
          reach_flags[t] = res.block_set.contains(main_loop);
        }
      };
      std::thread w1(worker), w2(worker);
      w1.join();
      w2.join();
      for (size_t f : reach_flags) arm.reached += f;
    }

    const double base_med = median(arms[0].blocks);
    const double pip_med = median(arms[1].blocks);
    const double fec_med = median(arms[2].blocks);
    const bool ordered = base_med <= pip_med && pip_med <= fec_med;
    const bool reach_ok = arms[1].reached >= 4 && arms[0].reached <= 2;
    ok = ok && ordered && reach_ok;
    char part[160];
    std::snprintf(part, sizeof part,
                  "%s medians %.0f/%.0f/%.0f reach base %zu/5 pip %zu/5; ", name,
                  base_med, pip_med, fec_med, arms[0].reached, arms[1].reached);
    detail += part;
  }
  const double elapsed = seconds_since(started);
  detail += std::to_string(static_cast<int>(elapsed)) + "s";
  report(7, ok && elapsed <= 1200.0,
         "blocks ordered baseline <= +PIP <= +PIP+FEC and playback passes init",
         detail);
}

// ---------------------------------------------------------------------------
// 8. termination-condition matrix with configuration toggles

void criterion_8() {
  ExecEnv env;
  bool ok = true;

  auto boot_src = [](const char* src, MemoryMap map = {}) {
    return boot_snapshot(load_image(assemble(src).image, map), {}, 1000);
  };

  // condition 1: reading with an empty buffer ends the test case
  {
    const auto snap = boot_src(
        ".vector 0, s\ns: LI r6, 0x40001000\n LOAD32 r0, [r6]\n JMP .\n");
    ok = ok && execute(env, snap, {}, ExecConfig{}).outcome ==
                   Outcome::InputExhausted;
  }
  // condition 2: unmapped access crashes
  {
    const auto snap = boot_src(
        ".vector 0, s\ns: LI r6, 0x90000000\n LOAD32 r0, [r6]\n JMP .\n");
    const auto res = execute(env, snap, {}, ExecConfig{});
    ok = ok && res.outcome == Outcome::Crash &&
         res.crash_kind == FaultKind::Unmapped;
  }
  // condition 3: flash write crashes; the toggle and the permission
  // relaxation each keep it running
  {
    const char* src =
        ".vector 0, s\n"
        "s: MOVI r0, 0x40\n MOVI r1, 0x7A\n STORE32 r1, [r0]\n"
        " LOAD32 r2, [r0]\n JMP .\n";
    const auto snap = boot_src(src);
    const auto res = execute(env, snap, {}, ExecConfig{});
    ok = ok && res.outcome == Outcome::Crash &&
         res.crash_kind == FaultKind::Permission && res.crash_addr == 0x40;

    ExecConfig relaxed;
    relaxed.disable_cond3 = true;
    const auto res2 = execute(env, snap, {}, relaxed);
    ok = ok && res2.outcome == Outcome::SelfJumpExit && env.vm.gpr[2] == 0;

    MemoryMap writable;
    writable.flash_writable = true;
    const auto wsnap = boot_src(src, writable);
    const auto res3 = execute(env, wsnap, {}, ExecConfig{});
    ok = ok && res3.outcome == Outcome::SelfJumpExit && env.vm.gpr[2] == 0x7A;
  }
  // condition 4: self jump exits; disabling it hangs until the budget
  {
    const auto snap = boot_src(".vector 0, s\ns: JMP .\n");
    ok = ok &&
         execute(env, snap, {}, ExecConfig{}).outcome == Outcome::SelfJumpExit;
    ExecConfig no4;
    no4.disable_cond4 = true;
    no4.instr_budget = 20'000;
    const auto res = execute(env, snap, {}, no4);
    ok = ok && res.outcome == Outcome::BudgetExceeded &&
         res.instructions >= 20'000;
  }
  report(8, ok, "the four termination conditions and their toggles behave");
}

// ---------------------------------------------------------------------------
// 9. sleep-wake interrupts

void criterion_9() {
  struct Sink {
    std::vector<std::pair<uint32_t, bool>> blocks;
    std::vector<size_t> sleep_pos;
    void on_block(uint32_t pc, bool in_int) { blocks.push_back({pc, in_int}); }
    void on_mmio_read(uint32_t, unsigned, uint32_t) {}
    void on_mmio_write(uint32_t, unsigned, uint32_t) {}
    void on_irq(unsigned, uint32_t) {}
    void on_sleep(uint32_t) { sleep_pos.push_back(blocks.size()); }
  };

  const auto assembled = assemble(corpus::sleepy);
  const uint32_t tick = assembled.symbols.at("tick");
  const Snapshot snap =
      boot_snapshot(load_image(assembled.image, MemoryMap{}), {}, 1000);
  ExecEnv env;
  Sink sink;
  execute_into(env, snap, {}, ExecConfig{}, sink);
  bool ok = sink.sleep_pos.size() == 8;
  for (size_t pos : sink.sleep_pos)
    ok = ok && pos < sink.blocks.size() && sink.blocks[pos].first == tick &&
         sink.blocks[pos].second;

  const auto dead =
      boot_snapshot(load_image(assemble(corpus::sleepy_dead).image, MemoryMap{}),
                    {}, 1000);
  const auto res = execute(env, dead, {}, ExecConfig{});
  ok = ok && res.outcome == Outcome::BudgetExceeded && res.instructions < 10;

  report(9, ok, "a handler runs within one block of each wfi; no vector hangs");
}

// ---------------------------------------------------------------------------
// 10. seeded bug discovery through the command line, with replay

void criterion_10() {
  const auto started = Clock::now();
  const fs::path dir = g_work / "c10";
  fs::create_directories(dir);

  const auto assembled = assemble(corpus::overflow_bug);
  {
    std::ofstream img(dir / "overflow_bug.img", std::ios::binary);
    img.write(reinterpret_cast<const char*>(assembled.image.data()),
              static_cast<std::streamsize>(assembled.image.size()));
  }
  const fs::path cfg = dir / "campaign.cfg";
  write_file(cfg, "image = " + (dir / "overflow_bug.img").string() + "\n" +
                      "pip = on\nfec = on\nexec_budget = 3000000\nseed = 1\n");

  const int rc =
      run_cli("fuzz " + cfg.string() + " --out " + (dir / "out").string(),
              dir / "fuzz.log");

  const uint32_t parse_lo = assembled.symbols.at("parse");
  const uint32_t parse_hi = assembled.symbols.at("short_msg");
  std::string crash_name;
  uint32_t crash_pc = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out" / "crashes")) {
    const std::string name = entry.path().filename().string();
    const size_t at = name.find("_pc");
    if (at == std::string::npos) continue;
    const uint32_t pc =
        static_cast<uint32_t>(std::stoul(name.substr(at + 3, 8), nullptr, 16));
    if (pc >= parse_lo && pc < parse_hi) {
      crash_name = name;
      crash_pc = pc;
      break;
    }
  }

  bool replay_ok = false;
  if (!crash_name.empty()) {
    const fs::path crash_file = dir / "out" / "crashes" / crash_name;
    run_cli("run " + (dir / "overflow_bug.img").string() + " " +
                crash_file.string() + " --config " + cfg.string(),
            dir / "replay.log");
    const std::string log = read_file(dir / "replay.log");
    const std::string stem = crash_name.substr(0, crash_name.size() - 4);
    replay_ok = log.find("key=" + stem) != std::string::npos;
  }

  const double elapsed = seconds_since(started);
  char detail[160];
  std::snprintf(detail, sizeof detail, "crash %s pc=0x%X replay=%d, %.0fs",
                crash_name.empty() ? "(none)" : crash_name.c_str(), crash_pc,
                replay_ok ? 1 : 0, elapsed);
  report(10,
         rc == 0 && !crash_name.empty() && replay_ok && elapsed <= 600.0,
         "a campaign finds the parser overflow and the crash replays", detail);
}

// ---------------------------------------------------------------------------
// 11. end-to-end determinism of campaign statistics

void criterion_11() {
  const fs::path dir = g_work / "c11";
  fs::create_directories(dir);
  const auto assembled = assemble(corpus::irq_counter);
  {
    std::ofstream img(dir / "irq_counter.img", std::ios::binary);
    img.write(reinterpret_cast<const char*>(assembled.image.data()),
              static_cast<std::streamsize>(assembled.image.size()));
  }
  const fs::path cfg = dir / "campaign.cfg";
  write_file(cfg, "image = " + (dir / "irq_counter.img").string() + "\n" +
                      "irq_interval = 50\nexec_budget = 150000\nseed = 42\n");
  const int rc1 = run_cli("fuzz " + cfg.string() + " --out " +
                              (dir / "a").string(),
                          dir / "a.log");
  const int rc2 = run_cli("fuzz " + cfg.string() + " --out " +
                              (dir / "b").string(),
                          dir / "b.log");
  const std::string csv_a = read_file(dir / "a" / "stats.csv");
  const std::string csv_b = read_file(dir / "b" / "stats.csv");
  const std::string map_a = read_file(dir / "a" / "coverage.map");
  const std::string map_b = read_file(dir / "b" / "coverage.map");
  report(11,
         rc1 == 0 && rc2 == 0 && !csv_a.empty() && csv_a == csv_b &&
             map_a == map_b,
         "two identically seeded campaigns emit byte-identical statistics");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  g_work = fs::temp_directory_path() / "mcufuzz-acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();

  if (g_failures == 0) {
    std::printf("all 11 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
