#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mcufuzz/coverage.hpp"
#include "mcufuzz/executor.hpp"
#include "mcufuzz/mutator.hpp"
#include "mcufuzz/rng.hpp"
#include "mcufuzz/snapshot.hpp"

namespace mcufuzz {

struct FuzzSettings {
  std::vector<uint8_t> image;
  MemoryMap map;
  bool pip = true;
  bool fec = true;
  uint64_t irq_interval = 1000;
  uint64_t instr_budget = 5'000'000;
  uint64_t exec_budget = 0;    // 0 = no execution limit
  double wall_budget_s = 0;    // 0 = no wall-clock limit
  std::vector<uint32_t> snapshot_pcs;
  std::vector<uint32_t> passthrough;
  uint64_t rng_seed = 1;
  bool disable_cond3 = false;
  bool disable_cond4 = false;
  size_t map_size = kDefaultMapSize;
  size_t max_input = 1024;
  uint64_t stats_every = 10'000;
  size_t seed_len = 512;
  std::vector<uint8_t> seed_input;  // empty: seed_len random bytes

  ExecConfig exec_config() const {
    ExecConfig cfg;
    cfg.pip = pip;
    cfg.cov_mode = fec ? CoverageMode::Fec : CoverageMode::Baseline;
    cfg.irq_interval = irq_interval;
    cfg.instr_budget = instr_budget;
    cfg.disable_cond3 = disable_cond3;
    cfg.disable_cond4 = disable_cond4;
    return cfg;
  }
};

struct QueueEntry {
  std::vector<uint8_t> input;
  size_t snapshot_id = 0;
  enum class Reason : uint8_t { Seed, NewEdge, NewBucket } reason = Reason::Seed;
  uint64_t exec_count = 0;
  bool favored = false;
  bool det_done = false;
  mutate::DetState det;
  // bytes actually consumed when admitted; positions past this are never
  // read, so deterministic stages skip them
  size_t det_limit = 0;
  std::vector<uint32_t> edges;  // map indices this entry touched when admitted
};

struct CrashReport {
  FaultKind kind = FaultKind::Unmapped;
  uint32_t pc = 0;
  bool in_interrupt = false;
  std::vector<uint8_t> input;
  size_t snapshot_id = 0;

  std::string key() const {
    const char* k = kind == FaultKind::Unmapped     ? "unmapped"
                    : kind == FaultKind::Permission ? "permission"
                                                    : "illegal";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_pc%08x_int%d", k, pc, in_interrupt ? 1 : 0);
    return buf;
  }
};

struct StatsRow {
  double time_s = 0;  // virtual clock derived from executed instructions
  uint64_t execs = 0;
  size_t blocks_covered = 0;
  size_t edges_covered = 0;
  size_t queue_len = 0;
  size_t crashes_unique = 0;
};

struct CampaignResult {
  std::vector<StatsRow> rows;
  uint64_t execs = 0;
  uint64_t total_instructions = 0;
  size_t blocks_covered = 0;
  size_t edges_covered = 0;
  size_t queue_len = 0;
  size_t crashes_unique = 0;
  size_t snapshot_count = 0;
  size_t nondeterministic_dropped = 0;
  std::vector<QueueEntry> queue;
  std::vector<CrashReport> crashes;
  BlockSet block_set;
  std::vector<uint8_t> coverage_map;  // campaign bucketed-seen map
};

// Runs the seed once from boot, capturing a snapshot the first time each
// listed pc starts a block. Unreached pcs yield no snapshot; the boot state
// is always snapshot 0.
inline std::vector<Snapshot> calibrate_snapshots(
    const Snapshot& boot, std::span<const uint8_t> seed, const ExecConfig& cfg,
    const std::vector<uint32_t>& pcs, size_t map_size = kDefaultMapSize) {
  std::vector<Snapshot> out{boot};
  if (pcs.empty()) return out;
  ExecEnv env(map_size);
  CaptureList captures(pcs);
  execute(env, boot, seed, cfg, nullptr, &captures);
  for (auto& snap : captures.snaps)
    if (snap) out.push_back(std::move(*snap));
  return out;
}

// Coverage-guided loop: pick a snapshot uniformly at random, pick a queue
// entry bound to it (favored-first round robin), mutate, execute, classify,
// and admit inputs that found a new edge or a new hit-count bucket.
class Campaign {
public:
  explicit Campaign(FuzzSettings settings)
      : s_(std::move(settings)),
        rng_(s_.rng_seed),
        env_(s_.map_size),
        virgin_(s_.map_size),
        incumbent_(s_.map_size, -1) {}

  CampaignResult run() {
    const auto wall_start = std::chrono::steady_clock::now();
    cfg_ = s_.exec_config();

    VmState vm = load_image(s_.image, s_.map);
    block_set_.configure(s_.map);
    const Snapshot boot = boot_snapshot(std::move(vm), s_.passthrough, s_.irq_interval);

    std::vector<uint8_t> seed = s_.seed_input;
    if (seed.empty()) {
      seed.resize(s_.seed_len);
      for (auto& b : seed) b = rng_.next_byte();
    }

    snapshots_ = calibrate_snapshots(boot, seed, cfg_, s_.snapshot_pcs, s_.map_size);
    per_snap_.resize(snapshots_.size());
    cursor_.assign(snapshots_.size(), 0);
    favored_per_snap_.assign(snapshots_.size(), 0);

    for (size_t sid = 0; sid < snapshots_.size(); ++sid) {
      std::vector<uint8_t> in =
          sid == 0 ? seed
                   : std::vector<uint8_t>(seed.begin() + std::min(seed.size(),
                                              snapshots_[sid].input_offset),
                                          seed.end());
      run_input(sid, in, true);
    }

    while (!done(wall_start)) {
      const size_t sid =
          snapshots_.size() == 1 ? 0 : rng_.below(snapshots_.size());
      QueueEntry& entry = queue_[pick_entry(sid)];
      next_input(entry, buf_);
      run_input(sid, buf_, false);
    }

    emit_row(true);
    CampaignResult res;
    res.rows = std::move(rows_);
    res.execs = execs_;
    res.total_instructions = total_instr_;
    res.blocks_covered = block_set_.count();
    res.edges_covered = virgin_.edges_seen();
    res.queue_len = queue_.size();
    res.crashes_unique = crashes_.size();
    res.snapshot_count = snapshots_.size();
    res.nondeterministic_dropped = nondet_dropped_;
    res.queue = std::move(queue_);
    res.crashes = std::move(crashes_);
    res.block_set = std::move(block_set_);
    res.coverage_map = virgin_.bytes();
    return res;
  }

private:
  bool done(std::chrono::steady_clock::time_point wall_start) const {
    if (s_.exec_budget && execs_ >= s_.exec_budget) return true;
    if (s_.wall_budget_s > 0) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - wall_start;
      if (elapsed.count() >= s_.wall_budget_s) return true;
    }
    return false;
  }

  void run_input(size_t sid, const std::vector<uint8_t>& input, bool is_seed) {
    const ExecResult res = execute(env_, snapshots_[sid], input, cfg_, &block_set_);
    execs_++;
    total_instr_ += res.instructions;

    if (res.outcome == Outcome::Crash) {
      triage(res, input, sid);
    } else {
      const Classification cls = virgin_.classify(env_.map);
      if (is_seed || cls != Classification::None) {
        admit(sid, input,
              is_seed                              ? QueueEntry::Reason::Seed
              : cls == Classification::NewEdge     ? QueueEntry::Reason::NewEdge
                                                   : QueueEntry::Reason::NewBucket);
      }
    }
    if (execs_ >= next_row_) emit_row(false);
  }

  void admit(size_t sid, const std::vector<uint8_t>& input,
             QueueEntry::Reason reason) {
    // an entry must reproduce the coverage that admitted it
    const EdgeMap first = env_.map;
    const ExecResult recheck = execute(env_, snapshots_[sid], input, cfg_, &block_set_);
    execs_++;
    total_instr_ += recheck.instructions;
    if (!env_.map.same_hits(first)) {
      nondet_dropped_++;
      return;
    }

    QueueEntry entry;
    entry.input = input;
    entry.snapshot_id = sid;
    entry.reason = reason;
    entry.det_limit = recheck.bytes_consumed;
    entry.edges = first.touched();
    queue_.push_back(std::move(entry));
    per_snap_[sid].push_back(queue_.size() - 1);
    update_favored(queue_.size() - 1);
  }

  void triage(const ExecResult& res, const std::vector<uint8_t>& input,
              size_t sid) {
    const auto key = std::make_tuple(static_cast<uint8_t>(res.crash_kind),
                                     res.crash_pc, res.crash_in_interrupt);
    if (crash_keys_.count(key)) return;
    crash_keys_.emplace(key, crashes_.size());
    CrashReport report;
    report.kind = res.crash_kind;
    report.pc = res.crash_pc;
    report.in_interrupt = res.crash_in_interrupt;
    report.input = input;
    report.snapshot_id = sid;
    crashes_.push_back(std::move(report));
  }

  size_t pick_entry(size_t sid) {
    const auto& idxs = per_snap_[sid];
    size_t& cur = cursor_[sid];
    picks_++;
    // favored first; every 16th pick rotates through the rest as well
    const bool relax = (picks_ & 15) == 0;
    if (favored_per_snap_[sid] != 0 && !relax) {
      for (size_t i = 0; i < idxs.size(); ++i) {
        cur = (cur + 1) % idxs.size();
        if (queue_[idxs[cur]].favored) return idxs[cur];
      }
    }
    cur = (cur + 1) % idxs.size();
    return idxs[cur];
  }

  void next_input(QueueEntry& entry, std::vector<uint8_t>& out) {
    entry.exec_count++;
    if (!entry.det_done) {
      const size_t det_len =
          entry.det_limit ? std::min(entry.input.size(), entry.det_limit)
                          : entry.input.size();
      const std::span<const uint8_t> prefix(entry.input.data(), det_len);
      if (mutate::next_deterministic(entry.det, prefix, out)) {
        out.insert(out.end(), entry.input.begin() + det_len, entry.input.end());
        if (out.size() > s_.max_input) out.resize(s_.max_input);
        return;
      }
      entry.det_done = true;
    }
    const auto& partners = per_snap_[entry.snapshot_id];
    if (partners.size() >= 2 && rng_.chance_one_in(8)) {
      const size_t other = partners[rng_.below(partners.size())];
      out = mutate::splice(rng_, entry.input, queue_[other].input);
      if (out.size() > s_.max_input) out.resize(s_.max_input);
      return;
    }
    out = entry.input;
    mutate::havoc(rng_, out, s_.max_input);
  }

  // favored = smallest input covering some edge index
  void update_favored(size_t new_idx) {
    bool changed = false;
    const size_t new_len = queue_[new_idx].input.size();
    for (uint32_t idx : queue_[new_idx].edges) {
      const int32_t inc = incumbent_[idx];
      if (inc < 0 || queue_[inc].input.size() > new_len) {
        incumbent_[idx] = static_cast<int32_t>(new_idx);
        changed = true;
      }
    }
    if (!changed) return;
    for (auto& e : queue_) e.favored = false;
    for (int32_t inc : incumbent_)
      if (inc >= 0) queue_[inc].favored = true;
    std::fill(favored_per_snap_.begin(), favored_per_snap_.end(), 0);
    for (const auto& e : queue_)
      if (e.favored) favored_per_snap_[e.snapshot_id]++;
  }

  void emit_row(bool final_row) {
    if (!final_row && execs_ < next_row_) return;
    while (next_row_ <= execs_) next_row_ += s_.stats_every;
    if (!rows_.empty() && rows_.back().execs == execs_) return;
    StatsRow row;
    row.time_s = static_cast<double>(total_instr_) / kVirtualIps;
    row.execs = execs_;
    row.blocks_covered = block_set_.count();
    row.edges_covered = virgin_.edges_seen();
    row.queue_len = queue_.size();
    row.crashes_unique = crashes_.size();
    rows_.push_back(row);
  }

  static constexpr double kVirtualIps = 100e6;

  FuzzSettings s_;
  Rng rng_;
  ExecEnv env_;
  VirginMap virgin_;
  std::vector<int32_t> incumbent_;
  ExecConfig cfg_;
  BlockSet block_set_;
  std::vector<Snapshot> snapshots_;
  std::vector<QueueEntry> queue_;
  std::vector<std::vector<size_t>> per_snap_;
  std::vector<size_t> cursor_;
  std::vector<size_t> favored_per_snap_;
  std::vector<CrashReport> crashes_;
  std::map<std::tuple<uint8_t, uint32_t, bool>, size_t> crash_keys_;
  std::vector<StatsRow> rows_;
  std::vector<uint8_t> buf_;
  uint64_t execs_ = 0;
  uint64_t total_instr_ = 0;
  uint64_t picks_ = 0;
  uint64_t next_row_ = 0;
  size_t nondet_dropped_ = 0;
};

inline CampaignResult run_campaign(FuzzSettings settings) {
  Campaign campaign(std::move(settings));
  return campaign.run();
}

// Sequential technique introduction: Baseline, +PIP, +PIP+FEC.
struct AblationReport {
  struct Trial {
    size_t blocks = 0;
    size_t queue_len = 0;
    size_t crashes = 0;
    uint64_t execs = 0;
  };
  struct Arm {
    std::string name;
    bool pip = false;
    bool fec = false;
    std::vector<Trial> trials;
    double median_blocks = 0;
    double median_queue = 0;
  };
  std::vector<Arm> arms;
  double queue_reduction_pct = 0;  // +PIP+FEC queue vs +PIP queue
};

namespace detail {
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n == 0 ? 0 : (n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2);
}
}  // namespace detail

inline AblationReport run_ablation(const FuzzSettings& base, unsigned trials,
                                   unsigned jobs = 1) {
  AblationReport report;
  report.arms = {{"baseline", false, false, {}, 0, 0},
                 {"pip", true, false, {}, 0, 0},
                 {"pip_fec", true, true, {}, 0, 0}};
  for (auto& arm : report.arms) arm.trials.resize(trials);

  struct Task {
    size_t arm;
    unsigned trial;
  };
  std::vector<Task> tasks;
  for (size_t a = 0; a < report.arms.size(); ++a)
    for (unsigned t = 0; t < trials; ++t) tasks.push_back({a, t});

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task task = tasks[i];
      FuzzSettings s = base;
      s.pip = report.arms[task.arm].pip;
      s.fec = report.arms[task.arm].fec;
      s.rng_seed = base.rng_seed + task.trial;  // paired across arms
      const CampaignResult res = run_campaign(std::move(s));
      auto& out = report.arms[task.arm].trials[task.trial];
      out.blocks = res.blocks_covered;
      out.queue_len = res.queue_len;
      out.crashes = res.crashes_unique;
      out.execs = res.execs;
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& arm : report.arms) {
    std::vector<double> blocks, queues;
    for (const auto& t : arm.trials) {
      blocks.push_back(static_cast<double>(t.blocks));
      queues.push_back(static_cast<double>(t.queue_len));
    }
    arm.median_blocks = detail::median(blocks);
    arm.median_queue = detail::median(queues);
  }
  const double pip_q = report.arms[1].median_queue;
  const double fec_q = report.arms[2].median_queue;
  report.queue_reduction_pct = pip_q > 0 ? (1.0 - fec_q / pip_q) * 100.0 : 0.0;
  return report;
}

}  // namespace mcufuzz
