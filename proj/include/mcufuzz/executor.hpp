#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mcufuzz/coverage.hpp"
#include "mcufuzz/interrupts.hpp"
#include "mcufuzz/mmio.hpp"
#include "mcufuzz/snapshot.hpp"
#include "mcufuzz/vm.hpp"

namespace mcufuzz {

enum class Outcome : uint8_t {
  InputExhausted,  // a peripheral read found the input buffer empty
  Crash,           // unmapped access, permission error, or illegal instruction
  SelfJumpExit,    // program termination
  BudgetExceeded,  // instruction budget hit, or an unwakeable sleep
};

struct ExecResult {
  Outcome outcome = Outcome::BudgetExceeded;
  FaultKind crash_kind = FaultKind::Unmapped;
  uint32_t crash_pc = 0;
  uint32_t crash_addr = 0;
  bool crash_in_interrupt = false;
  uint64_t blocks_executed = 0;
  uint64_t bytes_consumed = 0;
  uint64_t instructions = 0;
};

struct ExecConfig {
  bool pip = true;
  CoverageMode cov_mode = CoverageMode::Fec;
  uint64_t irq_interval = 1000;
  uint64_t instr_budget = 5'000'000;
  bool disable_cond3 = false;  // write-permission errors continue (store discarded)
  bool disable_cond4 = false;  // self-jumps keep running instead of terminating
  bool periodic_irq = true;
  // Test hook: with periodic_irq off, fires inject_vector at the boundary
  // after the Nth recorded block (1-based). 0 disables.
  uint64_t inject_at_block = 0;
  unsigned inject_vector = 1;
};

// Distinct block start addresses seen over a whole campaign.
class BlockSet {
public:
  void configure(const MemoryMap& map) {
    base_ = map.flash_base;
    bits_.assign(map.flash_size, 0);
    count_ = 0;
  }

  void insert(uint32_t pc) {
    const uint64_t off = static_cast<uint64_t>(pc) - base_;
    if (off >= bits_.size()) return;  // not a flash block; it faults next step
    if (!bits_[off]) {
      bits_[off] = 1;
      count_++;
    }
  }

  bool contains(uint32_t pc) const {
    const uint64_t off = static_cast<uint64_t>(pc) - base_;
    return off < bits_.size() && bits_[off];
  }

  size_t count() const { return count_; }

private:
  uint32_t base_ = 0;
  std::vector<uint8_t> bits_;
  size_t count_ = 0;
};

// Snapshot-capture requests for calibration runs: each pc is captured the
// first time a block starts there.
struct CaptureList {
  std::vector<uint32_t> pcs;
  std::vector<std::optional<Snapshot>> snaps;

  explicit CaptureList(std::vector<uint32_t> wanted = {}) : pcs(std::move(wanted)) {
    snaps.resize(pcs.size());
  }
  bool all_done() const {
    for (const auto& s : snaps)
      if (!s) return false;
    return true;
  }
};

struct NullSink {
  void on_block(uint32_t, bool) {}
  void on_mmio_read(uint32_t, unsigned, uint32_t) {}
  void on_mmio_write(uint32_t, unsigned, uint32_t) {}
  void on_irq(unsigned, uint32_t) {}
  void on_sleep(uint32_t) {}
};

// Reusable buffers for repeated executions.
struct ExecEnv {
  VmState vm;
  PeripheralStore store;
  IrqController irq;
  EdgeMap map;
  CoverageContext ctx;

  explicit ExecEnv(size_t map_size = kDefaultMapSize) : map(map_size) {}
};

namespace detail {

struct ExecBus {
  PeripheralStore& store;
  InputCursor& cursor;
  IrqController& irq;
  uint32_t irq_enable_word;
  bool pip;
  bool exhausted = false;

  std::optional<uint32_t> read(uint32_t addr, unsigned width) {
    if ((addr & ~3u) == irq_enable_word)
      return (irq.enable_mask >> (8 * (addr & 3u))) & width_mask(width);
    const auto v = mmio_read(store, cursor, addr, width, pip);
    if (!v) exhausted = true;
    return v;
  }

  void write(uint32_t addr, unsigned width, uint32_t value) {
    if ((addr & ~3u) == irq_enable_word) {
      irq.route_enable_write(patch_word(irq.enable_mask, addr & 3u, width, value));
      return;
    }
    mmio_write(store, addr, width, value);
  }
};

}  // namespace detail

// Runs one test case from a snapshot until one of the termination
// conditions: input exhaustion, a crash, a self-jump, or the instruction
// budget. The edge map in `env` is cleared and refilled.
template <class Sink>
ExecResult execute_into(ExecEnv& env, const Snapshot& snap,
                        std::span<const uint8_t> input, const ExecConfig& cfg,
                        Sink& sink, BlockSet* block_seen = nullptr,
                        CaptureList* captures = nullptr) {
  VmState& vm = env.vm;
  vm = snap.vm;
  env.store = snap.store;
  env.irq = snap.irq;
  env.irq.interval = cfg.irq_interval;
  env.map.clear();
  env.ctx = CoverageContext(cfg.cov_mode);

  InputCursor cursor{input, 0};
  detail::ExecBus bus{env.store, cursor, env.irq,
                      vm.map.irq_enable_addr & ~3u, cfg.pip};

  ExecResult res;
  const uint64_t start_instr = vm.instr_count;
  bool injected = false;

  auto record = [&](uint32_t pc, bool in_int) {
    env.ctx.record_block(env.map, pc, in_int);
    res.blocks_executed++;
    if (block_seen) block_seen->insert(pc);
    sink.on_block(pc, in_int);
    if (captures)
      for (size_t i = 0; i < captures->pcs.size(); ++i)
        if (captures->pcs[i] == pc && !captures->snaps[i])
          captures->snaps[i] =
              Snapshot{vm, env.store, env.irq, cursor.offset};
  };

  // Interrupt decision at a block boundary, before the target block runs.
  auto boundary = [&](uint32_t new_pc) {
    std::optional<unsigned> vec;
    if (cfg.inject_at_block && !injected && !vm.in_interrupt &&
        res.blocks_executed == cfg.inject_at_block) {
      vec = cfg.inject_vector;
      injected = true;
    } else if (cfg.periodic_irq) {
      vec = env.irq.on_block(vm.in_interrupt);
    }
    if (vec && enter_interrupt(vm, *vec)) {
      sink.on_irq(*vec, vm.pc);
      record(vm.pc, true);
    } else {
      record(new_pc, vm.in_interrupt);
    }
  };

  record(vm.pc, vm.in_interrupt);

  for (;;) {
    if (vm.sleeping) {
      const auto vec = env.irq.on_sleep(vm.in_interrupt);
      if (vec && enter_interrupt(vm, *vec)) {
        sink.on_irq(*vec, vm.pc);
        record(vm.pc, true);
        continue;
      }
      res.outcome = Outcome::BudgetExceeded;  // nothing can wake the CPU
      break;
    }
    if (vm.instr_count - start_instr >= cfg.instr_budget) {
      res.outcome = Outcome::BudgetExceeded;
      break;
    }

    const StepOutcome out = step(vm, bus);
    switch (out.kind) {
      case StepOutcome::Kind::Continue:
        break;
      case StepOutcome::Kind::Sleep:
        sink.on_sleep(vm.pc);
        break;
      case StepOutcome::Kind::BlockBoundary:
        boundary(out.addr);
        break;
      case StepOutcome::Kind::SelfJump:
        if (!cfg.disable_cond4) {
          res.outcome = Outcome::SelfJumpExit;
          goto finished;
        }
        boundary(out.addr);
        break;
      case StepOutcome::Kind::MmioRead:
        if (bus.exhausted) {
          res.outcome = Outcome::InputExhausted;
          goto finished;
        }
        sink.on_mmio_read(out.addr, out.width, out.value);
        break;
      case StepOutcome::Kind::MmioWrite:
        sink.on_mmio_write(out.addr, out.width, out.value);
        break;
      case StepOutcome::Kind::MemFault:
        if (out.fault == FaultKind::Permission && out.store_fault &&
            cfg.disable_cond3) {
          skip_instruction(vm);
          break;
        }
        res.outcome = Outcome::Crash;
        res.crash_kind = out.fault;
        res.crash_pc = vm.pc;
        res.crash_addr = out.addr;
        res.crash_in_interrupt = vm.in_interrupt;
        goto finished;
    }
  }
finished:
  res.bytes_consumed = cursor.offset;
  res.instructions = vm.instr_count - start_instr;
  return res;
}

inline ExecResult execute(ExecEnv& env, const Snapshot& snap,
                          std::span<const uint8_t> input,
                          const ExecConfig& cfg,
                          BlockSet* block_seen = nullptr,
                          CaptureList* captures = nullptr) {
  NullSink sink;
  return execute_into(env, snap, input, cfg, sink, block_seen, captures);
}

// Boot-state snapshot for a loaded image.
inline Snapshot boot_snapshot(VmState vm, const std::vector<uint32_t>& passthrough,
                              uint64_t irq_interval) {
  Snapshot snap;
  snap.vm = std::move(vm);
  for (uint32_t a : passthrough) snap.store.add_passthrough(a);
  snap.irq.interval = irq_interval;
  return snap;
}

}  // namespace mcufuzz
