#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcufuzz/isa.hpp"

namespace mcufuzz {

struct MemoryMap {
  uint32_t flash_base = 0x0000'0000;
  uint32_t flash_size = 64 * 1024;
  uint32_t ram_base = 0x2000'0000;
  uint32_t ram_size = 16 * 1024;
  // Peripheral window, matching the Cortex-M convention.
  static constexpr uint32_t kMmioBase = 0x4000'0000;
  static constexpr uint32_t kMmioLimit = 0x5FFF'FFFF;
  // Flash is read+execute unless relaxed.
  bool flash_writable = false;
  // One MMIO word routed to the interrupt controller instead of the
  // fuzz input stream.
  uint32_t irq_enable_addr = 0x4000'F000;
};

constexpr unsigned kNumVectors = 32;
constexpr uint32_t kVectorTableBytes = kNumVectors * 4;

enum class FaultKind : uint8_t { Unmapped, Permission, IllegalInstr };

struct StepOutcome {
  enum class Kind : uint8_t {
    Continue,
    BlockBoundary,  // control transfer executed; `addr` = pc of next block
    Sleep,
    SelfJump,
    MemFault,   // `addr` + `fault`
    MmioRead,   // completed via the bus unless the bus reported exhaustion
    MmioWrite,
  };
  Kind kind = Kind::Continue;
  uint32_t addr = 0;
  uint32_t value = 0;
  uint8_t width = 0;
  FaultKind fault = FaultKind::Unmapped;
  bool store_fault = false;  // fault raised by a store, not a fetch or load
};

struct VmState {
  std::array<uint32_t, kNumGprs> gpr{};
  uint32_t pc = 0;
  bool flag_eq = false;
  bool flag_lt = false;
  bool in_interrupt = false;
  uint32_t saved_pc = 0;
  bool saved_eq = false;
  bool saved_lt = false;
  bool sleeping = false;
  bool faulted = false;
  uint64_t instr_count = 0;
  std::vector<uint8_t> ram;
  // Shared, immutable image. When the map allows flash writes, a private
  // mutable copy is used instead so snapshots stay cheap in the common case.
  std::shared_ptr<const std::vector<uint8_t>> flash;
  std::vector<uint8_t> flash_rw;
  std::array<uint32_t, kNumVectors> vectors{};
  MemoryMap map;

  const uint8_t* flash_data() const {
    return map.flash_writable ? flash_rw.data() : flash->data();
  }
  uint32_t flash_len() const {
    return static_cast<uint32_t>(map.flash_writable ? flash_rw.size()
                                                    : flash->size());
  }
};

// Bus concept used by step(): read() returns nullopt when the fuzz input
// stream is exhausted, in which case the instruction does not complete.
struct NullBus {
  std::optional<uint32_t> read(uint32_t, unsigned) { return 0; }
  void write(uint32_t, unsigned, uint32_t) {}
};

inline VmState load_image(std::span<const uint8_t> flash_bytes,
                          const MemoryMap& map) {
  if (flash_bytes.size() > map.flash_size)
    throw std::runtime_error("image larger than flash region");
  if (flash_bytes.size() < kVectorTableBytes)
    throw std::runtime_error("image too small for a vector table");

  VmState vm;
  vm.map = map;
  // Pad to the full region so accesses past the image end stay in bounds;
  // zero bytes decode as illegal instructions.
  std::vector<uint8_t> padded(map.flash_size, 0);
  std::memcpy(padded.data(), flash_bytes.data(), flash_bytes.size());
  if (map.flash_writable) vm.flash_rw = padded;
  vm.flash = std::make_shared<const std::vector<uint8_t>>(std::move(padded));
  vm.ram.assign(map.ram_size, 0);
  for (unsigned v = 0; v < kNumVectors; ++v) {
    uint32_t e;
    std::memcpy(&e, flash_bytes.data() + v * 4, 4);
    vm.vectors[v] = e;
  }
  const uint32_t reset = vm.vectors[0];
  if (reset < map.flash_base || reset >= map.flash_base + map.flash_size)
    throw std::runtime_error("reset vector outside flash");
  vm.pc = reset;
  return vm;
}

// Vectors with a null handler are skipped. Nested entries are a caller bug;
// the interrupt manager never fires while in_interrupt.
inline bool enter_interrupt(VmState& vm, unsigned vector) {
  const uint32_t handler = vm.vectors[vector & (kNumVectors - 1)];
  if (handler == 0) return false;
  vm.saved_pc = vm.pc;
  vm.saved_eq = vm.flag_eq;
  vm.saved_lt = vm.flag_lt;
  vm.pc = handler;
  vm.in_interrupt = true;
  vm.sleeping = false;
  return true;
}

inline void return_from_interrupt(VmState& vm) {
  vm.pc = vm.saved_pc;
  vm.flag_eq = vm.saved_eq;
  vm.flag_lt = vm.saved_lt;
  vm.in_interrupt = false;
}

namespace detail {

enum class Region : uint8_t { Flash, Ram, Mmio, None };

inline Region classify_addr(const MemoryMap& m, uint32_t addr, unsigned width) {
  // The access must lie entirely inside one region.
  if (addr >= m.flash_base && addr + width - 1 < m.flash_base + m.flash_size &&
      addr + width - 1 >= addr)
    return Region::Flash;
  if (addr >= m.ram_base && addr + width - 1 < m.ram_base + m.ram_size &&
      addr + width - 1 >= addr)
    return Region::Ram;
  if (addr >= MemoryMap::kMmioBase && addr + width - 1 <= MemoryMap::kMmioLimit &&
      addr + width - 1 >= addr)
    return Region::Mmio;
  return Region::None;
}

inline uint32_t read_le(const uint8_t* p, unsigned width) {
  uint32_t v = 0;
  for (unsigned i = 0; i < width; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

inline void write_le(uint8_t* p, unsigned width, uint32_t v) {
  for (unsigned i = 0; i < width; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

}  // namespace detail

// Executes exactly one instruction, or reports a fault / MMIO event.
// MMIO accesses are delegated to the bus and never touch RAM or flash.
// On MemFault the VM is left unmodified apart from the `faulted` flag;
// on an exhausted MMIO read the VM is left unmodified entirely.
template <class Bus>
StepOutcome step(VmState& vm, Bus& bus) {
  using Kind = StepOutcome::Kind;
  const MemoryMap& m = vm.map;

  auto fault = [&](uint32_t addr, FaultKind k) {
    vm.faulted = true;
    StepOutcome o;
    o.kind = Kind::MemFault;
    o.addr = addr;
    o.fault = k;
    return o;
  };

  // Fetch: flash is the only executable region.
  const uint32_t pc = vm.pc;
  switch (detail::classify_addr(m, pc, kInstrSize)) {
    case detail::Region::Flash:
      break;
    case detail::Region::Ram:
    case detail::Region::Mmio:
      return fault(pc, FaultKind::Permission);
    case detail::Region::None:
      return fault(pc, FaultKind::Unmapped);
  }

  const uint8_t* code = vm.flash_data() + (pc - m.flash_base);
  const auto decoded = decode(code);
  if (!decoded) return fault(pc, FaultKind::IllegalInstr);
  const Instr in = *decoded;
  const uint32_t next_pc = pc + kInstrSize;

  auto done = [&](Kind k) {
    vm.instr_count++;
    StepOutcome o;
    o.kind = k;
    o.addr = vm.pc;
    return o;
  };
  auto taken = [&](uint32_t target) {
    if (target == pc) {
      // The VM stays on the instruction; the executor decides whether
      // self-jumps terminate.
      vm.pc = target;
      vm.instr_count++;
      StepOutcome o;
      o.kind = Kind::SelfJump;
      o.addr = target;
      return o;
    }
    vm.pc = target;
    return done(Kind::BlockBoundary);
  };

  auto& r = vm.gpr;
  const uint8_t ra = in.a & 7, rb = in.b & 7, rc = in.c & 7;

  switch (in.op) {
    case Op::Nop:
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Movi:
      r[ra] = in.imm16();
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Movhi:
      r[ra] = (r[ra] & 0xFFFFu) | (static_cast<uint32_t>(in.imm16()) << 16);
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Mov:
      r[ra] = r[rb];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Add:
      r[ra] = r[rb] + r[rc];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Sub:
      r[ra] = r[rb] - r[rc];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::And:
      r[ra] = r[rb] & r[rc];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Or:
      r[ra] = r[rb] | r[rc];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Xor:
      r[ra] = r[rb] ^ r[rc];
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Shl:
      r[ra] = r[rb] << (r[rc] & 31);
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Shr:
      r[ra] = r[rb] >> (r[rc] & 31);
      vm.pc = next_pc;
      return done(Kind::Continue);
    case Op::Addi:
      r[ra] = r[rb] + static_cast<uint32_t>(static_cast<int32_t>(in.simm8()));
      vm.pc = next_pc;
      return done(Kind::Continue);

    case Op::Load8:
    case Op::Load16:
    case Op::Load32: {
      const unsigned width = in.op == Op::Load8 ? 1 : in.op == Op::Load16 ? 2 : 4;
      const uint32_t addr =
          r[rb] + static_cast<uint32_t>(static_cast<int32_t>(in.simm8()));
      switch (detail::classify_addr(m, addr, width)) {
        case detail::Region::Flash:
          r[ra] = detail::read_le(vm.flash_data() + (addr - m.flash_base), width);
          vm.pc = next_pc;
          return done(Kind::Continue);
        case detail::Region::Ram:
          r[ra] = detail::read_le(vm.ram.data() + (addr - m.ram_base), width);
          vm.pc = next_pc;
          return done(Kind::Continue);
        case detail::Region::Mmio: {
          const auto v = bus.read(addr, width);
          StepOutcome o;
          o.kind = Kind::MmioRead;
          o.addr = addr;
          o.width = static_cast<uint8_t>(width);
          if (!v) return o;  // input exhausted: instruction not executed
          r[ra] = *v;
          o.value = *v;
          vm.pc = next_pc;
          vm.instr_count++;
          return o;
        }
        case detail::Region::None:
          return fault(addr, FaultKind::Unmapped);
      }
      return fault(addr, FaultKind::Unmapped);
    }

    case Op::Store8:
    case Op::Store16:
    case Op::Store32: {
      const unsigned width = in.op == Op::Store8 ? 1 : in.op == Op::Store16 ? 2 : 4;
      const uint32_t addr =
          r[rb] + static_cast<uint32_t>(static_cast<int32_t>(in.simm8()));
      const uint32_t value = r[ra];
      auto store_fault = [&](uint32_t a, FaultKind k) {
        StepOutcome o = fault(a, k);
        o.store_fault = true;
        return o;
      };
      switch (detail::classify_addr(m, addr, width)) {
        case detail::Region::Flash:
          if (!m.flash_writable) return store_fault(addr, FaultKind::Permission);
          detail::write_le(vm.flash_rw.data() + (addr - m.flash_base), width, value);
          vm.pc = next_pc;
          return done(Kind::Continue);
        case detail::Region::Ram:
          detail::write_le(vm.ram.data() + (addr - m.ram_base), width, value);
          vm.pc = next_pc;
          return done(Kind::Continue);
        case detail::Region::Mmio: {
          bus.write(addr, width, value);
          vm.pc = next_pc;
          vm.instr_count++;
          StepOutcome o;
          o.kind = Kind::MmioWrite;
          o.addr = addr;
          o.width = static_cast<uint8_t>(width);
          o.value = value;
          return o;
        }
        case detail::Region::None:
          return store_fault(addr, FaultKind::Unmapped);
      }
      return store_fault(addr, FaultKind::Unmapped);
    }

    case Op::Cmp:
      vm.flag_eq = r[ra] == r[rb];
      vm.flag_lt = r[ra] < r[rb];
      vm.pc = next_pc;
      return done(Kind::Continue);

    case Op::Beq:
      return vm.flag_eq ? taken(next_pc + in.rel16()) : (vm.pc = next_pc, done(Kind::BlockBoundary));
    case Op::Bne:
      return !vm.flag_eq ? taken(next_pc + in.rel16()) : (vm.pc = next_pc, done(Kind::BlockBoundary));
    case Op::Blt:
      return vm.flag_lt ? taken(next_pc + in.rel16()) : (vm.pc = next_pc, done(Kind::BlockBoundary));
    case Op::Bge:
      return !vm.flag_lt ? taken(next_pc + in.rel16()) : (vm.pc = next_pc, done(Kind::BlockBoundary));
    case Op::Jmp:
      return taken(next_pc + in.rel16());
    case Op::Jmpabs:
      return taken(r[ra]);
    case Op::Call:
      r[kLinkReg] = next_pc;
      return taken(next_pc + in.rel16());
    case Op::Ret:
      return taken(r[kLinkReg]);

    case Op::Iret:
      if (!vm.in_interrupt) return fault(pc, FaultKind::IllegalInstr);
      return_from_interrupt(vm);
      return done(Kind::BlockBoundary);

    case Op::Wfi:
      vm.pc = next_pc;
      vm.sleeping = true;
      return done(Kind::Sleep);
  }
  return fault(pc, FaultKind::IllegalInstr);
}

// Completes a store whose permission fault was suppressed by configuration:
// the write is discarded and execution continues at the next instruction.
inline void skip_instruction(VmState& vm) {
  vm.faulted = false;
  vm.pc += kInstrSize;
  vm.instr_count++;
}

}  // namespace mcufuzz
