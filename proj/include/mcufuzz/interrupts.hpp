#pragma once

#include <cstdint>
#include <optional>

namespace mcufuzz {

// Fires enabled interrupt vectors round-robin every `interval` executed
// blocks, and immediately when the CPU goes to sleep. Vector 0 is the reset
// vector and never fires; delivery is suppressed while a handler runs, so
// interrupts never nest.
class IrqController {
public:
  uint32_t enable_mask = 0;
  uint64_t blocks_since_irq = 0;
  uint64_t interval = 1000;
  uint32_t rr_cursor = 0;  // last-fired vector index

  // Called once per executed block.
  std::optional<unsigned> on_block(bool in_interrupt) {
    blocks_since_irq++;
    if (blocks_since_irq < interval || in_interrupt) return std::nullopt;
    return fire();
  }

  // Called when the CPU enters sleep. Returns nothing when no vector can
  // wake it, in which case the executor terminates the test case as a hang.
  std::optional<unsigned> on_sleep(bool in_interrupt) {
    if (in_interrupt) return std::nullopt;
    return fire();
  }

  // Firmware write to the designated enable register.
  void route_enable_write(uint32_t value) { enable_mask = value; }

private:
  std::optional<unsigned> fire() {
    if ((enable_mask & ~1u) == 0) return std::nullopt;
    unsigned v = rr_cursor;
    for (unsigned i = 0; i < 32; ++i) {
      v = (v + 1) & 31;
      if (v == 0) continue;
      if (enable_mask & (1u << v)) {
        rr_cursor = v;
        blocks_since_irq = 0;
        return v;
      }
    }
    return std::nullopt;
  }
};

}  // namespace mcufuzz
