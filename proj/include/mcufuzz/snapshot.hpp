#pragma once

#include <cstddef>

#include "mcufuzz/interrupts.hpp"
#include "mcufuzz/mmio.hpp"
#include "mcufuzz/vm.hpp"

namespace mcufuzz {

// Captured execution state from which fuzzing runs may start. Restoring a
// snapshot and replaying identical remaining input reproduces an identical
// step sequence.
struct Snapshot {
  VmState vm;
  PeripheralStore store;
  IrqController irq;
  // Fuzz input bytes consumed before this point was reached.
  size_t input_offset = 0;
};

}  // namespace mcufuzz
