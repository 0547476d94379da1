#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mcufuzz {

// Two-bit field value selecting repetition of a register's previous value.
constexpr uint32_t kRepeatConst = 3;
constexpr unsigned kFieldsPerBatch = 16;

struct RegisterState {
  // Value returned on the last read or written by the firmware, whichever
  // was more recent. Unseen registers replay as 0.
  uint32_t last_value = 0;
  uint32_t batch_bits = 0;
  uint8_t batch_remaining = 0;  // two-bit fields left before a refill
};

// Fuzz test case with a consumed-byte index. Exhaustion is reported to the
// caller, never wrapped.
struct InputCursor {
  std::span<const uint8_t> bytes;
  size_t offset = 0;

  size_t remaining() const { return bytes.size() - offset; }

  const uint8_t* take(size_t n) {
    if (remaining() < n) return nullptr;
    const uint8_t* p = bytes.data() + offset;
    offset += n;
    return p;
  }

  std::optional<uint32_t> take_le(unsigned width) {
    const uint8_t* p = take(width);
    if (!p) return std::nullopt;
    uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
  }
};

// Registers encountered in the current test case, keyed by word-aligned
// address. Reset between executions; the passthrough set is configuration
// and survives.
class PeripheralStore {
public:
  RegisterState& lookup(uint32_t word_addr) {
    for (auto& e : regs_)
      if (e.addr == word_addr) return e.reg;
    regs_.push_back({word_addr, RegisterState{}});
    return regs_.back().reg;
  }

  bool is_passthrough(uint32_t addr) const {
    const uint32_t key = addr & ~3u;
    return std::find(passthrough_.begin(), passthrough_.end(), key) !=
           passthrough_.end();
  }

  void add_passthrough(uint32_t addr) { passthrough_.push_back(addr & ~3u); }
  void clear_passthrough() { passthrough_.clear(); }

  void reset() { regs_.clear(); }

  size_t register_count() const { return regs_.size(); }

private:
  struct Entry {
    uint32_t addr;
    RegisterState reg;
  };
  std::vector<Entry> regs_;
  std::vector<uint32_t> passthrough_;
};

namespace detail {

inline uint32_t width_mask(unsigned width) {
  return width >= 4 ? 0xFFFF'FFFFu : (1u << (8 * width)) - 1;
}

// Patches bytes [offset, offset+width) of a word, clipped at the word end.
inline uint32_t patch_word(uint32_t word, unsigned offset, unsigned width,
                           uint32_t value) {
  for (unsigned i = 0; i < width && offset + i < 4; ++i) {
    const unsigned shift = 8 * (offset + i);
    word = (word & ~(0xFFu << shift)) |
           ((value >> (8 * i) & 0xFFu) << shift);
  }
  return word;
}

}  // namespace detail

// Responds to an MMIO read from the fuzz input stream. With playback
// enabled, a 32-bit control word supplies sixteen two-bit fields, consumed
// least-significant pair first; a field of 3 replays the register's last
// value, any other field consumes `width` fresh bytes. With playback
// disabled every read consumes `width` raw bytes. Returns nullopt when the
// cursor lacks bytes for the control word or the value.
inline std::optional<uint32_t> mmio_read(PeripheralStore& store,
                                         InputCursor& cursor, uint32_t addr,
                                         unsigned width, bool playback) {
  RegisterState& reg = store.lookup(addr & ~3u);

  if (store.is_passthrough(addr)) {
    const unsigned off = addr & 3u;
    return (reg.last_value >> (8 * off)) & detail::width_mask(width);
  }

  uint32_t value;
  if (playback) {
    if (reg.batch_remaining == 0) {
      const auto bits = cursor.take_le(4);
      if (!bits) return std::nullopt;
      reg.batch_bits = *bits;
      reg.batch_remaining = kFieldsPerBatch;
    }
    const uint32_t field = reg.batch_bits & 3u;
    reg.batch_bits >>= 2;
    reg.batch_remaining--;
    if (field == kRepeatConst) {
      value = reg.last_value & detail::width_mask(width);
    } else {
      const auto fresh = cursor.take_le(width);
      if (!fresh) return std::nullopt;
      value = *fresh;
    }
  } else {
    const auto fresh = cursor.take_le(width);
    if (!fresh) return std::nullopt;
    value = *fresh;
  }

  reg.last_value = value;
  return value;
}

// Records a firmware write. Sub-word writes patch the affected bytes; the
// repetition batch is untouched.
inline void mmio_write(PeripheralStore& store, uint32_t addr, unsigned width,
                       uint32_t value) {
  RegisterState& reg = store.lookup(addr & ~3u);
  reg.last_value = detail::patch_word(reg.last_value, addr & 3u, width, value);
}

}  // namespace mcufuzz
