#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "mcufuzz/rng.hpp"

namespace mcufuzz::mutate {

// Overwrite candidates; 0 and -1 matter most for playback control words.
inline constexpr int32_t kInteresting[] = {0,   -1,  1,    16,   32,    64,
                                           100, 127, 128,  255,  256,   512,
                                           1024, 4096, 32767, 65535};

namespace detail {

template <typename T>
inline T load_le(const uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
inline void store_le(uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

template <typename T>
std::vector<T> interesting_for() {
  std::vector<T> out;
  for (int32_t v : kInteresting) {
    if constexpr (sizeof(T) < 4) {
      if (v > static_cast<int32_t>(~(~0u << (8 * sizeof(T))))) continue;
    }
    const T t = static_cast<T>(v);
    bool dup = false;
    for (T seen : out) dup |= seen == t;
    if (!dup) out.push_back(t);
  }
  return out;
}

template <typename T>
const std::vector<T>& interesting() {
  static const std::vector<T> table = interesting_for<T>();
  return table;
}

}  // namespace detail

// Sequential deterministic stages, run once per queue entry. Each call
// produces the next variant of `base` into `out`; returns false when the
// stages are exhausted.
struct DetState {
  unsigned stage = 0;
  size_t pos = 0;
  unsigned sub = 0;

  void advance(size_t pos_limit, unsigned sub_limit) {
    if (++sub < sub_limit) return;
    sub = 0;
    if (++pos < pos_limit) return;
    pos = 0;
    stage++;
  }
};

// Stage order: interesting-value overwrites run first (widest first) since
// 0 and -1 land directly on playback control words; bit flips, byte flips
// and arithmetic follow.
inline bool next_deterministic(DetState& st, std::span<const uint8_t> base,
                               std::vector<uint8_t>& out) {
  const size_t n = base.size();
  auto begin = [&] { out.assign(base.begin(), base.end()); };

  for (;;) {
    switch (st.stage) {
      case 0:  // interesting values at 32/16/8 bits
      case 1:
      case 2: {
        const size_t width = st.stage == 0 ? 4 : st.stage == 1 ? 2 : 1;
        if (n < width || st.pos >= n - width + 1) {
          st = DetState{st.stage + 1, 0, 0};
          continue;
        }
        begin();
        if (width == 4) {
          const auto& vals = detail::interesting<uint32_t>();
          detail::store_le<uint32_t>(&out[st.pos], vals[st.sub]);
          st.advance(n - width + 1, static_cast<unsigned>(vals.size()));
        } else if (width == 2) {
          const auto& vals = detail::interesting<uint16_t>();
          detail::store_le<uint16_t>(&out[st.pos], vals[st.sub]);
          st.advance(n - width + 1, static_cast<unsigned>(vals.size()));
        } else {
          const auto& vals = detail::interesting<uint8_t>();
          out[st.pos] = vals[st.sub];
          st.advance(n - width + 1, static_cast<unsigned>(vals.size()));
        }
        return true;
      }
      case 3:  // single bit flips
      case 4:  // two consecutive bits
      case 5: {  // four consecutive bits
        const unsigned width = st.stage == 3 ? 1 : st.stage == 4 ? 2 : 4;
        const size_t limit = n * 8 >= width - 1 ? n * 8 - (width - 1) : 0;
        if (limit == 0 || st.pos >= limit) {
          st = DetState{st.stage + 1, 0, 0};
          continue;
        }
        begin();
        for (unsigned b = 0; b < width; ++b)
          out[(st.pos + b) >> 3] ^= 0x80u >> ((st.pos + b) & 7);
        st.advance(limit, 1);
        return true;
      }
      case 6:  // byte flips of 1, 2, 4
      case 7:
      case 8: {
        const size_t width = st.stage == 6 ? 1 : st.stage == 7 ? 2 : 4;
        if (n < width || st.pos >= n - width + 1) {
          st = DetState{st.stage + 1, 0, 0};
          continue;
        }
        begin();
        for (size_t b = 0; b < width; ++b) out[st.pos + b] ^= 0xFF;
        st.advance(n - width + 1, 1);
        return true;
      }
      case 9:  // arithmetic +-1..16 at 8/16/32 bits
      case 10:
      case 11: {
        const size_t width = st.stage == 9 ? 1 : st.stage == 10 ? 2 : 4;
        if (n < width || st.pos >= n - width + 1) {
          st = DetState{st.stage + 1, 0, 0};
          continue;
        }
        const int delta = st.sub < 16 ? static_cast<int>(st.sub) + 1
                                      : -(static_cast<int>(st.sub) - 15);
        begin();
        if (width == 1) {
          out[st.pos] = static_cast<uint8_t>(out[st.pos] + delta);
        } else if (width == 2) {
          detail::store_le<uint16_t>(
              &out[st.pos],
              static_cast<uint16_t>(detail::load_le<uint16_t>(&out[st.pos]) + delta));
        } else {
          detail::store_le<uint32_t>(
              &out[st.pos],
              static_cast<uint32_t>(detail::load_le<uint32_t>(&out[st.pos]) + delta));
        }
        st.advance(n - width + 1, 32);
        return true;
      }
      default:
        return false;
    }
  }
}

// Stacked random mutations. Grows at most to max_len.
inline void havoc(Rng& rng, std::vector<uint8_t>& buf, size_t max_len) {
  if (buf.empty()) buf.push_back(rng.next_byte());
  const unsigned ops = 1u << (1 + rng.below(6));
  for (unsigned i = 0; i < ops; ++i) {
    const size_t n = buf.size();
    switch (rng.below(12)) {
      case 0: {  // flip one bit
        const size_t bit = rng.below(n * 8);
        buf[bit >> 3] ^= 1u << (bit & 7);
        break;
      }
      case 1:
        buf[rng.below(n)] = rng.next_byte();
        break;
      case 2:
        buf[rng.below(n)] = static_cast<uint8_t>(
            detail::interesting<uint8_t>()[rng.below(detail::interesting<uint8_t>().size())]);
        break;
      case 3: {
        if (n < 2) break;
        const size_t p = rng.below(n - 1);
        detail::store_le<uint16_t>(
            &buf[p], detail::interesting<uint16_t>()[rng.below(
                         detail::interesting<uint16_t>().size())]);
        break;
      }
      case 4: {
        if (n < 4) break;
        const size_t p = rng.below(n - 3);
        detail::store_le<uint32_t>(
            &buf[p], detail::interesting<uint32_t>()[rng.below(
                         detail::interesting<uint32_t>().size())]);
        break;
      }
      case 5: {
        const size_t p = rng.below(n);
        const int delta = rng.chance_one_in(2) ? 1 + static_cast<int>(rng.below(16))
                                               : -1 - static_cast<int>(rng.below(16));
        buf[p] = static_cast<uint8_t>(buf[p] + delta);
        break;
      }
      case 6: {
        if (n < 4) break;
        const size_t p = rng.below(n - 3);
        const int delta = rng.chance_one_in(2) ? 1 + static_cast<int>(rng.below(16))
                                               : -1 - static_cast<int>(rng.below(16));
        detail::store_le<uint32_t>(
            &buf[p],
            static_cast<uint32_t>(detail::load_le<uint32_t>(&buf[p]) + delta));
        break;
      }
      case 7: {  // duplicate a block
        if (n < 2 || n >= max_len) break;
        const size_t len = 1 + rng.below(std::min<size_t>(n, max_len - n));
        const size_t src = rng.below(n - len + 1);
        const size_t dst = rng.below(n + 1);
        std::vector<uint8_t> block(buf.begin() + src, buf.begin() + src + len);
        buf.insert(buf.begin() + dst, block.begin(), block.end());
        break;
      }
      case 8: {  // delete a block
        if (n < 2) break;
        const size_t len = 1 + rng.below(n / 2);
        const size_t src = rng.below(n - len + 1);
        buf.erase(buf.begin() + src, buf.begin() + src + len);
        break;
      }
      case 9: {  // truncate the tail
        if (n < 2) break;
        buf.resize(1 + rng.below(n - 1));
        break;
      }
      case 10: {  // overwrite a block from elsewhere in the input
        if (n < 2) break;
        const size_t len = 1 + rng.below(n / 2);
        const size_t src = rng.below(n - len + 1);
        const size_t dst = rng.below(n - len + 1);
        if (src != dst) std::memmove(&buf[dst], &buf[src], len);
        break;
      }
      case 11: {  // append random bytes
        if (n >= max_len) break;
        const size_t len = 1 + rng.below(std::min<size_t>(16, max_len - n));
        for (size_t k = 0; k < len; ++k) buf.push_back(rng.next_byte());
        break;
      }
    }
    if (buf.empty()) buf.push_back(rng.next_byte());
  }
  if (buf.size() > max_len) buf.resize(max_len);
}

// Crossover: prefix of one entry, suffix of the other.
inline std::vector<uint8_t> splice(Rng& rng, std::span<const uint8_t> a,
                                   std::span<const uint8_t> b) {
  if (a.size() < 2 || b.size() < 2) {
    std::vector<uint8_t> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
  }
  const size_t cut = 1 + rng.below(std::min(a.size(), b.size()) - 1);
  std::vector<uint8_t> out(a.begin(), a.begin() + cut);
  out.insert(out.end(), b.begin() + cut, b.end());
  return out;
}

}  // namespace mcufuzz::mutate
