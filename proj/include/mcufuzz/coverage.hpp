#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

namespace mcufuzz {

// Block ids are block start addresses; these sentinels live outside any
// mapped region.
constexpr uint32_t kNoBlock = 0xFFFF'FFFF;          // "no interrupt block yet"
constexpr uint32_t kStartSentinel = 0xFFFF'FFFE;    // origin of the first edge
constexpr uint32_t kIntEntrySentinel = 0xFFFF'FFFD; // shared handler-entry origin

constexpr size_t kDefaultMapSize = 65536;

inline uint32_t edge_index(uint32_t prev, uint32_t cur, size_t map_size) {
  return static_cast<uint32_t>(((prev * 2654435761u) ^ (cur * 40503u)) &
                               (map_size - 1));
}

// Edge hit counts for one execution. Counters saturate at 255. The touched
// list makes per-execution clearing and classification proportional to the
// edges actually hit.
class EdgeMap {
public:
  explicit EdgeMap(size_t size = kDefaultMapSize) : counts_(size, 0) {
    touched_.reserve(1024);
  }

  size_t size() const { return counts_.size(); }
  const std::vector<uint8_t>& counts() const { return counts_; }
  const std::vector<uint32_t>& touched() const { return touched_; }

  void add_edge(uint32_t prev, uint32_t cur) {
    const uint32_t idx = edge_index(prev, cur, counts_.size());
    if (counts_[idx] == 0) touched_.push_back(idx);
    if (counts_[idx] != 0xFF) counts_[idx]++;
  }

  void clear() {
    for (uint32_t idx : touched_) counts_[idx] = 0;
    touched_.clear();
  }

  uint64_t total_hits() const {
    uint64_t sum = 0;
    for (uint32_t idx : touched_) sum += counts_[idx];
    return sum;
  }

  bool same_hits(const EdgeMap& other) const {
    if (counts_.size() != other.counts_.size()) return false;
    if (touched_.size() != other.touched_.size()) return false;
    for (uint32_t idx : touched_)
      if (counts_[idx] != other.counts_[idx]) return false;
    return true;
  }

private:
  std::vector<uint8_t> counts_;
  std::vector<uint32_t> touched_;
};

enum class CoverageMode : uint8_t { Baseline, Fec };

// Per-execution block trackers. In Fec mode interrupt control flow is
// recorded against its own context: handler entries all share one origin,
// the handler-to-program return transition is never recorded, and the
// program context is untouched while a handler runs. Baseline keeps a
// single context and records every transition.
class CoverageContext {
public:
  explicit CoverageContext(CoverageMode mode = CoverageMode::Baseline)
      : mode_(mode) {
    reset();
  }

  void reset() {
    last_program_block_ = kStartSentinel;
    last_int_block_ = kNoBlock;
  }

  CoverageMode mode() const { return mode_; }
  uint32_t last_program_block() const { return last_program_block_; }
  uint32_t last_int_block() const { return last_int_block_; }

  void record_block(EdgeMap& map, uint32_t current_block, bool in_interrupt) {
    if (mode_ == CoverageMode::Fec) {
      if (in_interrupt) {
        map.add_edge(last_int_block_ == kNoBlock ? kIntEntrySentinel
                                                 : last_int_block_,
                     current_block);
        last_int_block_ = current_block;
      } else {
        map.add_edge(last_program_block_, current_block);
        last_program_block_ = current_block;
        last_int_block_ = kNoBlock;
      }
    } else {
      map.add_edge(last_program_block_, current_block);
      last_program_block_ = current_block;
    }
  }

private:
  CoverageMode mode_;
  uint32_t last_program_block_;
  uint32_t last_int_block_;
};

// AFL-style hit-count buckets: {1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255}.
inline uint8_t bucket_bit(uint8_t count) {
  if (count == 0) return 0;
  if (count == 1) return 1 << 0;
  if (count == 2) return 1 << 1;
  if (count == 3) return 1 << 2;
  if (count < 8) return 1 << 3;
  if (count < 16) return 1 << 4;
  if (count < 32) return 1 << 5;
  if (count < 128) return 1 << 6;
  return 1 << 7;
}

enum class Classification : uint8_t { None, NewBucket, NewEdge };

// Campaign-global record of which buckets have been seen per edge index.
class VirginMap {
public:
  explicit VirginMap(size_t size = kDefaultMapSize) : seen_(size, 0) {}

  size_t size() const { return seen_.size(); }

  // Classifies one execution's map against the campaign history and folds
  // it in. NewEdge wins over NewBucket.
  Classification classify(const EdgeMap& map) {
    Classification result = Classification::None;
    for (uint32_t idx : map.touched()) {
      const uint8_t bit = bucket_bit(map.counts()[idx]);
      const uint8_t prev = seen_[idx];
      if (prev == 0)
        result = Classification::NewEdge;
      else if ((prev & bit) == 0 && result == Classification::None)
        result = Classification::NewBucket;
      seen_[idx] |= bit;
    }
    return result;
  }

  size_t edges_seen() const {
    size_t n = 0;
    for (uint8_t b : seen_) n += b != 0;
    return n;
  }

  const std::vector<uint8_t>& bytes() const { return seen_; }

private:
  std::vector<uint8_t> seen_;
};

}  // namespace mcufuzz
