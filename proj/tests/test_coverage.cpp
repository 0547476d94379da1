#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <vector>

#include "mcufuzz/coverage.hpp"
#include "mcufuzz/rng.hpp"

using namespace mcufuzz;

namespace {

struct TraceStep {
  uint32_t block;
  bool in_interrupt;
};

// Independent interpreter of the dual-context recording rules, built on an
// explicit edge multiset instead of the hashed hit-count map.
std::map<std::pair<uint32_t, uint32_t>, unsigned> expected_edges(
    const std::vector<TraceStep>& trace, CoverageMode mode) {
  std::map<std::pair<uint32_t, uint32_t>, unsigned> edges;
  uint32_t last_prog = kStartSentinel;
  uint32_t last_int = kNoBlock;
  for (const auto& s : trace) {
    if (mode == CoverageMode::Baseline) {
      edges[{last_prog, s.block}]++;
      last_prog = s.block;
      continue;
    }
    if (s.in_interrupt) {
      edges[{last_int == kNoBlock ? kIntEntrySentinel : last_int, s.block}]++;
      last_int = s.block;
    } else {
      edges[{last_prog, s.block}]++;
      last_prog = s.block;
      last_int = kNoBlock;
    }
  }
  return edges;
}

EdgeMap record_trace(const std::vector<TraceStep>& trace, CoverageMode mode) {
  EdgeMap map;
  CoverageContext ctx(mode);
  for (const auto& s : trace) ctx.record_block(map, s.block, s.in_interrupt);
  return map;
}

EdgeMap map_from_edges(
    const std::map<std::pair<uint32_t, uint32_t>, unsigned>& edges) {
  EdgeMap map;
  for (const auto& [edge, count] : edges)
    for (unsigned i = 0; i < count; ++i) map.add_edge(edge.first, edge.second);
  return map;
}

bool has_edge(const EdgeMap& map, uint32_t a, uint32_t b) {
  return map.counts()[edge_index(a, b, map.size())] != 0;
}

}  // namespace

TEST_CASE("interrupted program flow keeps its edge and hides the trigger point") {
  const uint32_t A = 0x100, B = 0x200, H1 = 0x400, H2 = 0x420;
  const std::vector<TraceStep> trace{
      {A, false}, {H1, true}, {H2, true}, {B, false}};

  const EdgeMap fec = record_trace(trace, CoverageMode::Fec);
  CHECK(has_edge(fec, A, B));
  CHECK(has_edge(fec, kIntEntrySentinel, H1));
  CHECK(has_edge(fec, H1, H2));
  CHECK_FALSE(has_edge(fec, H2, B));
  CHECK_FALSE(has_edge(fec, A, H1));

  const EdgeMap base = record_trace(trace, CoverageMode::Baseline);
  CHECK(has_edge(base, A, H1));
  CHECK(has_edge(base, H1, H2));
  CHECK(has_edge(base, H2, B));
  CHECK_FALSE(has_edge(base, A, B));
}

TEST_CASE("without interrupts both modes produce identical maps") {
  Rng rng(0xBEEF);
  std::vector<TraceStep> trace;
  for (int i = 0; i < 200; ++i)
    trace.push_back({static_cast<uint32_t>(rng.below(16)) * 4 + 0x80, false});
  const EdgeMap fec = record_trace(trace, CoverageMode::Fec);
  const EdgeMap base = record_trace(trace, CoverageMode::Baseline);
  CHECK(fec.same_hits(base));
}

TEST_CASE("a handler fired from different program blocks yields one fec map") {
  const uint32_t H1 = 0x400, H2 = 0x420;
  const std::vector<uint32_t> prog{0x100, 0x140, 0x180, 0x1C0};

  std::set<std::vector<uint8_t>> fec_maps, base_maps;
  for (size_t trig = 0; trig < prog.size(); ++trig) {
    std::vector<TraceStep> trace;
    for (size_t i = 0; i < prog.size(); ++i) {
      trace.push_back({prog[i], false});
      if (i == trig) {
        trace.push_back({H1, true});
        trace.push_back({H2, true});
      }
    }
    fec_maps.insert(record_trace(trace, CoverageMode::Fec).counts());
    base_maps.insert(record_trace(trace, CoverageMode::Baseline).counts());
  }
  CHECK(fec_maps.size() == 1);
  CHECK(base_maps.size() >= 3);
}

TEST_CASE("recording matches the reference interpreter on random traces") {
  Rng rng(0x7EAC);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<TraceStep> trace;
    bool in_int = false;
    const size_t len = rng.below(60) + 1;
    for (size_t i = 0; i < len; ++i) {
      if (!in_int && rng.chance_one_in(5)) in_int = true;
      else if (in_int && rng.chance_one_in(3)) in_int = false;
      trace.push_back(
          {static_cast<uint32_t>(rng.below(12)) * 4 + 0x80, in_int});
    }
    for (const auto mode : {CoverageMode::Baseline, CoverageMode::Fec}) {
      const EdgeMap got = record_trace(trace, mode);
      const EdgeMap want = map_from_edges(expected_edges(trace, mode));
      REQUIRE(got.same_hits(want));
    }
  }
}

TEST_CASE("edge_index is deterministic and direction-sensitive") {
  CHECK(edge_index(0x100, 0x200, 65536) == edge_index(0x100, 0x200, 65536));
  unsigned symmetric = 0, total = 0;
  for (uint32_t a = 0x80; a < 0x80 + 64 * 4; a += 4)
    for (uint32_t b = 0x80; b < 0x80 + 64 * 4; b += 4) {
      if (a == b) continue;
      total++;
      if (edge_index(a, b, 65536) == edge_index(b, a, 65536)) symmetric++;
    }
  // collisions are possible but must be rare
  CHECK(symmetric * 100 < total);
}

TEST_CASE("all interrupt entries of one handler share an index") {
  const uint32_t H = 0x400;
  EdgeMap m1, m2;
  CoverageContext c1(CoverageMode::Fec), c2(CoverageMode::Fec);
  c1.record_block(m1, 0x100, false);
  c1.record_block(m1, H, true);
  c2.record_block(m2, 0x200, false);
  c2.record_block(m2, H, true);
  CHECK(m1.counts()[edge_index(kIntEntrySentinel, H, m1.size())] == 1);
  CHECK(m2.counts()[edge_index(kIntEntrySentinel, H, m2.size())] == 1);
}

TEST_CASE("baseline total hit count equals the number of recorded transitions") {
  Rng rng(0x515);
  std::vector<TraceStep> trace;
  for (int i = 0; i < 150; ++i)
    trace.push_back({static_cast<uint32_t>(rng.below(40)) * 4 + 0x80,
                     rng.chance_one_in(4)});
  const EdgeMap map = record_trace(trace, CoverageMode::Baseline);
  CHECK(map.total_hits() == trace.size());
}

TEST_CASE("hit counters saturate at 255") {
  EdgeMap map;
  for (int i = 0; i < 1000; ++i) map.add_edge(0x100, 0x104);
  CHECK(map.counts()[edge_index(0x100, 0x104, map.size())] == 255);
  CHECK(map.touched().size() == 1);
}

TEST_CASE("classification finds new edges, then new buckets, then nothing") {
  VirginMap virgin;

  EdgeMap first;
  first.add_edge(0x100, 0x104);
  CHECK(virgin.classify(first) == Classification::NewEdge);
  CHECK(virgin.classify(first) == Classification::None);

  // 3 hits vs 5 hits are different buckets
  EdgeMap three;
  for (int i = 0; i < 3; ++i) three.add_edge(0x100, 0x104);
  CHECK(virgin.classify(three) == Classification::NewBucket);

  EdgeMap five;
  for (int i = 0; i < 5; ++i) five.add_edge(0x100, 0x104);
  CHECK(virgin.classify(five) == Classification::NewBucket);
  CHECK(virgin.classify(five) == Classification::None);

  // 4 hits fall in the 4-7 bucket, already seen via 5
  EdgeMap four;
  for (int i = 0; i < 4; ++i) four.add_edge(0x100, 0x104);
  CHECK(virgin.classify(four) == Classification::None);

  // a new edge wins even when buckets also changed
  EdgeMap mixed;
  mixed.add_edge(0x100, 0x104);
  mixed.add_edge(0x100, 0x104);  // count 2: also a new bucket
  mixed.add_edge(0x200, 0x204);
  CHECK(virgin.classify(mixed) == Classification::NewEdge);

  CHECK(virgin.edges_seen() == 2);
}

TEST_CASE("bucket boundaries match the afl quantization") {
  CHECK(bucket_bit(0) == 0);
  CHECK(bucket_bit(1) == 1);
  CHECK(bucket_bit(2) == 2);
  CHECK(bucket_bit(3) == 4);
  for (int c = 4; c <= 7; ++c) CHECK(bucket_bit(static_cast<uint8_t>(c)) == 8);
  for (int c = 8; c <= 15; ++c) CHECK(bucket_bit(static_cast<uint8_t>(c)) == 16);
  for (int c = 16; c <= 31; ++c) CHECK(bucket_bit(static_cast<uint8_t>(c)) == 32);
  for (int c = 32; c <= 127; ++c) CHECK(bucket_bit(static_cast<uint8_t>(c)) == 64);
  for (int c = 128; c <= 255; ++c) CHECK(bucket_bit(static_cast<uint8_t>(c)) == 128);
}

TEST_CASE("edge map clear removes only touched entries") {
  EdgeMap map;
  map.add_edge(1, 2);
  map.add_edge(3, 4);
  CHECK(map.touched().size() == 2);
  map.clear();
  CHECK(map.touched().empty());
  CHECK(map.total_hits() == 0);
  for (uint8_t c : map.counts()) CHECK(c == 0);
}
