#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcufuzz/isa.hpp"
#include "mcufuzz/vm.hpp"

namespace mcufuzz {

// Assembly syntax: one instruction per line, `label:` definitions,
// `.vector n, label`, `.word value`, `;` comments. The pseudo-instruction
// `LI rd, imm32` expands to MOVI+MOVHI. Code is placed directly after the
// 128-byte vector table.

struct AsmError : std::runtime_error {
  AsmError(unsigned line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_no(line) {}
  unsigned line_no;
};

struct Assembled {
  std::vector<uint8_t> image;
  std::map<std::string, uint32_t> symbols;
};

namespace asm_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct Line {
  unsigned no = 0;
  std::string label;
  std::string mnemonic;  // uppercase; ".VECTOR"/".WORD" for directives
  std::vector<std::string> operands;
};

inline std::vector<Line> parse_lines(std::string_view source) {
  std::vector<Line> out;
  unsigned no = 0;
  size_t pos = 0;
  while (pos <= source.size()) {
    const size_t nl = source.find('\n', pos);
    std::string_view raw = source.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
    no++;

    if (const size_t sc = raw.find(';'); sc != std::string_view::npos)
      raw = raw.substr(0, sc);
    raw = trim(raw);
    if (raw.empty()) continue;

    Line line;
    line.no = no;
    if (const size_t colon = raw.find(':'); colon != std::string_view::npos &&
                                            raw.find_first_of(" \t,[") > colon) {
      line.label = std::string(trim(raw.substr(0, colon)));
      raw = trim(raw.substr(colon + 1));
      if (line.label.empty()) throw AsmError(no, "empty label");
    }
    if (!raw.empty()) {
      const size_t sp = raw.find_first_of(" \t");
      line.mnemonic = upper(raw.substr(0, sp));
      if (sp != std::string_view::npos) {
        std::string_view rest = trim(raw.substr(sp));
        while (!rest.empty()) {
          size_t comma = rest.find(',');
          line.operands.emplace_back(
              trim(rest.substr(0, comma)));
          if (comma == std::string_view::npos) break;
          rest = trim(rest.substr(comma + 1));
        }
      }
    }
    if (!line.label.empty() || !line.mnemonic.empty()) out.push_back(std::move(line));
  }
  return out;
}

inline std::optional<uint8_t> parse_reg(std::string_view t) {
  if (t.size() == 2 && (t[0] == 'r' || t[0] == 'R') && t[1] >= '0' && t[1] <= '7')
    return static_cast<uint8_t>(t[1] - '0');
  return std::nullopt;
}

inline std::optional<int64_t> parse_int(std::string_view t) {
  if (t.empty()) return std::nullopt;
  bool neg = false;
  if (t.front() == '-') {
    neg = true;
    t.remove_prefix(1);
    if (t.empty()) return std::nullopt;
  }
  int base = 10;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    base = 16;
    t.remove_prefix(2);
  }
  int64_t v = 0;
  for (char c : t) {
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (base == 16 && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else return std::nullopt;
    v = v * base + digit;
    if (v > 0x1'0000'0000LL) return std::nullopt;
  }
  return neg ? -v : v;
}

}  // namespace asm_detail

class Assembler {
public:
  Assembled assemble(std::string_view source) {
    using namespace asm_detail;
    const auto lines = parse_lines(source);

    // Pass 1: assign addresses, collect labels and vector directives.
    labels_.clear();
    uint32_t addr = kVectorTableBytes;
    for (const auto& line : lines) {
      if (!line.label.empty()) {
        if (!labels_.emplace(line.label, addr).second)
          throw AsmError(line.no, "duplicate label '" + line.label + "'");
      }
      addr += encoded_size(line);
    }

    // Pass 2: emit.
    Assembled out;
    out.image.assign(kVectorTableBytes, 0);
    out.symbols = labels_;
    addr = kVectorTableBytes;
    std::vector<bool> vector_set(kNumVectors, false);
    for (const auto& line : lines) {
      if (line.mnemonic.empty()) continue;
      if (line.mnemonic == ".VECTOR") {
        if (line.operands.size() != 2) throw AsmError(line.no, ".vector needs index, label");
        const auto idx = parse_int(line.operands[0]);
        if (!idx || *idx < 0 || *idx >= kNumVectors)
          throw AsmError(line.no, "vector index out of range");
        if (vector_set[*idx]) throw AsmError(line.no, "duplicate vector " + std::to_string(*idx));
        vector_set[*idx] = true;
        const uint32_t target = resolve(line, line.operands[1], addr);
        for (int i = 0; i < 4; ++i)
          out.image[*idx * 4 + i] = static_cast<uint8_t>(target >> (8 * i));
        continue;
      }
      if (line.mnemonic == ".WORD") {
        if (line.operands.size() != 1) throw AsmError(line.no, ".word needs one value");
        const uint32_t v = resolve(line, line.operands[0], addr);
        for (int i = 0; i < 4; ++i) out.image.push_back(static_cast<uint8_t>(v >> (8 * i)));
        addr += 4;
        continue;
      }
      addr += emit_instr(line, addr, out.image);
    }
    return out;
  }

private:
  std::map<std::string, uint32_t> labels_;

  static uint32_t encoded_size(const asm_detail::Line& line) {
    if (line.mnemonic.empty()) return 0;
    if (line.mnemonic == ".VECTOR") return 0;
    if (line.mnemonic == ".WORD") return 4;
    if (line.mnemonic == "LI") return 2 * kInstrSize;
    return kInstrSize;
  }

  // Value of an operand: integer literal, label, or `.` for the current
  // instruction address.
  uint32_t resolve(const asm_detail::Line& line, const std::string& t,
                   uint32_t here) const {
    if (t == ".") return here;
    if (const auto v = asm_detail::parse_int(t))
      return static_cast<uint32_t>(*v);
    const auto it = labels_.find(t);
    if (it == labels_.end())
      throw AsmError(line.no, "undefined label '" + t + "'");
    return it->second;
  }

  uint8_t want_reg(const asm_detail::Line& line, const std::string& t) const {
    const auto r = asm_detail::parse_reg(t);
    if (!r) throw AsmError(line.no, "expected register, got '" + t + "'");
    return *r;
  }

  // [rb] or [rb, disp]
  std::pair<uint8_t, int8_t> want_mem(const asm_detail::Line& line,
                                      const std::vector<std::string>& ops) const {
    if (ops.size() < 2 || ops[1].front() != '[')
      throw AsmError(line.no, "expected [reg, disp] operand");
    std::string inner = ops[1].substr(1);
    std::string disp_str;
    if (ops.size() == 3) {
      disp_str = ops[2];
      if (disp_str.empty() || disp_str.back() != ']')
        throw AsmError(line.no, "missing ']'");
      disp_str.pop_back();
    } else {
      if (inner.empty() || inner.back() != ']') throw AsmError(line.no, "missing ']'");
      inner.pop_back();
    }
    inner = std::string(asm_detail::trim(inner));
    const uint8_t base = want_reg(line, inner);
    int64_t disp = 0;
    if (!disp_str.empty()) {
      const auto d = asm_detail::parse_int(std::string(asm_detail::trim(disp_str)));
      if (!d || *d < -128 || *d > 127)
        throw AsmError(line.no, "displacement out of range");
      disp = *d;
    }
    return {base, static_cast<int8_t>(disp)};
  }

  uint32_t emit_instr(const asm_detail::Line& line, uint32_t addr,
                      std::vector<uint8_t>& image) {
    const auto& ops = line.operands;
    auto need = [&](size_t n) {
      if (ops.size() != n)
        throw AsmError(line.no, line.mnemonic + " expects " + std::to_string(n) +
                                    " operand(s)");
    };
    auto put = [&](Instr in) {
      const auto bytes = in.encode();
      image.insert(image.end(), bytes.begin(), bytes.end());
    };
    auto imm16 = [&](const std::string& t) {
      const uint32_t v = resolve(line, t, addr);
      // accept 0..0xFFFF and sign-extended small negatives
      if (v > 0xFFFF && v < 0xFFFF'8000u)
        throw AsmError(line.no, "immediate out of 16-bit range");
      return static_cast<uint16_t>(v);
    };
    auto rel16 = [&](const std::string& t) {
      const uint32_t target = resolve(line, t, addr);
      const int64_t rel = static_cast<int64_t>(target) -
                          (static_cast<int64_t>(addr) + kInstrSize);
      if (rel < -0x8000 || rel > 0x7FFF)
        throw AsmError(line.no, "branch target out of range");
      return static_cast<uint16_t>(static_cast<int16_t>(rel));
    };
    auto simple_rrr = [&](Op op) {
      need(3);
      put({op, want_reg(line, ops[0]), want_reg(line, ops[1]), want_reg(line, ops[2])});
    };
    auto branch = [&](Op op) {
      need(1);
      const uint16_t r = rel16(ops[0]);
      put({op, 0, static_cast<uint8_t>(r & 0xFF), static_cast<uint8_t>(r >> 8)});
    };

    const std::string& m = line.mnemonic;
    if (m == "NOP") { need(0); put({Op::Nop, 0, 0, 0}); }
    else if (m == "MOVI" || m == "MOVHI") {
      need(2);
      const uint16_t v = imm16(ops[1]);
      put({m == "MOVI" ? Op::Movi : Op::Movhi, want_reg(line, ops[0]),
           static_cast<uint8_t>(v & 0xFF), static_cast<uint8_t>(v >> 8)});
    }
    else if (m == "LI") {
      need(2);
      const uint32_t v = resolve(line, ops[1], addr);
      const uint8_t rd = want_reg(line, ops[0]);
      put({Op::Movi, rd, static_cast<uint8_t>(v & 0xFF),
           static_cast<uint8_t>((v >> 8) & 0xFF)});
      put({Op::Movhi, rd, static_cast<uint8_t>((v >> 16) & 0xFF),
           static_cast<uint8_t>(v >> 24)});
      return 2 * kInstrSize;
    }
    else if (m == "MOV") { need(2); put({Op::Mov, want_reg(line, ops[0]), want_reg(line, ops[1]), 0}); }
    else if (m == "ADD") simple_rrr(Op::Add);
    else if (m == "SUB") simple_rrr(Op::Sub);
    else if (m == "AND") simple_rrr(Op::And);
    else if (m == "OR") simple_rrr(Op::Or);
    else if (m == "XOR") simple_rrr(Op::Xor);
    else if (m == "SHL") simple_rrr(Op::Shl);
    else if (m == "SHR") simple_rrr(Op::Shr);
    else if (m == "ADDI") {
      need(3);
      const auto v = asm_detail::parse_int(ops[2]);
      if (!v || *v < -128 || *v > 127)
        throw AsmError(line.no, "ADDI immediate out of range");
      put({Op::Addi, want_reg(line, ops[0]), want_reg(line, ops[1]),
           static_cast<uint8_t>(static_cast<int8_t>(*v))});
    }
    else if (m == "LOAD8" || m == "LOAD16" || m == "LOAD32" || m == "STORE8" ||
             m == "STORE16" || m == "STORE32") {
      const Op op = m == "LOAD8"   ? Op::Load8
                    : m == "LOAD16"  ? Op::Load16
                    : m == "LOAD32"  ? Op::Load32
                    : m == "STORE8"  ? Op::Store8
                    : m == "STORE16" ? Op::Store16
                                     : Op::Store32;
      if (ops.size() != 2 && ops.size() != 3)
        throw AsmError(line.no, m + " expects reg, [reg, disp]");
      const uint8_t rv = want_reg(line, ops[0]);
      const auto [base, disp] = want_mem(line, ops);
      put({op, rv, base, static_cast<uint8_t>(disp)});
    }
    else if (m == "CMP") { need(2); put({Op::Cmp, want_reg(line, ops[0]), want_reg(line, ops[1]), 0}); }
    else if (m == "BEQ") branch(Op::Beq);
    else if (m == "BNE") branch(Op::Bne);
    else if (m == "BLT") branch(Op::Blt);
    else if (m == "BGE") branch(Op::Bge);
    else if (m == "JMP") branch(Op::Jmp);
    else if (m == "CALL") branch(Op::Call);
    else if (m == "JMPABS") { need(1); put({Op::Jmpabs, want_reg(line, ops[0]), 0, 0}); }
    else if (m == "RET") { need(0); put({Op::Ret, 0, 0, 0}); }
    else if (m == "IRET") { need(0); put({Op::Iret, 0, 0, 0}); }
    else if (m == "WFI") { need(0); put({Op::Wfi, 0, 0, 0}); }
    else throw AsmError(line.no, "unknown mnemonic '" + m + "'");
    return kInstrSize;
  }
};

inline Assembled assemble(std::string_view source) {
  Assembler as;
  return as.assemble(source);
}

}  // namespace mcufuzz
