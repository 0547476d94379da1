#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace mcufuzz {

// Fixed-width 32-bit instructions: opcode byte followed by three operand
// bytes. Immediates wider than a byte are little-endian.
enum class Op : uint8_t {
  Nop = 0x01,
  Movi = 0x02,   // rd, imm16 (zero-extended, clears high half)
  Movhi = 0x03,  // rd, imm16 into bits 31..16
  Mov = 0x04,    // rd, rs
  Add = 0x05,    // rd, ra, rb
  Sub = 0x06,
  And = 0x07,
  Or = 0x08,
  Xor = 0x09,
  Shl = 0x0A,    // shift amount = rb & 31
  Shr = 0x0B,    // logical
  Addi = 0x0C,   // rd, rs, simm8
  Load8 = 0x10,  // rd, [rs + simm8]
  Load16 = 0x11,
  Load32 = 0x12,
  Store8 = 0x13,  // rv, [rb + simm8]
  Store16 = 0x14,
  Store32 = 0x15,
  Cmp = 0x18,  // ra, rb -> EQ, LT (unsigned)
  Beq = 0x19,  // rel16 from the next instruction
  Bne = 0x1A,
  Blt = 0x1B,
  Bge = 0x1C,
  Jmp = 0x1D,     // rel16
  Jmpabs = 0x1E,  // pc = gpr[r]
  Call = 0x1F,    // r7 = return address, pc += rel16
  Ret = 0x20,     // pc = gpr[7]
  Iret = 0x21,
  Wfi = 0x22,
};

constexpr unsigned kInstrSize = 4;
constexpr unsigned kNumGprs = 8;
constexpr unsigned kLinkReg = 7;

struct Instr {
  Op op = Op::Nop;
  uint8_t a = 0;  // rd / rv / ra, per opcode
  uint8_t b = 0;  // rs / rb / low immediate byte
  uint8_t c = 0;  // rb / simm8 / high immediate byte

  uint16_t imm16() const { return static_cast<uint16_t>(b | (c << 8)); }
  int16_t rel16() const { return static_cast<int16_t>(imm16()); }
  int8_t simm8() const { return static_cast<int8_t>(c); }

  std::array<uint8_t, 4> encode() const {
    return {static_cast<uint8_t>(op), a, b, c};
  }
};

inline bool is_valid_opcode(uint8_t byte) {
  switch (static_cast<Op>(byte)) {
    case Op::Nop:
    case Op::Movi:
    case Op::Movhi:
    case Op::Mov:
    case Op::Add:
    case Op::Sub:
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Shl:
    case Op::Shr:
    case Op::Addi:
    case Op::Load8:
    case Op::Load16:
    case Op::Load32:
    case Op::Store8:
    case Op::Store16:
    case Op::Store32:
    case Op::Cmp:
    case Op::Beq:
    case Op::Bne:
    case Op::Blt:
    case Op::Bge:
    case Op::Jmp:
    case Op::Jmpabs:
    case Op::Call:
    case Op::Ret:
    case Op::Iret:
    case Op::Wfi:
      return true;
  }
  return false;
}

inline std::optional<Instr> decode(const uint8_t bytes[4]) {
  if (!is_valid_opcode(bytes[0])) return std::nullopt;
  return Instr{static_cast<Op>(bytes[0]), bytes[1], bytes[2], bytes[3]};
}

inline std::string_view mnemonic(Op op) {
  switch (op) {
    case Op::Nop: return "NOP";
    case Op::Movi: return "MOVI";
    case Op::Movhi: return "MOVHI";
    case Op::Mov: return "MOV";
    case Op::Add: return "ADD";
    case Op::Sub: return "SUB";
    case Op::And: return "AND";
    case Op::Or: return "OR";
    case Op::Xor: return "XOR";
    case Op::Shl: return "SHL";
    case Op::Shr: return "SHR";
    case Op::Addi: return "ADDI";
    case Op::Load8: return "LOAD8";
    case Op::Load16: return "LOAD16";
    case Op::Load32: return "LOAD32";
    case Op::Store8: return "STORE8";
    case Op::Store16: return "STORE16";
    case Op::Store32: return "STORE32";
    case Op::Cmp: return "CMP";
    case Op::Beq: return "BEQ";
    case Op::Bne: return "BNE";
    case Op::Blt: return "BLT";
    case Op::Bge: return "BGE";
    case Op::Jmp: return "JMP";
    case Op::Jmpabs: return "JMPABS";
    case Op::Call: return "CALL";
    case Op::Ret: return "RET";
    case Op::Iret: return "IRET";
    case Op::Wfi: return "WFI";
  }
  return "?";
}

// Textual form compatible with the assembler's input syntax. `pc` is the
// address of the instruction, used to print branch targets as absolute.
inline std::string disassemble(const Instr& in, uint32_t pc) {
  auto reg = [](uint8_t r) { return "r" + std::to_string(r & 7); };
  auto hex = [](uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%X", v);
    return std::string(buf);
  };
  std::string m(mnemonic(in.op));
  switch (in.op) {
    case Op::Nop:
    case Op::Ret:
    case Op::Iret:
    case Op::Wfi:
      return m;
    case Op::Movi:
    case Op::Movhi:
      return m + " " + reg(in.a) + ", " + hex(in.imm16());
    case Op::Mov:
    case Op::Cmp:
      return m + " " + reg(in.a) + ", " + reg(in.b);
    case Op::Add:
    case Op::Sub:
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Shl:
    case Op::Shr:
      return m + " " + reg(in.a) + ", " + reg(in.b) + ", " + reg(in.c);
    case Op::Addi:
      return m + " " + reg(in.a) + ", " + reg(in.b) + ", " +
             std::to_string(in.simm8());
    case Op::Load8:
    case Op::Load16:
    case Op::Load32:
      return m + " " + reg(in.a) + ", [" + reg(in.b) + ", " +
             std::to_string(in.simm8()) + "]";
    case Op::Store8:
    case Op::Store16:
    case Op::Store32:
      return m + " " + reg(in.a) + ", [" + reg(in.b) + ", " +
             std::to_string(in.simm8()) + "]";
    case Op::Beq:
    case Op::Bne:
    case Op::Blt:
    case Op::Bge:
    case Op::Jmp:
    case Op::Call:
      return m + " " + hex(pc + kInstrSize + in.rel16());
    case Op::Jmpabs:
      return m + " " + reg(in.a);
  }
  return m;
}

}  // namespace mcufuzz
