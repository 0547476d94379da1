#pragma once

#include <map>
#include <string>
#include <string_view>

namespace mcufuzz::corpus {

// Sample firmware exercising the register-usage patterns the fuzzer has to
// cope with: repeated status polling, error-flag aborts during init, status
// bits that must change over time, interrupt-driven counters, sleep, and a
// seeded message-parser bug.
//
// Register conventions: r5 = RAM base, r6 = peripheral base, r7 = link.
// Peripheral layout: status register at +0, data register at +4.

// Polls a status register once per loop iteration; any of the four error
// bits (0xF0) routes to an error handler, RX-not-empty (0x01) delivers a
// data byte.
inline constexpr std::string_view uart_poll = R"(
.vector 0, _start

_start:
  LI r6, 0x40001000       ; usart: SR +0, DR +4
  LI r5, 0x20000000
  MOVI r4, 0              ; iteration counter
main_loop:
  LOAD32 r0, [r6]         ; status
  MOVI r1, 0xF0
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BNE error_handler       ; frame/overrun/noise/parity
  MOVI r1, 0x01
  AND r1, r0, r1
  CMP r1, r2
  BEQ next                ; nothing received
  LOAD8 r3, [r6, 4]       ; read the byte
  STORE8 r3, [r5, 8]
  LOAD32 r1, [r5, 12]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 12]    ; received count
next:
  ADDI r4, r4, 1
  MOVI r1, 200
  CMP r4, r1
  BLT main_loop
  JMP halt
error_handler:
  LOAD32 r1, [r5, 16]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 16]    ; error count
  STORE32 r0, [r5, 20]    ; last bad status
  JMP next
halt:
  JMP .
)";

// Initialization performs 24 straight-line transfers, each waiting for
// tx-empty; a single error or timeout aborts the whole firmware. The wait
// succeeds only on a status with bit 0 set and no error flag (0x0E) raised.
inline constexpr std::string_view i2c_init = R"(
.vector 0, _start

_start:
  LI r6, 0x40002000       ; i2c: SR +0, DR +4
  LI r5, 0x20000000
  CALL wait_tx            ; transfer 1
  MOVI r1, 0
  CMP r0, r1
  BNE abort               ; ERROR or TIMEOUT kills the boot
  CALL wait_tx            ; transfer 2
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 3
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 4
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 5
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 6
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 7
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 8
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 9
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 10
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 11
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 12
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 13
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 14
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 15
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 16
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 17
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 18
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 19
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 20
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 21
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 22
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 23
  MOVI r1, 0
  CMP r0, r1
  BNE abort
  CALL wait_tx            ; transfer 24
  MOVI r1, 0
  CMP r0, r1
  BNE abort

main_loop:                ; reached only after a clean init
  LOAD32 r0, [r6]
  MOVI r1, 0x01
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BEQ no_data
  LOAD8 r3, [r6, 4]
  LOAD32 r1, [r5, 8]
  ADD r1, r1, r3
  STORE32 r1, [r5, 8]
no_data:
  LOAD32 r1, [r5, 12]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 12]
  MOVI r2, 64
  CMP r1, r2
  BLT main_loop
  JMP halt

; r0 <- 0 ok, 1 error, 2 timeout. Polls up to 8 times.
wait_tx:
  MOVI r2, 8
poll:
  LOAD32 r0, [r6]
  MOVI r1, 0x0E
  AND r1, r0, r1
  MOVI r3, 0
  CMP r1, r3
  BNE ret_error           ; ack failure / bus error / arbitration lost
  MOVI r1, 0x01
  AND r1, r0, r1
  CMP r1, r3
  BNE ret_ok              ; tx empty
  ADDI r2, r2, -1
  CMP r2, r3
  BNE poll
  MOVI r0, 2
  RET
ret_ok:
  MOVI r0, 0
  RET
ret_error:
  MOVI r0, 1
  RET

abort:
  JMP .
halt:
  JMP .
)";

// The reset path drains the receive buffer (requires seeing RXNE clear),
// then transmits a 12-byte banner (each byte waits for TXE). The main loop
// later needs RXNE set to consume data: the same status register must be
// able to change.
inline constexpr std::string_view serial_reset = R"(
.vector 0, _start

_start:
  LI r6, 0x40001000       ; usart: SR +0, DR +4
  LI r5, 0x20000000
drain:
  LOAD32 r0, [r6]
  MOVI r1, 0xF0
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BNE abort               ; line error while resetting
  MOVI r1, 0x01
  AND r1, r0, r1
  CMP r1, r2
  BEQ drained             ; RXNE clear: buffer is empty
  LOAD8 r3, [r6, 4]       ; discard pending byte
  JMP drain
drained:
  MOVI r4, 16             ; banner length
banner:
  MOVI r2, 8              ; poll budget per byte
txe_poll:
  LOAD32 r0, [r6, 8]      ; transmit status register
  MOVI r1, 0xF0
  AND r1, r0, r1
  MOVI r3, 0
  CMP r1, r3
  BNE abort
  MOVI r1, 0x02
  AND r1, r0, r1
  CMP r1, r3
  BNE txe_send            ; transmitter ready
  ADDI r2, r2, -1
  CMP r2, r3
  BNE txe_poll
  JMP abort               ; transmitter never came up
txe_send:
  MOVI r0, 0x2A
  STORE8 r0, [r6, 4]
  ADDI r4, r4, -1
  MOVI r3, 0
  CMP r4, r3
  BNE banner

main_loop:                ; post-reset console
  LOAD32 r0, [r6]
  MOVI r1, 0xF0
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BNE rx_error
  MOVI r1, 0x01
  AND r1, r0, r1
  CMP r1, r2
  BEQ idle                ; RXNE must now be set to make progress
  LOAD8 r3, [r6, 4]
  LOAD32 r1, [r5, 8]
  ADD r1, r1, r3
  STORE32 r1, [r5, 8]
idle:
  LOAD32 r1, [r5, 12]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 12]
  MOVI r2, 64
  CMP r1, r2
  BLT main_loop
  JMP halt
rx_error:
  LOAD32 r1, [r5, 16]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 16]
  LI r2, 0x7F00           ; fault counter persisted to a flash settings word
  STORE32 r1, [r2]
  JMP idle

abort:
  JMP .
halt:
  JMP .
)";

// Interrupt-driven counter: the handler bumps a RAM cell the main loop
// inspects every iteration. The handler preserves the registers and flags
// it touches, so only the counter couples the two contexts.
inline constexpr std::string_view irq_counter = R"(
.vector 0, _start
.vector 1, tick
.vector 2, uart_evt
.vector 3, dma_evt

_start:
  LI r6, 0x40003000       ; sensor: SR +0, DR +4
  LI r5, 0x20000000       ; [0] ticks, [4] last seen, [8] changes, [12] sum
  LI r0, 0x4000F000
  MOVI r1, 0xE            ; enable vectors 1-3
  STORE32 r1, [r0]
  MOVI r4, 0
main_loop:
  LOAD32 r0, [r5]         ; tick counter written by the handler
  LOAD32 r1, [r5, 4]
  CMP r0, r1
  BEQ unchanged
  STORE32 r0, [r5, 4]
  LOAD32 r2, [r5, 8]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 8]
unchanged:
  LOAD32 r0, [r6]         ; one status read per iteration
  MOVI r1, 0x01
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BEQ no_data
  LOAD8 r3, [r6, 4]       ; classify the byte into four bands
  MOVI r1, 0x40
  CMP r3, r1
  BLT lo_half
  MOVI r1, 0xC0
  CMP r3, r1
  BLT band_mid
  LOAD32 r2, [r5, 16]
  ADD r2, r2, r3
  STORE32 r2, [r5, 16]
  JMP parity
band_mid:
  LOAD32 r2, [r5, 20]
  ADD r2, r2, r3
  STORE32 r2, [r5, 20]
  JMP parity
lo_half:
  MOVI r1, 0x20
  CMP r3, r1
  BLT band_tiny
  LOAD32 r2, [r5, 24]
  ADD r2, r2, r3
  STORE32 r2, [r5, 24]
  JMP parity
band_tiny:
  LOAD32 r2, [r5, 12]
  ADD r2, r2, r3
  STORE32 r2, [r5, 12]
parity:
  MOVI r1, 0x01
  AND r1, r3, r1
  MOVI r2, 0
  CMP r1, r2
  BEQ no_data
  LOAD32 r2, [r5, 28]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 28]    ; odd-byte count
no_data:
  CALL mix_checksum
  JMP housekeep1
housekeep1:
  LOAD32 r2, [r5, 44]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 44]    ; iterations logged
  JMP housekeep2
housekeep2:
  ADDI r4, r4, 1
  MOVI r1, 96
  CMP r4, r1
  BLT main_loop
  JMP halt
halt:
  JMP .

; running checksum over everything seen so far
mix_checksum:
  LOAD32 r1, [r5, 40]
  SHL r2, r1, r4
  XOR r1, r1, r2
  ADD r1, r1, r3
  STORE32 r1, [r5, 40]
  RET

tick:
  STORE32 r0, [r5, 32]    ; scratch save
  LOAD32 r0, [r5]
  ADDI r0, r0, 1
  STORE32 r0, [r5]
  LOAD32 r0, [r5, 32]
  IRET

uart_evt:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5, 48]
  ADDI r0, r0, 1
  STORE32 r0, [r5, 48]    ; event counter, never read by the loop
  LOAD32 r0, [r5, 32]
  IRET

dma_evt:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5, 52]
  ADDI r0, r0, 1
  STORE32 r0, [r5, 52]
  LOAD32 r0, [r5, 32]
  IRET
)";

// Same main program, but the handler only touches state the main program
// never reads. Any interrupt trigger point is behaviorally equivalent.
inline constexpr std::string_view irq_counter_neutral = R"(
.vector 0, _start
.vector 1, tick
.vector 2, uart_evt
.vector 3, dma_evt

_start:
  LI r6, 0x40003000       ; sensor: SR +0, DR +4
  LI r5, 0x20000000       ; [0] ticks (never written here), [12]/[16] sums
  LI r0, 0x4000F000
  MOVI r1, 0xE            ; enable vectors 1-3
  STORE32 r1, [r0]
  MOVI r4, 0
main_loop:
  LOAD32 r0, [r5]
  LOAD32 r1, [r5, 4]
  CMP r0, r1
  BEQ unchanged
  STORE32 r0, [r5, 4]
  LOAD32 r2, [r5, 8]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 8]
unchanged:
  LOAD32 r0, [r6]
  MOVI r1, 0x01
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BEQ no_data
  LOAD8 r3, [r6, 4]       ; classify the byte into four bands
  MOVI r1, 0x40
  CMP r3, r1
  BLT lo_half
  MOVI r1, 0xC0
  CMP r3, r1
  BLT band_mid
  LOAD32 r2, [r5, 16]
  ADD r2, r2, r3
  STORE32 r2, [r5, 16]
  JMP parity
band_mid:
  LOAD32 r2, [r5, 20]
  ADD r2, r2, r3
  STORE32 r2, [r5, 20]
  JMP parity
lo_half:
  MOVI r1, 0x20
  CMP r3, r1
  BLT band_tiny
  LOAD32 r2, [r5, 24]
  ADD r2, r2, r3
  STORE32 r2, [r5, 24]
  JMP parity
band_tiny:
  LOAD32 r2, [r5, 12]
  ADD r2, r2, r3
  STORE32 r2, [r5, 12]
parity:
  MOVI r1, 0x01
  AND r1, r3, r1
  MOVI r2, 0
  CMP r1, r2
  BEQ no_data
  LOAD32 r2, [r5, 28]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 28]
no_data:
  CALL mix_checksum
  JMP housekeep1
housekeep1:
  LOAD32 r2, [r5, 44]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 44]
  JMP housekeep2
housekeep2:
  ADDI r4, r4, 1
  MOVI r1, 96
  CMP r4, r1
  BLT main_loop
  JMP halt
halt:
  JMP .

; running checksum over everything seen so far
mix_checksum:
  LOAD32 r1, [r5, 40]
  SHL r2, r1, r4
  XOR r1, r1, r2
  ADD r1, r1, r3
  STORE32 r1, [r5, 40]
  RET

tick:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5, 36]     ; private scratch counter
  ADDI r0, r0, 1
  STORE32 r0, [r5, 36]
  LOAD32 r0, [r5, 32]
  IRET

uart_evt:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5, 48]
  ADDI r0, r0, 1
  STORE32 r0, [r5, 48]
  LOAD32 r0, [r5, 32]
  IRET

dma_evt:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5, 52]
  ADDI r0, r0, 1
  STORE32 r0, [r5, 52]
  LOAD32 r0, [r5, 32]
  IRET
)";

// Message receiver with a seeded bug: the byte counter in r4 is advanced
// even when the bounds check skips the store, so the parser later walks
// past the 64-byte buffer at the top of RAM.
inline constexpr std::string_view overflow_bug = R"(
.vector 0, _start

_start:
  LI r6, 0x40001000       ; usart: SR +0, DR +4
  LI r5, 0x20000000       ; [4] errs, [8] checksum, [12] lo, [16] hi, [20..] marks
  MOVI r4, 0              ; received-byte counter
rx_loop:
  LOAD32 r0, [r6]
  MOVI r1, 0xF0
  AND r1, r0, r1
  MOVI r2, 0
  CMP r1, r2
  BNE rx_error
  MOVI r1, 0x01
  AND r1, r0, r1
  CMP r1, r2
  BEQ rx_loop
  LOAD8 r3, [r6, 4]
  MOVI r1, 0x0A
  CMP r3, r1
  BEQ parse               ; end of message
  MOVI r1, 0x40
  CMP r3, r1
  BLT rx_lo
  LOAD32 r2, [r5, 16]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 16]    ; high-band bytes
  JMP rx_store
rx_lo:
  LOAD32 r2, [r5, 12]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 12]    ; low-band bytes
rx_store:
  MOVI r1, 64
  CMP r4, r1
  BGE no_store            ; buffer full: byte dropped...
  LI r2, 0x20003FC0       ; 64-byte buffer at the top of 16K RAM
  ADD r2, r2, r4
  STORE8 r3, [r2]
no_store:
  ADDI r4, r4, 1          ; ...but the counter advances anyway
  MOVI r1, 8
  CMP r4, r1
  BNE ck24
  LOAD32 r2, [r5, 32]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 32]    ; fifo watermark events
ck24:
  MOVI r1, 24
  CMP r4, r1
  BNE ck48
  LOAD32 r2, [r5, 36]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 36]
ck48:
  MOVI r1, 48
  CMP r4, r1
  BNE rx_next
  LOAD32 r2, [r5, 40]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 40]
rx_next:
  JMP rx_loop
rx_error:
  LOAD32 r1, [r5, 4]
  ADDI r1, r1, 1
  STORE32 r1, [r5, 4]
  JMP rx_loop

parse:
  MOVI r1, 4
  CMP r4, r1
  BLT short_msg           ; runt frames are discarded
  MOVI r1, 16
  CMP r4, r1
  BLT walk                ; basic frame
  LOAD32 r2, [r5, 20]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 20]    ; extended frame
  MOVI r1, 40
  CMP r4, r1
  BLT walk
  LOAD32 r2, [r5, 24]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 24]    ; bulk frame
walk:
  MOVI r0, 0              ; checksum
  MOVI r1, 0              ; index
  LI r2, 0x20003FC0
parse_loop:
  CMP r1, r4
  BGE parse_done
  ADD r3, r2, r1
  LOAD8 r6, [r3]          ; walks past the buffer when count > 64
  ADD r0, r0, r6
  ADDI r1, r1, 1
  JMP parse_loop
parse_done:
  STORE32 r0, [r5, 8]
  MOVI r4, 0
  LI r6, 0x40001000
  JMP rx_loop
short_msg:
  LOAD32 r2, [r5, 28]
  ADDI r2, r2, 1
  STORE32 r2, [r5, 28]
  MOVI r4, 0
  JMP rx_loop
)";

// Sleeps in the main loop; each wake is caused by the tick interrupt. After
// eight wakes it reads the sensor once and halts.
inline constexpr std::string_view sleepy = R"(
.vector 0, _start
.vector 2, tick

_start:
  LI r5, 0x20000000
  LI r0, 0x4000F000
  MOVI r1, 0x4            ; enable vector 2
  STORE32 r1, [r0]
  MOVI r4, 0
loop:
  WFI
  LOAD32 r0, [r5]         ; tick count
  ADDI r4, r4, 1
  MOVI r1, 8
  CMP r4, r1
  BLT loop
  LI r6, 0x40001000
  LOAD32 r0, [r6]
  JMP halt
halt:
  JMP .

tick:
  STORE32 r0, [r5, 32]
  LOAD32 r0, [r5]
  ADDI r0, r0, 1
  STORE32 r0, [r5]
  LOAD32 r0, [r5, 32]
  IRET
)";

// Sleeps without ever enabling an interrupt; nothing can wake it.
inline constexpr std::string_view sleepy_dead = R"(
.vector 0, _start

_start:
  MOVI r4, 0
  WFI
  JMP .
)";

inline const std::map<std::string, std::string_view>& all() {
  static const std::map<std::string, std::string_view> firmware{
      {"uart_poll", uart_poll},
      {"i2c_init", i2c_init},
      {"serial_reset", serial_reset},
      {"irq_counter", irq_counter},
      {"irq_counter_neutral", irq_counter_neutral},
      {"overflow_bug", overflow_bug},
      {"sleepy", sleepy},
      {"sleepy_dead", sleepy_dead},
  };
  return firmware;
}

}  // namespace mcufuzz::corpus
