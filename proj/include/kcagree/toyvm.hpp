#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcagree/bitstring.hpp"

namespace kcagree::vm {

// Instruction set. Programs are read as consecutive 3-bit opcodes, MSB
// first; a trailing group of fewer than 3 bits is ignored and running past
// the last instruction halts.
enum class Op : std::uint8_t {
  Halt = 0,      // 000
  Send0 = 1,     // 001  send bit 0 (a no-op when running alone)
  Send1 = 2,     // 010  send bit 1
  Recv = 3,      // 011  read next incoming bit; skip next instruction if it is 0
  Out0 = 4,      // 100
  Out1 = 5,      // 101
  ReadCond = 6,  // 110  copy next condition bit to output; halt when the tape is exhausted
  JmpBack = 7,   // 111  jump to (own index - 4), clamped at 0
};

std::string op_name(Op op);

/// Assembles op mnemonics ("SEND1 HALT") into program bits.
BitString assemble(std::initializer_list<Op> ops);

struct VmLimits {
  std::uint64_t max_steps = 64;
  std::size_t max_output = 256;
  std::size_t max_transcript = 256;
};

/// Step budget as a function of n = |pi x|.
struct TimeBound {
  enum class Kind { Quadratic, NLogN, Fixed };
  Kind kind = Kind::Quadratic;
  std::uint64_t fixed_steps = 0;

  static TimeBound quadratic() { return {Kind::Quadratic, 0}; }
  static TimeBound nlogn() { return {Kind::NLogN, 0}; }
  static TimeBound fixed(std::uint64_t steps) { return {Kind::Fixed, steps}; }
  /// Parses "n2", "nlogn" or "fixed:<steps>".
  static TimeBound parse(const std::string& name);

  std::uint64_t steps(std::size_t n) const;
  std::string name() const;
  VmLimits limits(std::size_t n) const;
};

enum class Status : std::uint8_t { Running, Halted, Timeout };

/// A single resumable VM instance. Incoming bits are queued with deliver()
/// and consumed by Recv in order; Recv on an empty queue reads 0.
class Machine {
 public:
  Machine(const BitString& program, const VmLimits& limits, BitString condition = {});

  enum class Event { Sent, Halted, Timeout };
  struct Step {
    Event event;
    bool bit = false;  // valid when event == Sent
  };

  /// Runs until the machine sends a bit, halts or exhausts its budget.
  Step run_until_event();

  void deliver(bool bit) { inbox_.push_back(bit ? 1 : 0); }
  bool active() const noexcept { return status_ == Status::Running; }
  Status status() const noexcept { return status_; }
  void force_timeout() noexcept { status_ = Status::Timeout; }
  const BitString& output() const noexcept { return output_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  std::vector<Op> ops_;
  BitString condition_;
  VmLimits limits_;
  std::vector<std::uint8_t> inbox_;
  std::size_t inbox_pos_ = 0;
  std::size_t cond_pos_ = 0;
  std::size_t pc_ = 0;
  std::uint64_t steps_ = 0;
  BitString output_;
  Status status_ = Status::Running;
};

/// Output of `program` on condition tape `condition`, or nullopt on timeout.
std::optional<BitString> run_single(const BitString& program, const BitString& condition,
                                    const VmLimits& limits);

struct InteractionOutcome {
  BitString transcript;
  BitString out_a;
  BitString out_b;
  std::uint64_t steps_a = 0;
  std::uint64_t steps_b = 0;
  bool halted_a = false;
  bool halted_b = false;

  friend bool operator==(const InteractionOutcome&, const InteractionOutcome&) = default;
};

/// Lock-step interaction, A sends first. A side that is done (halted or out
/// of budget) contributes a 0 at its slot whenever the other side still
/// sends; the run ends at the first slot where both sides are done.
InteractionOutcome run_interactive(const BitString& prog_a, const BitString& prog_b,
                                   const VmLimits& limits);

/// Complexity value: bits, or Infinite when no program exists within the bound.
struct ComplexityValue {
  std::optional<std::size_t> bits;

  static ComplexityValue infinite() { return {}; }
  static ComplexityValue of(std::size_t v) { return {v}; }
  bool finite() const noexcept { return bits.has_value(); }
  std::size_t value() const { return bits.value(); }
  std::string to_string() const { return bits ? std::to_string(*bits) : "inf"; }

  friend bool operator==(const ComplexityValue&, const ComplexityValue&) = default;
};

struct SearchOptions {
  std::size_t max_plain_len_guard = 20;
  std::size_t max_pair_len_guard = 18;
  /// Wall-time cap; zero means unlimited.
  std::chrono::milliseconds budget{0};
  unsigned threads = 1;
};

/// Exact min |p| with run_single(p, condition) == x and |p| <= max_prog_len.
/// Throws DomainTooLarge above the guard and BudgetExceeded on wall time.
ComplexityValue plain_complexity(const BitString& x, const BitString& condition,
                                 const VmLimits& limits, std::size_t max_prog_len,
                                 const SearchOptions& options = {});

/// Exact min |ab| such that (a,b) produce transcript pi and both output x,
/// each side halting within limits.max_steps.
ComplexityValue interactive_complexity(const BitString& pi, const BitString& x,
                                       const VmLimits& limits, std::size_t max_pair_len,
                                       const SearchOptions& options = {});

/// Bits spent on a prefix-free description of the split point of a
/// concatenated program pair of total length `total`: 2*ceil(log2(total+1)).
std::size_t split_cost(std::size_t total);

/// All (pi, x) reachable by program pairs of total length <= max_pair_len,
/// with their exact interactive complexity under `bound`. One sweep over the
/// program space; entries for pairs never produced are absent.
struct InteractiveTable {
  struct Key {
    BitString pi;
    BitString x;
    friend bool operator==(const Key&, const Key&) = default;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  TimeBound bound;
  std::size_t max_pair_len = 0;
  std::size_t max_n = 0;
  std::vector<std::pair<Key, std::size_t>> entries;  // sorted by key

  ComplexityValue lookup(const BitString& pi, const BitString& x) const;
};

/// Builds the table for all pairs with |pi x| <= max_n.
InteractiveTable build_interactive_table(const TimeBound& bound, std::size_t max_pair_len,
                                         std::size_t max_n, const SearchOptions& options = {});

}  // namespace kcagree::vm
