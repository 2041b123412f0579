#include "kcagree/toyvm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

#include "kcagree/error.hpp"
#include "kcagree/parallel.hpp"

namespace kcagree::vm {

namespace {

std::vector<Op> decode(const BitString& program) {
  std::vector<Op> ops(program.size() / 3);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const unsigned v = (program[3 * i] ? 4U : 0U) | (program[3 * i + 1] ? 2U : 0U) |
                       (program[3 * i + 2] ? 1U : 0U);
    ops[i] = static_cast<Op>(v);
  }
  return ops;
}

struct Core {
  std::size_t pc = 0;
  std::uint64_t steps = 0;
  std::size_t cond_pos = 0;
  BitString output;
};

enum class Ev { Sent, Halted, Timeout, Suspended };

constexpr std::size_t kNoSuspend = static_cast<std::size_t>(-1);

// Executes from `core` until an event. When pc reaches `suspend_at` the run
// stops with Suspended instead of halting; with kNoSuspend, running off the
// end is an ordinary (implicit) halt.
Ev execute(const Op* ops, std::size_t nops, Core& core, const VmLimits& limits,
           const BitString& cond, const std::vector<std::uint8_t>* inbox, std::size_t* inbox_pos,
           std::size_t suspend_at, bool& sent_bit) {
  for (;;) {
    if (core.pc >= suspend_at) return Ev::Suspended;
    if (core.steps >= limits.max_steps) return Ev::Timeout;
    ++core.steps;
    if (core.pc >= nops) return Ev::Halted;
    const Op op = ops[core.pc];
    switch (op) {
      case Op::Halt:
        return Ev::Halted;
      case Op::Send0:
      case Op::Send1:
        ++core.pc;
        if (inbox_pos == nullptr) break;  // alone: nobody to send to
        sent_bit = op == Op::Send1;
        return Ev::Sent;
      case Op::Recv: {
        bool bit = false;
        if (inbox && *inbox_pos < inbox->size()) bit = (*inbox)[(*inbox_pos)++] != 0;
        core.pc += bit ? 1 : 2;
        break;
      }
      case Op::Out0:
      case Op::Out1:
        if (core.output.size() >= limits.max_output) return Ev::Timeout;
        core.output.push_back(op == Op::Out1);
        ++core.pc;
        break;
      case Op::ReadCond:
        if (core.cond_pos >= cond.size()) return Ev::Halted;
        if (core.output.size() >= limits.max_output) return Ev::Timeout;
        core.output.push_back(cond[core.cond_pos++]);
        ++core.pc;
        break;
      case Op::JmpBack:
        core.pc = core.pc >= 4 ? core.pc - 4 : 0;
        break;
    }
  }
}

class Deadline {
 public:
  explicit Deadline(std::chrono::milliseconds budget)
      : active_(budget.count() > 0), end_(std::chrono::steady_clock::now() + budget) {}
  void check(const char* what) const {
    if (active_ && std::chrono::steady_clock::now() > end_)
      throw BudgetExceeded(std::string(what) + " exceeded its wall-time budget");
  }

 private:
  bool active_;
  std::chrono::steady_clock::time_point end_;
};

}  // namespace

std::string op_name(Op op) {
  switch (op) {
    case Op::Halt: return "HALT";
    case Op::Send0: return "SEND0";
    case Op::Send1: return "SEND1";
    case Op::Recv: return "RECV";
    case Op::Out0: return "OUT0";
    case Op::Out1: return "OUT1";
    case Op::ReadCond: return "READC";
    case Op::JmpBack: return "JMPB";
  }
  return "?";
}

BitString assemble(std::initializer_list<Op> ops) {
  BitString out;
  for (Op op : ops) out.append(BitString::from_uint(static_cast<unsigned>(op), 3));
  return out;
}

TimeBound TimeBound::parse(const std::string& name) {
  if (name == "n2") return quadratic();
  if (name == "nlogn") return nlogn();
  if (name.rfind("fixed:", 0) == 0) {
    const auto v = std::stoull(name.substr(6));
    if (v == 0) throw ValidationError("fixed step budget must be positive");
    return fixed(v);
  }
  throw ValidationError("unknown time bound \"" + name + "\" (use n2, nlogn or fixed:<steps>)");
}

std::uint64_t TimeBound::steps(std::size_t n) const {
  const std::uint64_t m = n + 2;
  switch (kind) {
    case Kind::Quadratic: return m * m;
    case Kind::NLogN: {
      std::uint64_t lg = 0;
      while ((std::uint64_t{1} << lg) < m) ++lg;
      return 8 * m * lg;
    }
    case Kind::Fixed: return fixed_steps;
  }
  return 0;
}

std::string TimeBound::name() const {
  switch (kind) {
    case Kind::Quadratic: return "n2";
    case Kind::NLogN: return "nlogn";
    case Kind::Fixed: return "fixed:" + std::to_string(fixed_steps);
  }
  return "?";
}

VmLimits TimeBound::limits(std::size_t n) const {
  return VmLimits{steps(n), std::max<std::size_t>(n, 1) * 4 + 16, std::max<std::size_t>(n, 1) * 4 + 16};
}

Machine::Machine(const BitString& program, const VmLimits& limits, BitString condition)
    : ops_(decode(program)), condition_(std::move(condition)), limits_(limits) {}

Machine::Step Machine::run_until_event() {
  if (status_ != Status::Running) return {status_ == Status::Halted ? Event::Halted : Event::Timeout};
  Core core{pc_, steps_, cond_pos_, std::move(output_)};
  bool bit = false;
  const Ev ev = execute(ops_.data(), ops_.size(), core, limits_, condition_, &inbox_, &inbox_pos_,
                        kNoSuspend, bit);
  pc_ = core.pc;
  steps_ = core.steps;
  cond_pos_ = core.cond_pos;
  output_ = std::move(core.output);
  switch (ev) {
    case Ev::Sent: return {Event::Sent, bit};
    case Ev::Halted: status_ = Status::Halted; return {Event::Halted};
    default: status_ = Status::Timeout; return {Event::Timeout};
  }
}

std::optional<BitString> run_single(const BitString& program, const BitString& condition,
                                    const VmLimits& limits) {
  const auto ops = decode(program);
  Core core;
  bool bit = false;
  const Ev ev = execute(ops.data(), ops.size(), core, limits, condition, nullptr, nullptr,
                        kNoSuspend, bit);
  if (ev != Ev::Halted) return std::nullopt;
  return std::move(core.output);
}

InteractionOutcome run_interactive(const BitString& prog_a, const BitString& prog_b,
                                   const VmLimits& limits) {
  Machine a(prog_a, limits), b(prog_b, limits);
  BitString transcript;
  Machine* side[2] = {&a, &b};
  auto emit = [&](int who, bool bit) {
    if (transcript.size() >= limits.max_transcript) {
      side[who]->force_timeout();
      return false;
    }
    transcript.push_back(bit);
    side[1 - who]->deliver(bit);
    return true;
  };
  int turn = 0;
  for (;;) {
    Machine& s = *side[turn];
    Machine& o = *side[1 - turn];
    if (s.active()) {
      const auto st = s.run_until_event();
      if (st.event == Machine::Event::Sent) {
        if (emit(turn, st.bit)) turn = 1 - turn;
        continue;
      }
    }
    if (!o.active()) break;
    const auto st = o.run_until_event();
    if (st.event != Machine::Event::Sent) break;
    if (transcript.size() + 2 > limits.max_transcript) {
      o.force_timeout();
      break;
    }
    emit(turn, false);
    emit(1 - turn, st.bit);
  }
  return {std::move(transcript), a.output(), b.output(), a.steps(), b.steps(),
          a.status() == Status::Halted, b.status() == Status::Halted};
}

std::size_t split_cost(std::size_t total) {
  std::size_t lg = 0;
  while ((std::size_t{1} << lg) < total + 1) ++lg;
  return 2 * lg;
}

namespace {

// Iterative deepening over op sequences. A prefix is simulated until the
// program counter leaves it; since later instructions cannot change what the
// prefix already did, a prefix whose output is not a prefix of the target (or
// whose steps ran out) is pruned. Trailing bits that do not form a whole
// opcode never change behaviour, so minimal programs have length 3 * #ops.
class PlainSearch {
 public:
  PlainSearch(const BitString& x, const BitString& cond, const VmLimits& limits, const Deadline& dl)
      : x_(x), cond_(cond), limits_(limits), deadline_(dl) {
    limits_.max_output = std::min(limits_.max_output, x.size());
  }

  bool search(std::size_t depth) {
    depth_ = depth;
    ops_.clear();
    return explore(Core{});
  }

 private:
  bool matches(const Core& c) const { return c.output == x_; }

  bool explore(const Core& state) {
    if ((++nodes_ & 0xffff) == 0) deadline_.check("plain_complexity");
    if (ops_.size() == depth_) {
      // Running off the end is an implicit halt costing one step.
      return state.steps < limits_.max_steps && matches(state);
    }
    for (unsigned v = 0; v < 8; ++v) {
      ops_.push_back(static_cast<Op>(v));
      Core next = state;
      bool bit = false;
      const Ev ev = execute(ops_.data(), ops_.size(), next, limits_, cond_, nullptr, nullptr,
                            ops_.size(), bit);
      bool found = false;
      if (ev == Ev::Halted) {
        found = matches(next);
      } else if (ev == Ev::Suspended && x_.starts_with(next.output)) {
        found = explore(next);
      }
      ops_.pop_back();
      if (found) return true;
    }
    return false;
  }

  const BitString& x_;
  const BitString& cond_;
  VmLimits limits_;
  const Deadline& deadline_;
  std::vector<Op> ops_;
  std::size_t depth_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace

ComplexityValue plain_complexity(const BitString& x, const BitString& condition,
                                 const VmLimits& limits, std::size_t max_prog_len,
                                 const SearchOptions& options) {
  if (max_prog_len > options.max_plain_len_guard)
    throw DomainTooLarge("max program length " + std::to_string(max_prog_len) +
                         " exceeds the guard " + std::to_string(options.max_plain_len_guard));
  const Deadline deadline(options.budget);
  PlainSearch search(x, condition, limits, deadline);
  for (std::size_t depth = 0; 3 * depth <= max_prog_len; ++depth)
    if (search.search(depth)) return ComplexityValue::of(3 * depth);
  return ComplexityValue::infinite();
}

ComplexityValue interactive_complexity(const BitString& pi, const BitString& x,
                                       const VmLimits& limits, std::size_t max_pair_len,
                                       const SearchOptions& options) {
  if (max_pair_len > options.max_pair_len_guard)
    throw DomainTooLarge("max pair length " + std::to_string(max_pair_len) +
                         " exceeds the guard " + std::to_string(options.max_pair_len_guard));
  const Deadline deadline(options.budget);
  // Runs that overflow these caps cannot produce (pi, x, x).
  VmLimits tight = limits;
  tight.max_output = std::min(limits.max_output, x.size());
  tight.max_transcript = std::min(limits.max_transcript, pi.size());

  for (std::size_t total = 0; total <= max_pair_len; ++total) {
    // Index space: split point la in [0, total], then a and b values.
    const std::uint64_t per_split = std::uint64_t{1} << total;
    std::atomic<bool> found{false};
    parallel_ranges((total + 1) * per_split, options.threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t idx = lo; idx < hi && !found.load(std::memory_order_relaxed); ++idx) {
        if ((idx & 0x3fff) == 0) deadline.check("interactive_complexity");
        const std::size_t la = static_cast<std::size_t>(idx / per_split);
        const std::uint64_t v = idx % per_split;
        const std::size_t lb = total - la;
        const BitString a = BitString::from_uint(lb < 64 ? v >> lb : 0, la);
        const BitString b = BitString::from_uint(v & ((std::uint64_t{1} << lb) - 1), lb);
        const auto out = run_interactive(a, b, tight);
        if (out.halted_a && out.halted_b && out.transcript == pi && out.out_a == x && out.out_b == x)
          found.store(true);
      }
    });
    if (found) return ComplexityValue::of(total);
  }
  return ComplexityValue::infinite();
}

ComplexityValue InteractiveTable::lookup(const BitString& pi, const BitString& x) const {
  const Key key{pi, x};
  const auto it = std::lower_bound(entries.begin(), entries.end(), key,
                                   [](const auto& e, const Key& k) { return e.first < k; });
  if (it != entries.end() && it->first == key) return ComplexityValue::of(it->second);
  return ComplexityValue::infinite();
}

InteractiveTable build_interactive_table(const TimeBound& bound, std::size_t max_pair_len,
                                         std::size_t max_n, const SearchOptions& options) {
  if (max_pair_len > options.max_pair_len_guard)
    throw DomainTooLarge("max pair length exceeds the guard");
  const Deadline deadline(options.budget);
  VmLimits limits{bound.steps(max_n), max_n, max_n};
  std::map<InteractiveTable::Key, std::size_t> best;
  std::mutex mu;
  for (std::size_t total = 0; total <= max_pair_len; ++total) {
    const std::uint64_t per_split = std::uint64_t{1} << total;
    parallel_ranges((total + 1) * per_split, options.threads, [&](std::uint64_t lo, std::uint64_t hi) {
      std::map<InteractiveTable::Key, std::size_t> local;
      for (std::uint64_t idx = lo; idx < hi; ++idx) {
        if ((idx & 0x3fff) == 0) deadline.check("interactive table");
        const std::size_t la = static_cast<std::size_t>(idx / per_split);
        const std::uint64_t v = idx % per_split;
        const std::size_t lb = total - la;
        const BitString a = BitString::from_uint(lb < 64 ? v >> lb : 0, la);
        const BitString b = BitString::from_uint(v & ((std::uint64_t{1} << lb) - 1), lb);
        const auto out = run_interactive(a, b, limits);
        if (!out.halted_a || !out.halted_b || out.out_a != out.out_b) continue;
        const std::size_t n = out.transcript.size() + out.out_a.size();
        if (n > max_n) continue;
        const std::uint64_t t = bound.steps(n);
        if (out.steps_a > t || out.steps_b > t) continue;
        local.try_emplace({out.transcript, out.out_a}, total);
      }
      std::lock_guard lock(mu);
      for (auto& [k, v] : local) best.try_emplace(k, v);
    });
  }
  InteractiveTable table{bound, max_pair_len, max_n, {}};
  table.entries.assign(best.begin(), best.end());
  return table;
}

}  // namespace kcagree::vm
