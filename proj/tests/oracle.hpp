// Independent brute-force model of the toy machine, written against the
// instruction table only. Used to freeze golden values and to cross-check the
// library's pruned searches.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>

namespace oracle {

struct Limits {
  std::uint64_t steps;
  std::size_t out_cap;
  std::size_t transcript_cap;
};

enum class State { Run, Halt, Dead };
enum class Event { Send, Halt, Dead };

// Program is a '0'/'1' string; instruction i occupies characters 3i..3i+2.
class Box {
 public:
  Box(std::string prog, const Limits& lim, std::string cond = "", bool alone = false)
      : prog_(std::move(prog)), lim_(lim), cond_(std::move(cond)), alone_(alone) {}

  State state = State::Run;
  std::string out;
  std::uint64_t used = 0;
  std::deque<char> inbox;

  // Runs to the next send, halt or death. `bit` receives the sent bit.
  Event go(char& bit) {
    if (state == State::Halt) return Event::Halt;
    if (state == State::Dead) return Event::Dead;
    const std::size_t n_ins = prog_.size() / 3;
    while (true) {
      if (used == lim_.steps) return die();
      used += 1;
      if (ip_ >= n_ins) return halt();
      const std::string code = prog_.substr(3 * ip_, 3);
      if (code == "000") return halt();
      if (code == "001" || code == "010") {
        ip_ += 1;
        if (alone_) continue;
        bit = code == "010" ? '1' : '0';
        return Event::Send;
      }
      if (code == "011") {
        char b = '0';
        if (!inbox.empty()) {
          b = inbox.front();
          inbox.pop_front();
        }
        ip_ += b == '1' ? 1 : 2;
        continue;
      }
      if (code == "100" || code == "101") {
        if (out.size() == lim_.out_cap) return die();
        out += code == "101" ? '1' : '0';
        ip_ += 1;
        continue;
      }
      if (code == "110") {
        if (cpos_ == cond_.size()) return halt();
        if (out.size() == lim_.out_cap) return die();
        out += cond_[cpos_];
        cpos_ += 1;
        ip_ += 1;
        continue;
      }
      // 111
      ip_ = ip_ < 4 ? 0 : ip_ - 4;
    }
  }

  void kill() { state = State::Dead; }

 private:
  Event halt() {
    state = State::Halt;
    return Event::Halt;
  }
  Event die() {
    state = State::Dead;
    return Event::Dead;
  }

  std::string prog_;
  Limits lim_;
  std::string cond_;
  bool alone_;
  std::size_t ip_ = 0;
  std::size_t cpos_ = 0;
};

inline std::optional<std::string> run_alone(const std::string& prog, const std::string& cond, const Limits& lim) {
  Box m(prog, lim, cond, true);
  char b;
  if (m.go(b) != Event::Halt) return std::nullopt;
  return m.out;
}

struct Talk {
  std::string transcript, out_a, out_b;
  std::uint64_t used_a = 0, used_b = 0;
  bool halt_a = false, halt_b = false;
};

inline Talk run_pair(const std::string& a, const std::string& b, const Limits& lim) {
  Box A(a, lim), B(b, lim);
  Box* box[2] = {&A, &B};
  std::string t;
  int slot = 0;  // whose turn it is to put a bit on the wire
  while (true) {
    Box& me = *box[slot];
    Box& you = *box[1 - slot];
    char bit;
    if (me.state == State::Run && me.go(bit) == Event::Send) {
      if (t.size() == lim.transcript_cap) {
        me.kill();
      } else {
        t += bit;
        you.inbox.push_back(bit);
        slot = 1 - slot;
      }
      continue;
    }
    // `me` is finished: let the other side speak, padding my slot with 0.
    if (you.state != State::Run) break;
    if (you.go(bit) != Event::Send) break;
    if (t.size() + 2 > lim.transcript_cap) {
      you.kill();
      break;
    }
    t += '0';
    me.inbox.push_back('0');
    t += bit;
    me.inbox.push_back(bit);
  }
  return {t, A.out, B.out, A.used, B.used, A.state == State::Halt, B.state == State::Halt};
}

inline std::string bits_of(std::uint64_t v, std::size_t len) {
  std::string s(len, '0');
  for (std::size_t i = 0; i < len; ++i)
    if ((v >> (len - 1 - i)) & 1U) s[i] = '1';
  return s;
}

// Shortest program of any bit length <= max_len printing x; -1 if none.
inline int plain(const std::string& x, const std::string& cond, const Limits& lim, std::size_t max_len) {
  for (std::size_t len = 0; len <= max_len; ++len)
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
      const auto out = run_alone(bits_of(v, len), cond, lim);
      if (out && *out == x) return static_cast<int>(len);
    }
  return -1;
}

// Shortest |ab| with transcript pi, both outputs x, both halting; -1 if none.
inline int interactive(const std::string& pi, const std::string& x, const Limits& lim, std::size_t max_len) {
  for (std::size_t total = 0; total <= max_len; ++total)
    for (std::size_t la = 0; la <= total; ++la)
      for (std::uint64_t va = 0; va < (std::uint64_t{1} << la); ++va)
        for (std::uint64_t vb = 0; vb < (std::uint64_t{1} << (total - la)); ++vb) {
          const auto r = run_pair(bits_of(va, la), bits_of(vb, total - la), lim);
          if (r.halt_a && r.halt_b && r.transcript == pi && r.out_a == x && r.out_b == x) return static_cast<int>(total);
        }
  return -1;
}

}  // namespace oracle
