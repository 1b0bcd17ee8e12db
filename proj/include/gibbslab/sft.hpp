#pragma once

// Subshifts of finite type on a small alphabet, presented by their allowed
// words of a fixed order. Words are integer codes, most-significant symbol
// first, so prefix queries are contiguous code ranges. All shifts are pruned
// to their essential part (every kept word extends to a bi-infinite path).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gibbslab::sym {

class Sft {
 public:
  Sft() = default;
  // keeps only the essential words of `allowed`
  Sft(int alphabet, int order, std::vector<std::uint32_t> allowed);

  int alphabet() const { return alphabet_; }
  int order() const { return order_; }
  bool empty() const { return words_.empty(); }
  const std::vector<std::uint32_t>& words() const { return words_; }
  bool word_allowed(std::uint32_t code) const;

  // is some point of the shift an extension of this prefix?
  bool prefix_extendable(const std::vector<int>& prefix) const;
  bool prefix_extendable_code(std::uint32_t code, int len) const;

  // length of the longest extendable prefix of each depth-k word,
  // tabulated for all alphabet^k codes
  std::vector<std::int16_t> prefix_depths(int k) const;

  // language inclusion / emptiness of intersection, decided at the common
  // refinement order
  static bool subset_of(const Sft& inner, const Sft& outer);
  static bool intersection_empty(const Sft& a, const Sft& b);

  std::string to_json() const;  // alphabet, order, forbidden-word list
  static Sft from_json(const std::string& text);

 private:
  int alphabet_ = 2;
  int order_ = 1;
  std::vector<std::uint32_t> words_;  // sorted
};

// configurations whose 1s are separated by at least `gap` 0s (flipped: roles
// of 0 and 1 exchanged); order gap+1, binary alphabet
Sft runlength_sft(int gap, bool flipped);

// topological entropy in nats: log of the Perron root of the transition
// graph, maximized over strongly connected components of the essential part.
// Throws std::domain_error for the empty shift.
double sft_entropy(const Sft& x);

struct EntropyLadder {
  int levels = 0;                 // members indexed 0..levels
  std::vector<Sft> plus, minus;   // minus[m] is the bit-flip of plus[m]
  std::vector<double> entropy_plus, entropy_minus;
};

// X_m^+ = runlength(g(m)), X_m^- its flip; verifies disjointness at level 0,
// nesting, and the interlaced strict entropy drops. Throws on violation,
// naming the offending level.
EntropyLadder entropy_ladder(int levels, const std::function<int(int)>& gap);

// order-ell approximant: the SFT whose allowed ell-words are exactly those
// the oracle accepts
Sft sft_word_approximants(const std::function<bool(const std::vector<int>&)>& oracle,
                          int ell, int alphabet = 2);

struct Distance {
  int prefix_len = 0;
  int matched = 0;       // longest extendable prefix length across targets
  bool saturated = false;  // whole prefix extendable: true value <= 2^-len
  double value() const;    // 2^-matched
};

Distance dist_to_union(const std::vector<int>& prefix,
                       const std::vector<const Sft*>& targets);

}  // namespace gibbslab::sym
