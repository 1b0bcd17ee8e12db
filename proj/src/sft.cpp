#include "gibbslab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "gibbslab/perron.hpp"

namespace gibbslab::sym {

namespace {

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// iterative strongly-connected components (Tarjan)
std::vector<int> scc_ids(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1),
      low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
  struct Frame {
    int v;
    std::size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!frames.empty()) {
      auto& f = frames.back();
      auto v = static_cast<std::size_t>(f.v);
      if (f.child < adj[v].size()) {
        int w = adj[v][f.child++];
        auto wu = static_cast<std::size_t>(w);
        if (index[wu] == -1) {
          index[wu] = low[wu] = next_index++;
          stack.push_back(w);
          on_stack[wu] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[wu]) {
          low[v] = std::min(low[v], index[wu]);
        }
      } else {
        if (low[v] == index[v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
            comp[static_cast<std::size_t>(w)] = next_comp;
            if (w == f.v) break;
          }
          ++next_comp;
        }
        int me = f.v;
        frames.pop_back();
        if (!frames.empty()) {
          auto pu = static_cast<std::size_t>(frames.back().v);
          low[pu] = std::min(low[pu], low[static_cast<std::size_t>(me)]);
        }
      }
    }
  }
  return comp;
}

}  // namespace

Sft::Sft(int alphabet, int order, std::vector<std::uint32_t> allowed)
    : alphabet_(alphabet), order_(order) {
  if (alphabet < 2 || order < 1) throw std::invalid_argument("sft: bad shape");
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());

  // prune to the essential part: every word needs an allowed successor and
  // predecessor through the (order-1)-overlap
  const auto stride = static_cast<std::uint32_t>(ipow(static_cast<std::uint64_t>(alphabet), order - 1));
  std::vector<std::uint32_t> cur = std::move(allowed);
  bool changed = true;
  while (changed && !cur.empty()) {
    changed = false;
    std::vector<std::uint32_t> next;
    next.reserve(cur.size());
    auto member = [&](std::uint32_t c) {
      return std::binary_search(cur.begin(), cur.end(), c);
    };
    for (std::uint32_t w : cur) {
      std::uint32_t suffix = w % stride;
      std::uint32_t prefix = w / static_cast<std::uint32_t>(alphabet);
      bool has_succ = false, has_pred = false;
      for (int s = 0; s < alphabet && !has_succ; ++s)
        has_succ = member(suffix * static_cast<std::uint32_t>(alphabet) +
                          static_cast<std::uint32_t>(s));
      for (int s = 0; s < alphabet && !has_pred; ++s)
        has_pred = member(static_cast<std::uint32_t>(s) * stride + prefix);
      if (has_succ && has_pred) next.push_back(w);
      else changed = true;
    }
    cur = std::move(next);
  }
  words_ = std::move(cur);
}

bool Sft::word_allowed(std::uint32_t code) const {
  return std::binary_search(words_.begin(), words_.end(), code);
}

bool Sft::prefix_extendable_code(std::uint32_t code, int len) const {
  if (words_.empty() || len < 0) return false;
  if (len == 0) return true;
  if (len < order_) {
    // allowed words with this prefix form a contiguous code range
    auto span = static_cast<std::uint32_t>(ipow(static_cast<std::uint64_t>(alphabet_), order_ - len));
    auto lo = std::lower_bound(words_.begin(), words_.end(), code * span);
    return lo != words_.end() && *lo < (code + 1) * span;
  }
  const auto window = static_cast<std::uint32_t>(ipow(static_cast<std::uint64_t>(alphabet_), order_));
  for (int start = 0; start + order_ <= len; ++start) {
    int drop = len - (start + order_);
    std::uint32_t w = (code / static_cast<std::uint32_t>(ipow(
                                  static_cast<std::uint64_t>(alphabet_), drop))) %
                      window;
    if (!word_allowed(w)) return false;
  }
  return true;
}

bool Sft::prefix_extendable(const std::vector<int>& prefix) const {
  std::uint32_t code = 0;
  for (int s : prefix) code = code * static_cast<std::uint32_t>(alphabet_) +
                               static_cast<std::uint32_t>(s);
  return prefix_extendable_code(code, static_cast<int>(prefix.size()));
}

std::vector<std::int16_t> Sft::prefix_depths(int k) const {
  const auto total = ipow(static_cast<std::uint64_t>(alphabet_), k);
  std::vector<std::int16_t> depth(total, 0);
  // ext[c] for prefixes of the current length; iterate lengths upward
  std::vector<char> ext(1, !words_.empty());
  for (int len = 1; len <= k; ++len) {
    const auto count = ipow(static_cast<std::uint64_t>(alphabet_), len);
    std::vector<char> nxt(count, 0);
    const auto window = ipow(static_cast<std::uint64_t>(alphabet_), order_);
    for (std::uint64_t c = 0; c < count; ++c) {
      std::uint64_t parent = c / static_cast<std::uint64_t>(alphabet_);
      if (!ext[parent]) continue;
      bool ok;
      if (len < order_) {
        ok = prefix_extendable_code(static_cast<std::uint32_t>(c), len);
      } else {
        ok = word_allowed(static_cast<std::uint32_t>(c % window));
      }
      nxt[c] = ok ? 1 : 0;
    }
    // words whose prefix of this length is extendable get depth = len
    const auto span = ipow(static_cast<std::uint64_t>(alphabet_), k - len);
    for (std::uint64_t c = 0; c < count; ++c) {
      if (!nxt[c]) continue;
      for (std::uint64_t t = c * span; t < (c + 1) * span; ++t)
        depth[t] = static_cast<std::int16_t>(len);
    }
    ext = std::move(nxt);
  }
  return depth;
}

bool Sft::subset_of(const Sft& inner, const Sft& outer) {
  if (inner.alphabet_ != outer.alphabet_) return false;
  int r = std::max(inner.order_, outer.order_);
  const auto total = ipow(static_cast<std::uint64_t>(inner.alphabet_), r);
  for (std::uint64_t c = 0; c < total; ++c) {
    auto code = static_cast<std::uint32_t>(c);
    if (inner.prefix_extendable_code(code, r) && !outer.prefix_extendable_code(code, r))
      return false;
  }
  return true;
}

bool Sft::intersection_empty(const Sft& a, const Sft& b) {
  if (a.alphabet_ != b.alphabet_)
    throw std::invalid_argument("sft: alphabet mismatch");
  int r = std::max(a.order_, b.order_);
  const auto total = ipow(static_cast<std::uint64_t>(a.alphabet_), r);
  std::vector<std::uint32_t> both;
  for (std::uint64_t c = 0; c < total; ++c) {
    auto code = static_cast<std::uint32_t>(c);
    if (a.prefix_extendable_code(code, r) && b.prefix_extendable_code(code, r))
      both.push_back(code);
  }
  return Sft(a.alphabet_, r, std::move(both)).empty();
}

std::string Sft::to_json() const {
  nlohmann::json j;
  j["alphabet"] = alphabet_;
  j["order"] = order_;
  std::vector<std::string> forbidden;
  const auto total = ipow(static_cast<std::uint64_t>(alphabet_), order_);
  for (std::uint64_t c = 0; c < total; ++c) {
    if (word_allowed(static_cast<std::uint32_t>(c))) continue;
    std::string w(static_cast<std::size_t>(order_), '0');
    std::uint64_t v = c;
    for (int i = order_ - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] =
          static_cast<char>('0' + v % static_cast<std::uint64_t>(alphabet_));
      v /= static_cast<std::uint64_t>(alphabet_);
    }
    forbidden.push_back(w);
  }
  j["forbidden"] = forbidden;
  return j.dump(2);
}

Sft Sft::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  int alphabet = j.at("alphabet").get<int>();
  int order = j.at("order").get<int>();
  std::vector<std::string> forbidden = j.at("forbidden").get<std::vector<std::string>>();
  std::vector<std::uint32_t> bad;
  for (const auto& w : forbidden) {
    std::uint32_t c = 0;
    for (char ch : w) c = c * static_cast<std::uint32_t>(alphabet) +
                           static_cast<std::uint32_t>(ch - '0');
    bad.push_back(c);
  }
  std::sort(bad.begin(), bad.end());
  std::vector<std::uint32_t> allowed;
  const auto total = ipow(static_cast<std::uint64_t>(alphabet), order);
  for (std::uint64_t c = 0; c < total; ++c) {
    if (!std::binary_search(bad.begin(), bad.end(), static_cast<std::uint32_t>(c)))
      allowed.push_back(static_cast<std::uint32_t>(c));
  }
  return Sft(alphabet, order, std::move(allowed));
}

Sft runlength_sft(int gap, bool flipped) {
  if (gap < 1) throw std::invalid_argument("runlength_sft: gap >= 1");
  int order = gap + 1;
  const auto total = ipow(2, order);
  std::vector<std::uint32_t> allowed;
  for (std::uint64_t c = 0; c < total; ++c) {
    std::uint64_t v = flipped ? ~c & (total - 1) : c;
    // reject any two 1s within distance <= gap
    bool ok = true;
    int last_one = -1000;
    for (int i = order - 1; i >= 0; --i) {
      if ((v >> i) & 1u) {
        int pos = order - 1 - i;
        if (pos - last_one <= gap) {
          ok = false;
          break;
        }
        last_one = pos;
      }
    }
    if (ok) allowed.push_back(static_cast<std::uint32_t>(c));
  }
  return Sft(2, order, std::move(allowed));
}

double sft_entropy(const Sft& x) {
  if (x.empty()) throw std::domain_error("sft_entropy: empty shift");
  const auto& words = x.words();
  const int n = static_cast<int>(words.size());
  const auto stride = ipow(static_cast<std::uint64_t>(x.alphabet()), x.order() - 1);
  auto locate = [&](std::uint32_t c) {
    auto it = std::lower_bound(words.begin(), words.end(), c);
    return (it != words.end() && *it == c) ? static_cast<int>(it - words.begin()) : -1;
  };
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::uint32_t suffix = words[static_cast<std::size_t>(i)] % static_cast<std::uint32_t>(stride);
    for (int s = 0; s < x.alphabet(); ++s) {
      int j = locate(suffix * static_cast<std::uint32_t>(x.alphabet()) +
                     static_cast<std::uint32_t>(s));
      if (j >= 0) adj[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  auto comp = scc_ids(adj);
  int ncomp = 0;
  for (int c : comp) ncomp = std::max(ncomp, c + 1);
  double best = -std::numeric_limits<double>::infinity();
  for (int target = 0; target < ncomp; ++target) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (comp[static_cast<std::size_t>(i)] == target) members.push_back(i);
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (std::size_t p = 0; p < members.size(); ++p)
      pos[static_cast<std::size_t>(members[p])] = static_cast<int>(p);
    num::SparseNonnegMatrix m(static_cast<int>(members.size()));
    bool any = false;
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (int j : adj[static_cast<std::size_t>(members[p])]) {
        if (pos[static_cast<std::size_t>(j)] >= 0) {
          m.add(static_cast<int>(p), pos[static_cast<std::size_t>(j)], num::LogScalar::one());
          any = true;
        }
      }
    }
    if (!any) continue;  // transient singleton
    best = std::max(best, num::perron(m).value.log());
  }
  if (!std::isfinite(best)) throw std::domain_error("sft_entropy: no recurrent part");
  return best;
}

EntropyLadder entropy_ladder(int levels, const std::function<int(int)>& gap) {
  EntropyLadder l;
  l.levels = levels;
  int prev_gap = 0;
  for (int m = 0; m <= levels; ++m) {
    int g = gap(m);
    if (m > 0 && g <= prev_gap)
      throw std::runtime_error("entropy_ladder: gaps must strictly increase at m=" +
                               std::to_string(m));
    prev_gap = g;
    l.plus.push_back(runlength_sft(g, false));
    l.minus.push_back(runlength_sft(g, true));
    if (l.plus.back().empty())
      throw std::runtime_error("entropy_ladder: empty member at m=" + std::to_string(m));
    l.entropy_plus.push_back(sft_entropy(l.plus.back()));
    l.entropy_minus.push_back(sft_entropy(l.minus.back()));
  }
  if (!Sft::intersection_empty(l.plus[0], l.minus[0]))
    throw std::runtime_error("entropy_ladder: level-0 members are not disjoint");
  for (int m = 0; m < levels; ++m) {
    auto mu = static_cast<std::size_t>(m);
    if (!Sft::subset_of(l.plus[mu + 1], l.plus[mu]) ||
        !Sft::subset_of(l.minus[mu + 1], l.minus[mu]))
      throw std::runtime_error("entropy_ladder: nesting fails at m=" + std::to_string(m + 1));
    // interlaced strict drops (flip pairs share entropy, so one check each way)
    if (!(l.entropy_minus[mu + 1] < l.entropy_plus[mu] - 1e-9) ||
        !(l.entropy_plus[mu + 1] < l.entropy_minus[mu] - 1e-9))
      throw std::runtime_error("entropy_ladder: interlacing fails at m=" +
                               std::to_string(m + 1));
  }
  return l;
}

Sft sft_word_approximants(const std::function<bool(const std::vector<int>&)>& oracle,
                          int ell, int alphabet) {
  const auto total = ipow(static_cast<std::uint64_t>(alphabet), ell);
  std::vector<std::uint32_t> allowed;
  std::vector<int> buf(static_cast<std::size_t>(ell));
  for (std::uint64_t c = 0; c < total; ++c) {
    std::uint64_t v = c;
    for (int i = ell - 1; i >= 0; --i) {
      buf[static_cast<std::size_t>(i)] = static_cast<int>(v % static_cast<std::uint64_t>(alphabet));
      v /= static_cast<std::uint64_t>(alphabet);
    }
    if (oracle(buf)) allowed.push_back(static_cast<std::uint32_t>(c));
  }
  Sft out(alphabet, ell, std::move(allowed));
  if (out.empty()) throw std::runtime_error("sft_word_approximants: oracle rejects everything");
  return out;
}

double Distance::value() const { return std::ldexp(1.0, -matched); }

Distance dist_to_union(const std::vector<int>& prefix,
                       const std::vector<const Sft*>& targets) {
  Distance d;
  d.prefix_len = static_cast<int>(prefix.size());
  int best = 0;
  for (const Sft* t : targets) {
    int len = 0;
    std::vector<int> partial;
    partial.reserve(prefix.size());
    for (int s : prefix) {
      partial.push_back(s);
      if (!t->prefix_extendable(partial)) break;
      ++len;
    }
    best = std::max(best, len);
  }
  d.matched = best;
  d.saturated = best == d.prefix_len;
  return d;
}

}  // namespace gibbslab::sym
