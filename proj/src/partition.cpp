#include "cst/partition.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <thread>

namespace cst {

namespace {

void check_color_range(int c, int r) {
  if (c < 1 || c > r) throw std::invalid_argument("color outside [r]");
}

}  // namespace

bool SpaceColoring::valid() const {
  if (r < 1 || color.size() != domain.size()) return false;
  for (int c : color)
    if (c < 1 || c > r) return false;
  return true;
}

int SpaceColoring::color_of(const CombSubspace& s) const {
  for (size_t i = 0; i < domain.size(); ++i)
    if (domain[i].gen == s.gen) return color[i];
  throw std::invalid_argument("subspace outside the coloring domain");
}

bool TreeColoring::valid() const {
  if (r < 1 || color.size() != domain.size()) return false;
  for (int c : color)
    if (c < 1 || c > r) return false;
  return true;
}

int TreeColoring::color_of(const CSTree& t) const {
  for (size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == t) return color[i];
  throw std::invalid_argument("subtree outside the coloring domain");
}

SpaceColoring color_subspaces(const CombSubspace& V, int m, int r,
                              const std::function<int(const CombSubspace&)>& f) {
  SpaceColoring out;
  out.r = r;
  out.domain = enumerate_subspaces(V, m);
  out.color.reserve(out.domain.size());
  for (const CombSubspace& s : out.domain) {
    int c = f(s);
    check_color_range(c, r);
    out.color.push_back(c);
  }
  return out;
}

TreeColoring color_subtrees(const CSTree& W, int m, int r,
                            const std::function<int(const CSTree&)>& f) {
  TreeColoring out;
  out.r = r;
  out.domain = enumerate_subtrees(W, m);
  out.color.reserve(out.domain.size());
  for (const CSTree& t : out.domain) {
    int c = f(t);
    check_color_range(c, r);
    out.color.push_back(c);
  }
  return out;
}

std::optional<CombSubspace> gr_search(const CombSubspace& V, const SpaceColoring& c, int d) {
  if (!c.valid()) throw std::invalid_argument("coloring is not a total map into [r]");
  if (c.domain.empty()) throw std::invalid_argument("coloring domain is empty");
  int m = c.domain.front().dim();
  if (m < 1 || d < m || V.dim() < d) throw std::invalid_argument("need dim(V) >= d >= m >= 1");
  std::vector<CombSubspace> expect = enumerate_subspaces(V, m);
  bool match = expect.size() == c.domain.size();
  for (size_t i = 0; match && i < expect.size(); ++i) match = expect[i].gen == c.domain[i].gen;
  if (!match)
    throw std::invalid_argument("coloring domain must be Subs_m(V) in enumeration order");

  for (const CombSubspace& w : enumerate_subspaces(V, d)) {
    int seen = 0;
    bool mono = true;
    for (const CombSubspace& s : enumerate_subspaces(w, m)) {
      int cc = c.color_of(s);
      if (seen == 0) seen = cc;
      else if (cc != seen) { mono = false; break; }
    }
    if (mono) return w;
  }
  return std::nullopt;
}

std::optional<CSTree> cs_search(const CSTree& W, const TreeColoring& c, int d) {
  if (!c.valid()) throw std::invalid_argument("coloring is not a total map into [r]");
  if (c.domain.empty()) throw std::invalid_argument("coloring domain is empty");
  int m = c.domain.front().dim();
  if (m < 1 || d < m || W.dim() < d) throw std::invalid_argument("need dim(W) >= d >= m >= 1");
  std::vector<CSTree> expect = enumerate_subtrees(W, m);
  bool match = expect.size() == c.domain.size();
  for (size_t i = 0; match && i < expect.size(); ++i) match = expect[i] == c.domain[i];
  if (!match)
    throw std::invalid_argument("coloring domain must be Subtr_m(W) in enumeration order");

  for (const CSTree& u : enumerate_subtrees(W, d)) {
    int seen = 0;
    bool mono = true;
    for (const CSTree& s : enumerate_subtrees(u, m)) {
      int cc = c.color_of(s);
      if (seen == 0) seen = cc;
      else if (cc != seen) { mono = false; break; }
    }
    if (mono) return u;
  }
  return std::nullopt;
}

FocusResult focus_construct(const CSTree& W, const TreeColoring& c, int q,
                            const std::vector<int>& schedule) {
  if (q < 1) throw std::invalid_argument("focus tower needs q >= 1");
  if (!c.valid()) throw std::invalid_argument("coloring is not a total map into [r]");
  if (c.domain.empty()) throw std::invalid_argument("coloring domain is empty");
  int m = c.domain.front().dim();
  if (static_cast<int>(schedule.size()) != q + 1)
    throw std::invalid_argument("schedule must list n_0..n_q");
  if (schedule.back() != m) throw std::invalid_argument("schedule must end at m");
  for (int i = 0; i < q; ++i)
    if (schedule[i] < schedule[i + 1] + 1)
      throw std::invalid_argument("schedule must drop by at least one per stage");
  if (schedule[0] > W.dim()) throw std::invalid_argument("schedule does not fit in the host");
  {
    std::vector<CSTree> expect = enumerate_subtrees(W, m);
    bool match = expect.size() == c.domain.size();
    for (size_t i = 0; match && i < expect.size(); ++i) match = expect[i] == c.domain[i];
    if (!match)
      throw std::invalid_argument("coloring domain must be Subtr_m(W) in enumeration order");
  }

  auto mono_max = [&](const CSTree& t) {
    int seen = 0;
    for (const CSTree& s : subtrees_max(t, m)) {
      int cc = c.color_of(s);
      if (seen == 0) seen = cc;
      else if (cc != seen) return false;
    }
    return true;
  };

  FocusResult out;
  out.family.push_back(subtrees_max(W, schedule[0]).front());
  for (int i = 1; i <= q; ++i) {
    CSTree host = i == 1 ? out.family[0] : drop_top(out.family[i - 1]);
    std::optional<CSTree> found;
    for (const CSTree& cand : subtrees_max(host, schedule[i] + 1)) {
      if (mono_max(cand)) {
        found = cand;
        break;
      }
    }
    if (!found) {
      out.failed_stage = i;
      return out;
    }
    out.family.push_back(*found);
  }

  // Generators of U_q, then the top generator of each earlier stage.  The
  // stage nesting puts each top level inside the previous stage's top, so
  // the extensions stay inside W.
  std::vector<VariableWord> gens = out.family[q].ws;
  for (int i = q - 1; i >= 1; --i) gens.push_back(out.family[i].ws.back());
  CSTree U(W.k, out.family[q].c, gens);

  if (U.dim() != m + q || !is_subtree(W, U) || depth(W, U) != W.dim())
    throw std::logic_error("assembled focus tree leaves Subtr^max of the host");
  std::map<int, int> by_depth;
  for (const CSTree& s : enumerate_subtrees(U, m)) {
    int cc = c.color_of(s);
    auto [it, fresh] = by_depth.emplace(depth(U, s), cc);
    if (!fresh && it->second != cc)
      throw std::logic_error("assembled focus tree colors are not depth-determined");
  }
  out.tree = std::move(U);
  return out;
}

std::vector<int> focus_schedule_desk(int m, int q) {
  if (m < 1 || q < 1) throw std::invalid_argument("need m >= 1 and q >= 1");
  std::vector<int> sched(q + 1);
  for (int i = 0; i <= q; ++i) sched[i] = m + (q - i);
  return sched;
}

std::vector<int> focus_schedule_oracle(int k, int m, int r, int q, const OracleTable& t) {
  if (k < 2 || m < 1 || r < 1 || q < 1)
    throw std::invalid_argument("need k >= 2, m >= 1, r >= 1, q >= 1");
  std::vector<int> sched(q + 1);
  sched[q] = m;
  Q cur(m);
  for (int i = q - 1; i >= 0; --i) {
    BVal v = eval_bound("g", {{"k", Q(k)}, {"m", Q(m)}, {"r", Q(r)}, {"n", cur}}, t);
    if (v.over) throw budget_error("oracle schedule leaves desk scale");
    cur = v.x;
    if (cur.get_den() != 1 || !cur.get_num().fits_sint_p())
      throw budget_error("oracle schedule leaves desk scale");
    sched[i] = static_cast<int>(cur.get_num().get_si());
  }
  return sched;
}

namespace {

struct WitnessMasks {
  size_t domain_size = 0;
  std::vector<std::vector<int>> members;  // witness -> domain indices of its m-family
};

WitnessMasks build_masks(PartitionStatement st, int k, int n, int d, int m) {
  WitnessMasks out;
  if (st == PartitionStatement::GR) {
    std::vector<CombSubspace> dom = enumerate_subspaces_full(k, n, m);
    if (dom.size() > 25) throw budget_error("coloring domain exceeds 25 objects");
    out.domain_size = dom.size();
    std::map<VariableWord, int> index;
    for (size_t i = 0; i < dom.size(); ++i) index.emplace(dom[i].gen, static_cast<int>(i));
    for (const CombSubspace& wit : enumerate_subspaces_full(k, n, d)) {
      std::vector<int> mask;
      for (const CombSubspace& s : enumerate_subspaces(wit, m)) {
        auto it = index.find(s.gen);
        if (it == index.end()) throw std::logic_error("witness family escapes the domain");
        mask.push_back(it->second);
      }
      std::sort(mask.begin(), mask.end());
      out.members.push_back(std::move(mask));
    }
  } else {
    CSTree host = full_tree(k, n);
    std::vector<CSTree> dom = enumerate_subtrees(host, m);
    if (dom.size() > 25) throw budget_error("coloring domain exceeds 25 objects");
    out.domain_size = dom.size();
    std::map<CSTree, int> index;
    for (size_t i = 0; i < dom.size(); ++i) index.emplace(dom[i], static_cast<int>(i));
    for (const CSTree& wit : enumerate_subtrees(host, d)) {
      std::vector<int> mask;
      for (const CSTree& s : enumerate_subtrees(wit, m)) {
        auto it = index.find(s);
        if (it == index.end()) throw std::logic_error("witness family escapes the domain");
        mask.push_back(it->second);
      }
      std::sort(mask.begin(), mask.end());
      out.members.push_back(std::move(mask));
    }
  }
  return out;
}

// Colorings as bit words, object i at bit i; normalization pins object 0 to
// color 1, so the enumeration runs over words shifted up by one bit.  Each
// thread scans an ascending range and records its first failure; the least
// over threads is the least overall.
PropertyCheck property_two(const std::vector<std::vector<int>>& masks, size_t D, bool normalize) {
  std::vector<uint32_t> bits;
  bits.reserve(masks.size());
  for (const std::vector<int>& mk : masks) {
    uint32_t b = 0;
    for (int idx : mk) b |= uint32_t{1} << idx;
    bits.push_back(b);
  }
  auto admits = [&bits](uint32_t w) {
    for (uint32_t mk : bits) {
      uint32_t v = w & mk;
      if (v == 0 || v == mk) return true;
    }
    return false;
  };

  uint64_t total = uint64_t{1} << (normalize ? D - 1 : D);
  unsigned hw = std::thread::hardware_concurrency();
  size_t nt = std::clamp<size_t>(hw == 0 ? 1 : hw, 1, 8);
  if (total < 4096) nt = 1;
  uint64_t chunk = (total + nt - 1) / nt;
  std::vector<uint64_t> first(nt, UINT64_MAX);
  std::vector<std::thread> pool;
  for (size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      uint64_t hi = std::min(total, (t + 1) * chunk);
      for (uint64_t cw = t * chunk; cw < hi; ++cw) {
        if (!admits(static_cast<uint32_t>(normalize ? cw << 1 : cw))) {
          first[t] = cw;
          break;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  uint64_t best = *std::min_element(first.begin(), first.end());
  if (best == UINT64_MAX) return {true, std::nullopt};
  uint32_t w = static_cast<uint32_t>(normalize ? best << 1 : best);
  std::vector<int> col(D);
  for (size_t i = 0; i < D; ++i) col[i] = 1 + ((w >> i) & 1u);
  return {false, std::move(col)};
}

// Restricted-growth recursion: position i may reuse any earlier color or
// open the next one.  Colors are assigned in ascending order, so the first
// failing leaf is the least failing coloring.
PropertyCheck property_many(const std::vector<std::vector<int>>& masks, size_t D, int r,
                            bool normalize) {
  std::vector<int> col(D, 0);
  auto admits = [&] {
    for (const std::vector<int>& mk : masks) {
      int c0 = col[mk.front()];
      bool same = true;
      for (int idx : mk)
        if (col[idx] != c0) {
          same = false;
          break;
        }
      if (same) return true;
    }
    return false;
  };
  std::function<bool(size_t, int)> all_admit = [&](size_t i, int used) -> bool {
    if (i == D) return admits();
    int hi = normalize ? std::min(r, used + 1) : r;
    for (int cc = 1; cc <= hi; ++cc) {
      col[i] = cc;
      if (!all_admit(i + 1, std::max(used, cc))) return false;
    }
    return true;
  };
  if (all_admit(0, 0)) return {true, std::nullopt};
  return {false, std::move(col)};
}

}  // namespace

PropertyCheck partition_property(PartitionStatement st, int k, int n, int d, int m, int r,
                                 uint64_t budget, bool normalize) {
  if (k < 2) throw std::invalid_argument("alphabet needs k >= 2");
  if (m < 1 || d < m || n < d) throw std::invalid_argument("need n >= d >= m >= 1");
  if (r < 1) throw std::invalid_argument("need r >= 1");
  WitnessMasks fam = build_masks(st, k, n, d, m);
  int expo = static_cast<int>(fam.domain_size) - (normalize ? 1 : 0);
  uint64_t leaves = 1;
  for (int i = 0; i < expo; ++i) {
    if (leaves > budget / static_cast<uint64_t>(r))
      throw budget_error("coloring enumeration exceeds budget");
    leaves *= static_cast<uint64_t>(r);
  }
  if (leaves > budget) throw budget_error("coloring enumeration exceeds budget");
  if (r == 2) return property_two(fam.members, fam.domain_size, normalize);
  return property_many(fam.members, fam.domain_size, r, normalize);
}

std::optional<int> minimal_number(PartitionStatement st, int k, int d, int m, int r, int nMax,
                                  uint64_t budget) {
  if (k < 2) throw std::invalid_argument("alphabet needs k >= 2");
  if (m < 1 || d < m) throw std::invalid_argument("need d >= m >= 1");
  if (r < 1) throw std::invalid_argument("need r >= 1");
  for (int n = d; n <= nMax; ++n)
    if (partition_property(st, k, n, d, m, r, budget).holds) return n;
  return std::nullopt;
}

}  // namespace cst
