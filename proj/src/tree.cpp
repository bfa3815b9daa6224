#include "cst/tree.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cst {

CSTree::CSTree() : memo_(std::make_shared<Memo>()) {}

CSTree::CSTree(int k_, Word c_, std::vector<VariableWord> ws_)
    : k(k_), c(std::move(c_)), ws(std::move(ws_)), memo_(std::make_shared<Memo>()) {
  // Normalize the per-generator alphabet so that equality of trees does not
  // depend on how the generators were produced.
  int amb = ambient();
  for (auto& w : ws) {
    w.k = amb;
    w.m = 1;
  }
}

bool CSTree::valid() const {
  if (k < 1 || ws.empty()) return false;
  for (int l : c.letters)
    if (is_var(l) || l < 1) return false;
  for (const auto& w : ws) {
    if (w.letters.empty() || w.letters[0] != var_code(0)) return false;
    for (int l : w.letters)
      if (l != var_code(0) && (is_var(l) || l < 1)) return false;
  }
  return true;
}

int CSTree::ambient() const {
  int amb = k;
  for (int l : c.letters) amb = std::max(amb, l);
  for (const auto& w : ws)
    for (int l : w.letters)
      if (!is_var(l)) amb = std::max(amb, l);
  return amb;
}

int CSTree::level_len(int n) const {
  if (n < 0 || n > dim()) throw std::out_of_range("tree level out of range");
  int len = c.size();
  for (int i = 0; i < n; ++i) len += ws[static_cast<size_t>(i)].size();
  return len;
}

std::vector<int> CSTree::level_values() const {
  std::vector<int> out;
  int len = c.size();
  out.push_back(len);
  for (const auto& w : ws) {
    len += w.size();
    out.push_back(len);
  }
  return out;
}

Word CSTree::iso(const Word& s) const {
  if (s.size() > dim()) throw std::invalid_argument("coordinate word too long");
  std::vector<int> out = c.letters;
  for (int i = 0; i < s.size(); ++i) {
    int a = s(i);
    if (a < 1 || a > k) throw std::invalid_argument("coordinate letter out of range");
    for (int l : ws[static_cast<size_t>(i)].letters) out.push_back(is_var(l) ? a : l);
  }
  return Word(std::move(out));
}

std::optional<Word> CSTree::coords(const Word& t) const {
  int n = -1;
  int len = c.size();
  if (t.size() == len) n = 0;
  for (int i = 0; i < dim() && n < 0; ++i) {
    len += ws[static_cast<size_t>(i)].size();
    if (t.size() == len) n = i + 1;
  }
  if (n < 0) return std::nullopt;
  for (int p = 0; p < c.size(); ++p)
    if (t(p) != c(p)) return std::nullopt;
  std::vector<int> a;
  int pos = c.size();
  for (int i = 0; i < n; ++i) {
    const auto& w = ws[static_cast<size_t>(i)];
    int ai = t(pos);  // generators are left variable words
    if (ai < 1 || ai > k) return std::nullopt;
    for (int l : w.letters) {
      if (t(pos) != (is_var(l) ? ai : l)) return std::nullopt;
      ++pos;
    }
    a.push_back(ai);
  }
  return Word(std::move(a));
}

const std::vector<std::vector<Word>>& CSTree::levels() const {
  std::call_once(memo_->once, [&] {
    auto& lv = memo_->lv;
    lv.resize(static_cast<size_t>(dim()) + 1);
    lv[0] = {c};
    for (int n = 0; n < dim(); ++n) {
      const auto& w = ws[static_cast<size_t>(n)];
      auto& next = lv[static_cast<size_t>(n) + 1];
      next.reserve(lv[static_cast<size_t>(n)].size() * static_cast<size_t>(k));
      for (const auto& t : lv[static_cast<size_t>(n)])
        for (int a = 1; a <= k; ++a) next.push_back(t.concat(w.substitute1(a)));
    }
  });
  return memo_->lv;
}

const std::vector<Word>& CSTree::level(int n) const {
  if (n < 0 || n > dim()) throw std::out_of_range("tree level out of range");
  return levels()[static_cast<size_t>(n)];
}

LevelSet CSTree::point_set() const {
  LevelSet out(ambient());
  for (const auto& lv : levels())
    for (const auto& t : lv) out.insert(t);
  return out;
}

uint64_t CSTree::point_count() const {
  uint64_t total = 0, lv = 1;
  for (int n = 0; n <= dim(); ++n, lv *= static_cast<uint64_t>(k)) total += lv;
  return total;
}

bool operator==(const CSTree& a, const CSTree& b) {
  return a.k == b.k && a.c == b.c && a.ws == b.ws;
}

std::strong_ordering compare_trees(const CSTree& a, const CSTree& b) {
  if (a.dim() != b.dim()) return a.dim() <=> b.dim();
  auto la = a.level_values(), lb = b.level_values();
  if (la != lb) return la < lb ? std::strong_ordering::less : std::strong_ordering::greater;
  if (auto cmp = compare_words(a.c, b.c); cmp != 0) return cmp;
  for (int i = 0; i < a.dim(); ++i)
    if (auto cmp = compare_varwords(a.ws[static_cast<size_t>(i)], b.ws[static_cast<size_t>(i)]);
        cmp != 0)
      return cmp;
  return std::strong_ordering::equal;
}

CSTree full_tree(int k, int n) {
  if (n < 1) throw std::invalid_argument("full tree needs dimension >= 1");
  std::vector<VariableWord> ws(static_cast<size_t>(n), VariableWord(k, 1, {var_code(0)}));
  return CSTree(k, Word{}, std::move(ws));
}

Word transfer(const CSTree& W, const CSTree& U, const Word& t) {
  if (W.dim() != U.dim()) throw std::invalid_argument("transfer needs equal dimensions");
  auto s = W.coords(t);
  if (!s) throw std::invalid_argument("word not in source tree");
  return U.iso(*s);
}

CSTree map_tree(const CSTree& W, const CSTree& T) {
  if (T.level_len(T.dim()) > W.dim())
    throw std::invalid_argument("coordinate tree does not fit in host");
  Word stem = W.iso(T.c);
  std::vector<VariableWord> gens;
  int q = T.c.size();  // next host generator index
  for (const auto& u : T.ws) {
    std::vector<int> out;
    for (int l : u.letters) {
      const auto& hw = W.ws[static_cast<size_t>(q)];
      if (is_var(l)) {
        out.insert(out.end(), hw.letters.begin(), hw.letters.end());
      } else {
        if (l > W.k) throw std::invalid_argument("coordinate letter out of range");
        Word img = hw.substitute1(l);
        out.insert(out.end(), img.letters.begin(), img.letters.end());
      }
      ++q;
    }
    gens.emplace_back(W.ambient(), 1, std::move(out));
  }
  return CSTree(T.k, std::move(stem), std::move(gens));
}

void for_each_coordinate_tree(int k, int dim_host, int ell,
                              const std::function<bool(const CSTree&)>& f, int top_level,
                              bool rooted_at_origin) {
  if (ell < 1 || ell > dim_host) return;
  // Level sets {lambda_0 < ... < lambda_ell} as combinations of {0..dim_host},
  // in lexicographic order.
  std::vector<int> lambda(static_cast<size_t>(ell) + 1);
  for (int i = 0; i <= ell; ++i) lambda[static_cast<size_t>(i)] = i;
  if (rooted_at_origin && lambda[0] != 0) return;
  bool done = false;
  auto emit = [&](const std::vector<int>& lv) {
    if (top_level >= 0 && lv.back() != top_level) return;
    if (rooted_at_origin && lv[0] != 0) return;
    auto stems = rooted_at_origin ? std::vector<Word>{Word{}} : all_words(k, lv[0]);
    std::vector<std::vector<VariableWord>> choices;
    for (int j = 0; j < ell; ++j)
      choices.push_back(enumerate_left_variable_words(
          k, lv[static_cast<size_t>(j) + 1] - lv[static_cast<size_t>(j)]));
    std::vector<size_t> idx(static_cast<size_t>(ell), 0);
    for (const auto& stem : stems) {
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        std::vector<VariableWord> gens;
        gens.reserve(static_cast<size_t>(ell));
        for (int j = 0; j < ell; ++j)
          gens.push_back(choices[static_cast<size_t>(j)][idx[static_cast<size_t>(j)]]);
        if (!f(CSTree(k, stem, std::move(gens)))) {
          done = true;
          return;
        }
        int j = ell - 1;
        while (j >= 0 && ++idx[static_cast<size_t>(j)] == choices[static_cast<size_t>(j)].size()) {
          idx[static_cast<size_t>(j)] = 0;
          --j;
        }
        if (j < 0) break;
      }
    }
  };
  while (!done) {
    emit(lambda);
    if (done) break;
    // next combination
    int i = ell;
    while (i >= 0 && lambda[static_cast<size_t>(i)] == dim_host - (ell - i)) --i;
    if (i < 0) break;
    ++lambda[static_cast<size_t>(i)];
    for (int j = i + 1; j <= ell; ++j)
      lambda[static_cast<size_t>(j)] = lambda[static_cast<size_t>(j) - 1] + 1;
    if (rooted_at_origin && lambda[0] != 0) break;
  }
}

std::vector<CSTree> enumerate_subtrees(const CSTree& W, int ell) {
  if (ell < 1 || ell > W.dim()) throw std::invalid_argument("subtree dimension out of range");
  std::vector<CSTree> out;
  for_each_coordinate_tree(W.k, W.dim(), ell, [&](const CSTree& T) {
    out.push_back(map_tree(W, T));
    return true;
  });
  return out;
}

std::vector<CSTree> subtrees_max(const CSTree& W, int ell) {
  if (ell < 1 || ell > W.dim()) throw std::invalid_argument("subtree dimension out of range");
  std::vector<CSTree> out;
  for_each_coordinate_tree(
      W.k, W.dim(), ell,
      [&](const CSTree& T) {
        out.push_back(map_tree(W, T));
        return true;
      },
      W.dim());
  return out;
}

std::vector<CSTree> subtr0(const CSTree& V, int m, int i) {
  if (m < 1 || m > i || i > V.dim()) throw std::invalid_argument("subtr0 range violation");
  std::vector<CSTree> out;
  for_each_coordinate_tree(
      V.k, V.dim(), m,
      [&](const CSTree& T) {
        out.push_back(map_tree(V, T));
        return true;
      },
      i, true);
  return out;
}

bool is_subtree(const CSTree& W, const CSTree& V) {
  for (const auto& lv : V.levels())
    for (const auto& t : lv)
      if (!W.contains(t)) return false;
  return true;
}

int depth(const CSTree& W, const CSTree& V) {
  if (!is_subtree(W, V)) throw std::invalid_argument("not a subtree");
  int top = V.level_len(V.dim());
  for (int i = 0; i <= W.dim(); ++i)
    if (W.level_len(i) == top) return i;
  throw std::invalid_argument("not a subtree");  // unreachable after membership check
}

CSTree restrict_alphabet(const CSTree& W, int k2) {
  if (k2 < 1 || k2 > W.k) throw std::invalid_argument("restriction alphabet out of range");
  return CSTree(k2, W.c, W.ws);
}

CSTree extend(const CSTree& U) { return CSTree(U.k + 1, U.c, U.ws); }

std::variant<Word, CSTree> wedge(const CSTree& W, int r) {
  if (r < 1 || r > W.k) throw std::invalid_argument("wedge letter out of range");
  Word stem = W.c.concat(W.ws[0].substitute1(r));
  if (W.dim() == 1) return stem;
  return CSTree(W.k, std::move(stem),
                std::vector<VariableWord>(W.ws.begin() + 1, W.ws.end()));
}

CSTree drop_top(const CSTree& W) {
  if (W.dim() < 2) throw std::invalid_argument("drop_top needs dimension >= 2");
  return CSTree(W.k, W.c, std::vector<VariableWord>(W.ws.begin(), W.ws.end() - 1));
}

std::vector<Word> successors(const CSTree& W, const Word& t, bool leftOnly) {
  auto s = W.coords(t);
  if (!s) throw std::invalid_argument("word not in tree");
  int n = s->size();
  std::vector<Word> out;
  for (int j = n; j < W.dim(); ++j) {
    // extensions of t up to level j+1
    std::vector<Word> cur = {t};
    for (int i = n; i <= j; ++i) {
      std::vector<Word> next;
      int hi = (i == n && leftOnly) ? 1 : W.k;
      for (const auto& u : cur)
        for (int a = 1; a <= hi; ++a)
          next.push_back(u.concat(W.ws[static_cast<size_t>(i)].substitute1(a)));
      cur = std::move(next);
    }
    out.insert(out.end(), cur.begin(), cur.end());
  }
  return out;
}

CombSubspace level_subspace(const CSTree& W, int n) {
  if (n < 1 || n > W.dim()) throw std::out_of_range("tree level out of range");
  std::vector<int> ls = W.c.letters;
  for (int i = 0; i < n; ++i)
    for (int l : W.ws[static_cast<size_t>(i)].letters)
      ls.push_back(is_var(l) ? var_code(i) : l);
  return CombSubspace{VariableWord(W.k, n, std::move(ls))};
}

std::optional<CSTree> reconstruct_tree(const std::vector<std::vector<Word>>& levels) {
  if (levels.size() < 2 || levels[0].size() != 1) return std::nullopt;
  size_t k = levels[1].size();
  if (k < 2) return std::nullopt;  // the normal form is only unique for branching >= 2
  Word c = levels[0][0];
  std::vector<VariableWord> ws;
  std::vector<Word> cur = {c};
  for (size_t n = 1; n < levels.size(); ++n) {
    if (levels[n].size() != cur.size() * k) return std::nullopt;
    const Word& x0 = cur[0];
    // The k extensions of x0 at the next level, keyed by their first letter:
    // generators are left variable words, so the letter after x0 is the
    // substituted value.
    std::vector<Word> segs(k);
    std::vector<bool> seen(k, false);
    for (const auto& y : levels[n]) {
      if (y.size() <= x0.size()) return std::nullopt;
      bool pref = true;
      for (int p = 0; p < x0.size() && pref; ++p) pref = y(p) == x0(p);
      if (!pref) continue;
      int a = y(x0.size());
      if (a < 1 || a > static_cast<int>(k) || seen[static_cast<size_t>(a - 1)])
        return std::nullopt;
      seen[static_cast<size_t>(a - 1)] = true;
      segs[static_cast<size_t>(a - 1)] =
          Word(std::vector<int>(y.letters.begin() + x0.size(), y.letters.end()));
    }
    for (bool b : seen)
      if (!b) return std::nullopt;
    std::vector<int> gen;
    int len = segs[0].size();
    for (const auto& s : segs)
      if (s.size() != len) return std::nullopt;
    for (int p = 0; p < len; ++p) {
      bool varies = false;
      for (size_t a = 1; a < k; ++a) varies |= segs[a](p) != segs[0](p);
      if (varies || segs[0](p) == 1) {
        // candidate variable position: every segment must carry its own value
        bool all_match = true;
        for (size_t a = 0; a < k && all_match; ++a)
          all_match = segs[a](p) == static_cast<int>(a) + 1;
        if (all_match) {
          gen.push_back(var_code(0));
          continue;
        }
        if (varies) return std::nullopt;
      }
      gen.push_back(segs[0](p));
    }
    VariableWord w(static_cast<int>(k), 1, std::move(gen));
    if (!w.left_variable()) return std::nullopt;
    // verify the whole level, not just x0's extensions
    std::vector<Word> next;
    for (const auto& x : cur)
      for (int a = 1; a <= static_cast<int>(k); ++a) next.push_back(x.concat(w.substitute1(a)));
    std::vector<Word> got = levels[n];
    std::sort(next.begin(), next.end());
    std::sort(got.begin(), got.end());
    if (next != got) return std::nullopt;
    ws.push_back(std::move(w));
    cur = levels[n];
  }
  CSTree out(static_cast<int>(k), std::move(c), std::move(ws));
  if (!out.valid()) return std::nullopt;
  return out;
}

}  // namespace cst
