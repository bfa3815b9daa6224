#include "cst/convolution.hpp"

#include <algorithm>
#include <stdexcept>

namespace cst {

ConvMap::ConvMap(int k_, std::vector<int> L_, std::optional<CSTree> host_)
    : k(k_), L(std::move(L_)), host(std::move(host_)) {
  if (k < 2) throw std::invalid_argument("alphabet too small");
  if (L.empty()) throw std::invalid_argument("empty level selection");
  for (size_t i = 0; i < L.size(); ++i) {
    if (L[i] < 0) throw std::invalid_argument("negative level");
    if (i && L[i] <= L[i - 1]) throw std::invalid_argument("levels must increase");
  }
  if (host) {
    if (!host->valid() || host->k != k || host->ambient() != k)
      throw std::invalid_argument("host is not a tree over [k]");
    if (L.back() > host->dim()) throw std::invalid_argument("levels exceed host dimension");
  }
}

Word ConvMap::conv_coord(const Word& t, const Word& x) const {
  int i = t.size();
  if (i >= ell()) throw std::invalid_argument("t too long");
  if (x.size() != nL()) throw std::invalid_argument("x has wrong length");
  int li = L[static_cast<size_t>(i)];
  std::vector<int> out;
  out.reserve(static_cast<size_t>(li));
  int tj = 0, xj = 0;
  for (int p = 0; p < li; ++p) {
    if (std::binary_search(L.begin(), L.end(), p))
      out.push_back(t(tj++));
    else
      out.push_back(x(xj++));
  }
  return Word(std::move(out));
}

Word ConvMap::conv(const Word& t, const Word& x) const {
  Word w = conv_coord(t, x);
  return host ? host->iso(w) : w;
}

std::vector<Word> ConvMap::omega(const Word& t) const {
  int i = t.size();
  if (i >= ell()) throw std::invalid_argument("t too long");
  int used = L[static_cast<size_t>(i)] - i;  // letters of x that matter
  std::vector<Word> out;
  Word pad(std::vector<int>(static_cast<size_t>(nL() - used), 1));
  for (const auto& y : all_words(k, used)) out.push_back(conv(t, y.concat(pad)));
  return out;
}

std::vector<Word> ConvMap::fiber(const Word& t, const Word& s) const {
  Word rep = fiber_rep(t, s);
  int used = L[static_cast<size_t>(t.size())] - t.size();
  std::vector<Word> out;
  Word pre = rep.prefix(used);
  for (const auto& tail : all_words(k, nL() - used)) out.push_back(pre.concat(tail));
  return out;
}

Word ConvMap::fiber_rep(const Word& t, const Word& s) const {
  int i = t.size();
  if (i >= ell()) throw std::invalid_argument("t too long");
  Word sc = s;
  if (host) {
    auto c = host->coords(s);
    if (!c) throw std::invalid_argument("word not in host");
    sc = *c;
  }
  int li = L[static_cast<size_t>(i)];
  if (sc.size() != li) throw std::invalid_argument("word not in Omega_t");
  std::vector<int> x;
  int tj = 0;
  for (int p = 0; p < li; ++p) {
    if (std::binary_search(L.begin(), L.end(), p)) {
      if (sc(p) != t(tj++)) throw std::invalid_argument("word not in Omega_t");
    } else {
      x.push_back(sc(p));
    }
  }
  while (static_cast<int>(x.size()) < nL()) x.push_back(1);
  return Word(std::move(x));
}

Word ConvMap::transfer(const Word& t, const Word& t2, const Word& s) const {
  if (t.size() != t2.size()) throw std::invalid_argument("transfer needs |t| = |t'|");
  return conv(t2, fiber_rep(t, s));
}

const boost::dynamic_bitset<>& Pullback::section(const Word& t) const {
  auto it = sections.find(t);
  if (it == sections.end()) throw std::invalid_argument("no such section");
  return it->second;
}

Q Pullback::section_density(const Word& t) const {
  const auto& bs = section(t);
  Q d(static_cast<unsigned long>(bs.count()), static_cast<unsigned long>(bs.size()));
  d.canonicalize();
  return d;
}

Pullback pullback(const ConvMap& M, const LevelSet& A, uint64_t budget) {
  uint64_t words = 0, lv = 1;
  for (int i = 0; i < M.ell(); ++i, lv *= static_cast<uint64_t>(M.k)) words += lv;
  uint64_t xs = M.x_count();
  if (words > budget / xs) throw budget_error("pullback budget exceeded");
  Pullback out{M, {}};
  auto xspace = M.x_space();
  for (int i = 0; i < M.ell(); ++i)
    for (const auto& t : all_words(M.k, i)) {
      boost::dynamic_bitset<> bs(xs);
      for (uint64_t r = 0; r < xs; ++r)
        if (A.contains(M.conv(t, xspace[r]))) bs.set(r);
      out.sections.emplace(t, std::move(bs));
    }
  return out;
}

CSTree fiber_coord_tree(const ConvMap& M, const Word& x) {
  int e = M.ell();
  if (e < 2) throw std::invalid_argument("need |L| >= 2");
  if (x.size() != M.nL()) throw std::invalid_argument("x has wrong length");
  // J_0 = {n < l_0}; J_{i+1} = {l_i - i, ..., l_{i+1} - i - 2}: the blocks of
  // x between consecutive selected levels, shifted left by the number of
  // selected positions passed so far.
  Word c = x.prefix(M.L[0]);
  std::vector<VariableWord> ws;
  for (int i = 0; i + 1 < e; ++i) {
    std::vector<int> gen = {var_code(0)};
    int lo = M.L[static_cast<size_t>(i)] - i;
    int hi = M.L[static_cast<size_t>(i) + 1] - i - 2;
    for (int n = lo; n <= hi; ++n) gen.push_back(x(n));
    ws.emplace_back(M.k, 1, std::move(gen));
  }
  return CSTree(M.k, std::move(c), std::move(ws));
}

CSTree fiber_tree(const ConvMap& M, const CSTree& W, const Word& x) {
  if (W.level_len(W.dim()) > M.ell() - 1)
    throw std::invalid_argument("tree not inside [k]^{<|L|}");
  CSTree S = map_tree(fiber_coord_tree(M, x), W);
  return M.host ? map_tree(*M.host, S) : S;
}

CompatiblePair::CompatiblePair(int k_, std::vector<std::vector<int>> bl_,
                               std::vector<CSTree> bv_)
    : k(k_), bl(std::move(bl_)), bv(std::move(bv_)) {
  if (bl.empty() || bl.size() != bv.size())
    throw std::invalid_argument("sequences must be nonempty with equal length");
  for (size_t n = 0; n < bl.size(); ++n) {
    ConvMap check(k, bl[n], bv[n]);  // validates L_n against V_n
    if (n + 1 < bl.size()) {
      const CSTree& next = bv[n + 1];
      if (next.level_len(next.dim()) + 1 > static_cast<int>(bl[n].size()))
        throw std::invalid_argument("V_{n+1} not inside [k]^{<|L_n|}");
    }
  }
}

ConvMap CompatiblePair::level_map(int n) const {
  return ConvMap(k, bl[static_cast<size_t>(n)], bv[static_cast<size_t>(n)]);
}

CompatiblePair CompatiblePair::prefix(int n) const {
  if (n < 0 || n > d()) throw std::out_of_range("prefix length out of range");
  return CompatiblePair(
      k, std::vector<std::vector<int>>(bl.begin(), bl.begin() + n + 1),
      std::vector<CSTree>(bv.begin(), bv.begin() + n + 1));
}

uint64_t CompatiblePair::x_count() const {
  uint64_t total = 1;
  for (int n = 0; n <= d(); ++n) {
    uint64_t c = level_map(n).x_count();
    if (c != 0 && total > (uint64_t{1} << 62) / c) throw std::overflow_error("X_bl too large");
    total *= c;
  }
  return total;
}

std::vector<std::vector<Word>> CompatiblePair::x_space() const {
  std::vector<std::vector<Word>> factors;
  for (int n = 0; n <= d(); ++n) factors.push_back(level_map(n).x_space());
  std::vector<std::vector<Word>> out;
  std::vector<size_t> idx(factors.size(), 0);
  while (true) {
    std::vector<Word> tuple;
    for (size_t n = 0; n < factors.size(); ++n) tuple.push_back(factors[n][idx[n]]);
    out.push_back(std::move(tuple));
    size_t n = factors.size();
    bool done = true;
    while (n > 0) {
      --n;
      if (++idx[n] < factors[n].size()) {
        done = false;
        break;
      }
      idx[n] = 0;
    }
    if (done) break;
  }
  return out;
}

Word CompatiblePair::iterate(const Word& s, const std::vector<Word>& xs) const {
  if (static_cast<int>(xs.size()) != d() + 1)
    throw std::invalid_argument("tuple length mismatch");
  Word cur = s;
  for (int n = d(); n >= 0; --n) cur = level_map(n).conv(cur, xs[static_cast<size_t>(n)]);
  return cur;
}

std::pair<Word, std::vector<Word>> CompatiblePair::quotient(
    const Word& t, const std::vector<Word>& xs) const {
  if (d() < 1) throw std::invalid_argument("quotient needs d >= 1");
  if (static_cast<int>(xs.size()) != d() + 1)
    throw std::invalid_argument("tuple length mismatch");
  Word s = level_map(d()).conv(t, xs.back());
  return {std::move(s), std::vector<Word>(xs.begin(), xs.end() - 1)};
}

CSTree iterated_fiber_tree(const CompatiblePair& P, const CSTree& W,
                           const std::vector<Word>& xs) {
  if (static_cast<int>(xs.size()) != P.d() + 1)
    throw std::invalid_argument("tuple length mismatch");
  CSTree cur = W;
  for (int n = P.d(); n >= 0; --n)
    cur = fiber_tree(P.level_map(n), cur, xs[static_cast<size_t>(n)]);
  return cur;
}

Q iterated_section_density(const CompatiblePair& P, const LevelSet& A, const Word& t,
                           uint64_t budget) {
  uint64_t total = P.x_count();
  if (total > budget) throw budget_error("iterated section budget exceeded");
  uint64_t hit = 0;
  auto xs = P.x_space();
  for (const auto& tuple : xs)
    if (A.contains(P.iterate(t, tuple))) ++hit;
  Q out(static_cast<unsigned long>(hit), static_cast<unsigned long>(xs.size()));
  out.canonicalize();
  return out;
}

}  // namespace cst
