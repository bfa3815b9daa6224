#pragma once

#include <map>
#include <optional>
#include <vector>

#include "cst/measures.hpp"
#include "cst/tree.hpp"
#include "cst/word.hpp"

namespace cst {

// Convolution operation attached to a level selection L = {l_0 < ... < l_{e-1}}:
// cv_L(t, x) interleaves t at the positions of L and x at the remaining
// positions below l_{|t|}.  With a host tree V (L inside {0..dim V}) the
// result is pushed through I_V.  X_L = [k]^{n_L} with n_L = max(L) - |L| + 1.
struct ConvMap {
  int k = 2;
  std::vector<int> L;
  std::optional<CSTree> host;

  ConvMap(int k_, std::vector<int> L_, std::optional<CSTree> host_ = std::nullopt);

  int ell() const { return static_cast<int>(L.size()); }
  int nL() const { return L.back() - ell() + 1; }
  uint64_t x_count() const { return pow_u64(k, nL()); }
  std::vector<Word> x_space() const { return all_words(k, nL()); }

  // cv_L itself, before the host isomorphism.
  Word conv_coord(const Word& t, const Word& x) const;
  // cv_L or cv_{L,V}.
  Word conv(const Word& t, const Word& x) const;

  // Omega_t = image of {t} x X_L, in lexicographic order of the x prefix.
  std::vector<Word> omega(const Word& t) const;
  // Y^t_s = {x : conv(t,x) = s}; throws when s is not in Omega_t.
  std::vector<Word> fiber(const Word& t, const Word& s) const;
  // Lexicographically least element of Y^t_s.
  Word fiber_rep(const Word& t, const Word& s) const;
  // g_{t,t'}(s) = conv(t', x_s); requires |t| = |t'|.
  Word transfer(const Word& t, const Word& t2, const Word& s) const;
};

// B = cv^{-1}(A) materialized as per-t sections over x ranks.
struct Pullback {
  ConvMap map;
  std::map<Word, boost::dynamic_bitset<>> sections;

  const boost::dynamic_bitset<>& section(const Word& t) const;
  // |B n ({t} x X_L)| / |X_L|
  Q section_density(const Word& t) const;
};

// Materializes cv^{-1}(A); the budget bounds |[k]^{<ell}| * |X_L|.
Pullback pullback(const ConvMap& M, const LevelSet& A, uint64_t budget = uint64_t{1} << 20);

// The tree S_x with cv_L(t, x) = I_{S_x}(t): stem and generators are cut out
// of x by the J-blocks.  Defined for |L| >= 2.
CSTree fiber_coord_tree(const ConvMap& M, const Word& x);

// W_x = {cv_{L,V}(w, x) : w in W} as a tree: the image of W through S_x and
// then the host.  W must lie inside [k]^{<|L|}.
CSTree fiber_tree(const ConvMap& M, const CSTree& W, const Word& x);

// Compatible pair (L_0..L_d, V_0..V_d): L_n inside {0..dim V_n} and each
// V_{n+1} inside [k]^{<|L_n|}.  Iterated convolution runs from index d down
// to 0.
struct CompatiblePair {
  int k = 2;
  std::vector<std::vector<int>> bl;
  std::vector<CSTree> bv;

  CompatiblePair(int k_, std::vector<std::vector<int>> bl_, std::vector<CSTree> bv_);

  int d() const { return static_cast<int>(bl.size()) - 1; }
  ConvMap level_map(int n) const;
  // Initial subsequence (L_0..L_n, V_0..V_n).
  CompatiblePair prefix(int n) const;

  uint64_t x_count() const;
  // All tuples of X_bl in odometer order (last factor fastest).
  std::vector<std::vector<Word>> x_space() const;

  // cv_{bl,bv}(s, x_0..x_d)
  Word iterate(const Word& s, const std::vector<Word>& xs) const;
  // qv_{bl,bv}(t, x_0..x_d) = (cv_{L_d,V_d}(t, x_d), x_0..x_{d-1}); needs d >= 1.
  std::pair<Word, std::vector<Word>> quotient(const Word& t, const std::vector<Word>& xs) const;
};

// W_bx from Lemma 6.4: the iterated fiber tree, a subtree of V_0 of the same
// dimension as W.
CSTree iterated_fiber_tree(const CompatiblePair& P, const CSTree& W,
                           const std::vector<Word>& xs);

// dens_{X_bl}(A^d_t) where A^d = cv_{bl,bv}^{-1}(A); enumerates X_bl under
// the budget.
Q iterated_section_density(const CompatiblePair& P, const LevelSet& A, const Word& t,
                           uint64_t budget = uint64_t{1} << 20);

}  // namespace cst
