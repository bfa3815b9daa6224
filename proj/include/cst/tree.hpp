#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "cst/word.hpp"

namespace cst {

// Carlson-Simpson tree, stored by its generating sequence (c, w_0, ..., w_{m-1}).
// The sequence is the unique normal form for the point set.  Level n is
//   { c ^ w_0(a_0) ^ ... ^ w_{n-1}(a_{n-1}) : a_i in [k] },
// so |level n| = k^n and the level lengths l_n = |c| + sum_{i<n} |w_i| are
// strictly increasing.
//
// `k` is the branching alphabet: the substitution values range over [k].
// Constant letters in c and ws may exceed k; this happens for k'-restrictions,
// which keep the generating data and shrink only the substitution alphabet.
// Treat a constructed tree as immutable; levels are memoized behind a
// once-flag, so concurrent readers see either nothing cached or everything.
struct CSTree {
  int k = 2;
  Word c;
  std::vector<VariableWord> ws;

  CSTree();
  CSTree(int k_, Word c_, std::vector<VariableWord> ws_);

  int dim() const { return static_cast<int>(ws.size()); }
  bool valid() const;
  // Smallest alphabet containing k and every constant letter.
  int ambient() const;

  int level_len(int n) const;
  std::vector<int> level_values() const;

  // Canonical isomorphism I_W: coordinate word over [k] -> point of the tree.
  Word iso(const Word& s) const;
  // Inverse of I_W; empty when t is not in the tree.
  std::optional<Word> coords(const Word& t) const;
  bool contains(const Word& t) const { return coords(t).has_value(); }

  const std::vector<Word>& level(int n) const;
  const std::vector<std::vector<Word>>& levels() const;
  LevelSet point_set() const;
  uint64_t point_count() const;

 private:
  struct Memo {
    std::once_flag once;
    std::vector<std::vector<Word>> lv;
  };
  std::shared_ptr<Memo> memo_;
};

bool operator==(const CSTree& a, const CSTree& b);
inline bool operator!=(const CSTree& a, const CSTree& b) { return !(a == b); }
// Order: (dim, level set, stem, generators); used for deterministic output.
std::strong_ordering compare_trees(const CSTree& a, const CSTree& b);
inline bool operator<(const CSTree& a, const CSTree& b) { return compare_trees(a, b) < 0; }

// The full tree [k]^{<n+1}: empty stem and n single-variable generators.
CSTree full_tree(int k, int n);

// Transfer I_{W,U} = I_U o I_W^{-1}; requires dim(W) = dim(U) and t in W.
Word transfer(const CSTree& W, const CSTree& U, const Word& t);

// Image of a coordinate tree T through I_W.  T's letters must lie in [W.k]
// and T must fit: T.level_len(T.dim()) <= dim(W).  The image has branching
// T.k and satisfies map_tree(W, T).iso(s) == W.iso(T.iso(s)).
CSTree map_tree(const CSTree& W, const CSTree& T);

// Enumerate coordinate CS trees of [k]^{<dim_host+1} of dimension ell in
// (level set, stem, generator sequence) order.  Constraints: fix the top
// level value, or pin the root to the empty stem at level 0.  The callback
// returns false to stop early.
void for_each_coordinate_tree(int k, int dim_host, int ell,
                              const std::function<bool(const CSTree&)>& f,
                              int top_level = -1, bool rooted_at_origin = false);

std::vector<CSTree> enumerate_subtrees(const CSTree& W, int ell);
// Subtrees whose top level sits in the host's top level.
std::vector<CSTree> subtrees_max(const CSTree& W, int ell);
// Subtrees R with R(0) = {stem of V} and R(m) inside level i of V.
std::vector<CSTree> subtr0(const CSTree& V, int m, int i);

// True when every point of V lies in W.
bool is_subtree(const CSTree& W, const CSTree& V);
// The unique i with V(dim V) inside W(i); throws when V is not a subtree.
int depth(const CSTree& W, const CSTree& V);

// Same generating data, substitutions restricted to [k2].
CSTree restrict_alphabet(const CSTree& W, int k2);
// Same generating data, branching k+1: the unique tree whose k-restriction
// is U.
CSTree extend(const CSTree& U);
// W[r] = { I_W(s) : |s| >= 1, s(0) = r }.  A tree of dimension dim(W)-1 when
// dim(W) >= 2; a single word when dim(W) = 1.
std::variant<Word, CSTree> wedge(const CSTree& W, int r);
// Drop the last generator; requires dim >= 2.
CSTree drop_top(const CSTree& W);

// Successors of t in W: t ^ w_i(a_i) ^ ... ^ w_j(a_j) where i is t's level.
// leftOnly keeps a_i = 1.  Ordered by (level, coordinate).
std::vector<Word> successors(const CSTree& W, const Word& t, bool leftOnly);

// Level n of the tree as a combinatorial subspace of [ambient]^{l_n}: the
// stem letters followed by the generators with the variable of w_i renamed
// to v_i.
CombSubspace level_subspace(const CSTree& W, int n);
inline CombSubspace top_subspace(const CSTree& W) { return level_subspace(W, W.dim()); }

// Rebuild the generating sequence from the point set; empty when the levels
// do not form a Carlson-Simpson tree.  Levels must be ordered by word length
// and level n must have exactly |level 1|^n points.
std::optional<CSTree> reconstruct_tree(const std::vector<std::vector<Word>>& levels);

}  // namespace cst
