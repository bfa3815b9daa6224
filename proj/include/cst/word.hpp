#pragma once

#include <boost/dynamic_bitset.hpp>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cst/rational.hpp"

namespace cst {

// Letters are 1..k. Variable i (0-based) is encoded as -i, so v0 = 0, v1 = -1, ...
// A plain word contains only positive letters.
inline constexpr int var_code(int i) { return -i; }
inline constexpr bool is_var(int c) { return c <= 0; }
inline constexpr int var_index(int c) { return -c; }

// Total order on letters used by every enumeration: variables first (by index),
// then constants 1..k. Gives deterministic witnesses.
inline constexpr long letter_key(int c) {
  return is_var(c) ? static_cast<long>(var_index(c)) - (1L << 30) : c;
}

struct Word {
  std::vector<int> letters;

  Word() = default;
  explicit Word(std::vector<int> ls) : letters(std::move(ls)) {}

  int size() const { return static_cast<int>(letters.size()); }
  bool empty() const { return letters.empty(); }
  int operator()(int i) const { return letters[static_cast<size_t>(i)]; }

  Word prefix(int n) const;
  Word concat(const Word& o) const;

  friend bool operator==(const Word&, const Word&) = default;
};

// (length, then positionwise letter_key) total order.
std::strong_ordering compare_words(const Word& a, const Word& b);
inline bool operator<(const Word& a, const Word& b) { return compare_words(a, b) < 0; }

// Text form: digit string, empty word prints "-"; variables print as 'v' (index 0)
// or 'v<i>'. Only alphabets k <= 9 round-trip through this form.
std::string word_str(const Word& w);
Word parse_word(const std::string& s);

// Lexicographic rank of a plain word within [k]^n: sum of (letter-1)*k^(n-1-i).
uint64_t word_rank(const Word& w, int k);
Word word_unrank(uint64_t r, int n, int k);

// All of [k]^n in rank (= lex) order.
std::vector<Word> all_words(int k, int n);

struct VariableWord {
  int k = 2;
  int m = 1;
  std::vector<int> letters;

  VariableWord() = default;
  VariableWord(int k_, int m_, std::vector<int> ls) : k(k_), m(m_), letters(std::move(ls)) {}

  int size() const { return static_cast<int>(letters.size()); }
  // Each of v0..v_{m-1} occurs, and for i<j every occurrence of v_i precedes
  // every occurrence of v_j. A variable may occur more than once.
  bool valid() const;
  // One variable sitting at position 0 (it may recur later).
  bool left_variable() const { return m == 1 && !letters.empty() && letters[0] == var_code(0); }

  Word substitute(const std::vector<int>& a) const;
  Word substitute1(int a) const { return substitute({a}); }

  friend bool operator==(const VariableWord&, const VariableWord&) = default;
};

std::strong_ordering compare_varwords(const VariableWord& a, const VariableWord& b);
inline bool operator<(const VariableWord& a, const VariableWord& b) {
  return compare_varwords(a, b) < 0;
}

std::string varword_str(const VariableWord& w);
// Compact form "v21v" (single variable) or bracketed "[v0,2,v1]" (any arity).
VariableWord parse_varword(const std::string& s, int k);

// All m-variable words of length n over [k], in (letter_key) lex order.
std::vector<VariableWord> enumerate_variable_words(int k, int n, int m);

// Left variable words of length n over [k] (first letter the variable), lex order.
// There are (k+1)^(n-1) of them.
std::vector<VariableWord> enumerate_left_variable_words(int k, int n);

// The set of all substitutions of an m-variable word; m = 1 is a combinatorial line.
struct CombSubspace {
  VariableWord gen;

  int dim() const { return gen.m; }
  int length() const { return gen.size(); }
  // k^m points, ordered by the substitution tuple (lex).
  std::vector<Word> points() const;
  bool contains(const Word& w) const;
};

// Substitute u's letters for g's variables: position p of the result is g(p) when
// constant, else u(var_index(g(p))). u may itself carry variables; blocks stay ordered.
VariableWord compose_varwords(const VariableWord& g, const VariableWord& u);

// Subs_ell(V): all ell-dimensional subspaces, via composing ell-variable words of
// length dim(V) with V's generator. Emitted in generator lex order.
std::vector<CombSubspace> enumerate_subspaces(const CombSubspace& V, int ell);
// Subs_ell([k]^n).
std::vector<CombSubspace> enumerate_subspaces_full(int k, int n, int ell);
CombSubspace full_space(int k, int n);

struct LocatedWord {
  std::map<int, int> values;  // position -> letter

  friend bool operator==(const LocatedWord&, const LocatedWord&) = default;
};

// Value at the i-th smallest element of J is x(i). J = {} maps the empty word
// to the empty located word.
LocatedWord canonical_embed(const std::set<int>& J, const Word& x);
Word canonical_extract(const LocatedWord& lw);

// |x| = |y| and for every letter s not in {i,j}: x(r) = s iff y(r) = s.
bool is_equivalent(const Word& x, const Word& y, int i, int j);
// All words (i,j)-equivalent to x (including x), lex order.
std::vector<Word> equiv_partners(const Word& x, int i, int j);

// A subset of the union of [k]^n over finitely many n, one bitset per level in
// lexicographic rank order. Missing levels are empty.
struct LevelSet {
  int k = 2;
  std::map<int, boost::dynamic_bitset<>> levels;

  explicit LevelSet(int k_ = 2) : k(k_) {}

  boost::dynamic_bitset<>& level(int n);
  const boost::dynamic_bitset<>* level_if(int n) const;
  void insert(const Word& w);
  bool contains(const Word& w) const;
  uint64_t count(int n) const;
  uint64_t total() const;
  // |A cap [k]^n| / k^n.
  Q dens(int n) const;
  std::vector<Word> words(int n) const;
  std::vector<Word> all() const;

  friend bool operator==(const LevelSet&, const LevelSet&) = default;
};

uint64_t pow_u64(int k, int n);

// Closed under replacing letters i,j independently at the positions where x
// carries i or j, levelwise.
bool is_insensitive(const LevelSet& A, int i, int j);

// One word per line; '#' lines ignored; a "-" line is the empty word.
LevelSet parse_level_set(const std::string& text, int k);
std::string level_set_text(const LevelSet& A);

}  // namespace cst
