#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cst/rational.hpp"
#include "cst/word.hpp"

namespace cst {

struct SearchBudget {
  int64_t max_nodes = int64_t{1} << 24;
  int64_t max_millis = 60000;
};

// Generating data (c, w_0..w_{m-1}) of a Carlson-Simpson shaped witness.
// Pattern-mode generators need not be left variable, so this is looser than
// CSTree; points() expands {c} u {c^w_0(a_0)^...^w_j(a_j) : j < m, a_i in [k]}.
struct CSWitness {
  Word c;
  std::vector<VariableWord> ws;

  std::vector<Word> points() const;
};

// Least combinatorial line of [k]^n inside A, scanning the one-variable
// generators of length n in lex order.  The witness is checked by
// substitution; absence means the full scan found nothing.
std::optional<VariableWord> find_line(const LevelSet& A, int n);

// Least (c, w_0..w_{m-1}) in generating-sequence order whose full point set
// lies in A.  Without a pattern the generators run over left variable words;
// with one, w_i runs over the variable words extending pattern[i].
std::optional<CSWitness> find_cs(const LevelSet& A, int m,
                                 const std::vector<VariableWord>& pattern = {});

// Forbidden structure for the extremal search: combinatorial lines inside a
// single level, or m-dimensional Carlson-Simpson trees with every level
// inside the universe.
enum class Avoid { Line, CSTree };

struct ExtremalResult {
  uint64_t max_size = 0;
  std::vector<Word> witness;  // the lexicographically least optimum
  int64_t nodes = 0;
};

// Largest subset of the union of [k]^n over the listed levels containing no
// forbidden structure, by exact branch and bound over the constraint
// hypergraph.  The universe is capped at 31 elements; m is the tree
// dimension for Avoid::CSTree and must be 1 for Avoid::Line.
ExtremalResult extremal_free(int k, const std::vector<int>& levels, int m, Avoid structure,
                             const SearchBudget& budget = {});

// The DHJ(k,delta) <= DCS(k,1,delta) reduction: per level ell pick the
// prefix y_ell with the densest section of A (ties to the least y), stack
// the sections into one level set B, find a Carlson-Simpson line of B, and
// lift its 1-level back into [k]^n.  Requires |A| >= delta * k^n; the
// returned generator's points are re-verified inside A.
std::optional<VariableWord> dhj_reduce(const LevelSet& A, int n, const Q& delta);

}  // namespace cst
