#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cst/bounds.hpp"
#include "cst/tree.hpp"
#include "cst/word.hpp"

namespace cst {

// r-coloring of an enumerated family.  Colors live in 1..r and are aligned
// with the domain by index; lookups go through the domain, so the family
// must list every object the searches will touch.
struct SpaceColoring {
  std::vector<CombSubspace> domain;
  std::vector<int> color;
  int r = 1;

  bool valid() const;
  int color_of(const CombSubspace& s) const;  // throws when s is not listed
};

struct TreeColoring {
  std::vector<CSTree> domain;
  std::vector<int> color;
  int r = 1;

  bool valid() const;
  int color_of(const CSTree& t) const;
};

// Domain = Subs_m(V) (resp. Subtr_m(W)) in enumeration order, colors by f.
SpaceColoring color_subspaces(const CombSubspace& V, int m, int r,
                              const std::function<int(const CombSubspace&)>& f);
TreeColoring color_subtrees(const CSTree& W, int m, int r,
                            const std::function<int(const CSTree&)>& f);

// Least W in Subs_d(V) with Subs_m(W) monochromatic, by exhaustive scan in
// enumeration order.  The coloring's domain must be Subs_m(V) exactly.
// Absence is an answer, not an error; any witness is re-verified against
// its full m-family before being returned.
std::optional<CombSubspace> gr_search(const CombSubspace& V, const SpaceColoring& c, int d);

// Least U in Subtr_d(W) with Subtr_m(U) monochromatic; same contract with
// subtrees in place of subspaces.
std::optional<CSTree> cs_search(const CSTree& W, const TreeColoring& c, int d);

// Focusing tower: U_0 in Subtr^max_{n_0}(W), then for each stage i in [q]
// the least U_i in Subtr^max_{n_i + 1} of the previous tree with its top
// level removed (of U_0 itself at stage 1) such that Subtr^max_m(U_i) is
// monochromatic.  The stems and generators of U_q followed by the top
// generators of U_{q-1}, ..., U_1 assemble into one (m+q)-dimensional
// U in Subtr^max_{m+q}(W) whose m-subtree colors depend only on depth.
//
// schedule = n_0 > n_1 > ... > n_q lists the stage dimensions; it must
// drop by at least one per step, end at m, and fit inside dim(W).  A stage
// whose exhaustive search finds nothing is reported, not fatal.
struct FocusResult {
  std::optional<CSTree> tree;  // the assembled U on success
  std::vector<CSTree> family;  // U_0 and every stage tree found
  int failed_stage = -1;       // stage in [1,q] that found nothing
};
FocusResult focus_construct(const CSTree& W, const TreeColoring& c, int q,
                            const std::vector<int>& schedule);

// n_i = m + (q - i): the tightest admissible schedule.
std::vector<int> focus_schedule_desk(int m, int q);
// n_i = g^{(q-i)}(m) with g(n) = GR(k, n+1, m, r) taken from the table;
// throws missing_oracle when an entry is absent and budget_error when a
// value leaves desk scale.
std::vector<int> focus_schedule_oracle(int k, int m, int r, int q, const OracleTable& t);

enum class PartitionStatement { GR, CS };

// Decision for one host size: does every r-coloring of the m-subspaces of
// [k]^n (resp. the m-subtrees of [k]^{<n+1}) admit a d-witness whose
// m-family is monochromatic?  Colorings are enumerated up to color
// permutation (first-occurrence normal form) unless normalize is false.
// The counterexample, when present, is the least failing coloring.
struct PropertyCheck {
  bool holds = false;
  std::optional<std::vector<int>> counterexample;
};
PropertyCheck partition_property(PartitionStatement st, int k, int n, int d, int m, int r,
                                 uint64_t budget = uint64_t{1} << 25, bool normalize = true);

// Least n <= nMax (starting at d) where partition_property holds, or
// nothing when every n up to nMax admits a bad coloring.
std::optional<int> minimal_number(PartitionStatement st, int k, int d, int m, int r, int nMax,
                                  uint64_t budget = uint64_t{1} << 25);

}  // namespace cst
