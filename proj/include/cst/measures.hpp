#pragma once

#include <vector>

#include "cst/tree.hpp"
#include "cst/word.hpp"

namespace cst {

// Furstenberg-Weiss measure of depth m: the average over levels 0..m of the
// density of A inside [k]^n.  Missing levels of A count as empty.
Q fw_measure_m(const LevelSet& A, int m);

// Tree form: average over the levels of W of the density of A inside W(n).
Q fw_measure_tree(const LevelSet& A, const CSTree& W);

// Level-selected form: average of dens(A, n) over n in L.  L must be nonempty.
Q fw_measure_L(const LevelSet& A, const std::vector<int>& L);

}  // namespace cst
