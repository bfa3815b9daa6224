#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cst/rational.hpp"
#include "cst/word.hpp"

namespace cst {

// A ⊆ [k]^n viewed inside [k]^I x [k]^{{0..n-1} \ I}.  Sections are indexed
// by the rank of y in [k]^I (positions taken in increasing order).
struct EnergyContext {
  int k = 2;
  int n = 0;
  std::vector<int> I;
  boost::dynamic_bitset<> A;

  EnergyContext(int k_, int n_, std::vector<int> I_, boost::dynamic_bitset<> A_);

  uint64_t sections() const { return pow_u64(k, static_cast<int>(I.size())); }
  uint64_t section_size() const { return pow_u64(k, n - static_cast<int>(I.size())); }
  uint64_t y_rank(uint64_t word_rank) const;
  // |A_y| per y rank; single pass over the set bits.
  std::vector<uint64_t> section_counts() const;
  Q dens() const;
};

// e_I(A): the average over y of dens(A_y)^2.
Q energy(const EnergyContext& ctx);

// Pairwise gaps of at least tau.
bool is_sparse(const std::vector<int>& L, int tau);
// L + {0..tau-1}; requires a tau-sparse L.
std::vector<int> sparse_extension(const std::vector<int>& L, int tau);

struct RegularityWitness {
  int member = 0;          // index into the family
  int n = 0;               // the level where the section drifts
  std::vector<int> I;      // chosen lower levels of L
  std::vector<int> coords; // I itself, or its tau extension
  Word y;
  Q section_dens, level_dens;
};

// First violation of the section-density condition, scanning members, then
// levels of L upward, then subsets I by mask, then sections by rank.  tau = 1
// is the plain form; tau > 1 sections along (I)_tau and requires L tau-sparse.
std::optional<RegularityWitness> regularity_violation(int k, const std::vector<LevelSet>& F,
                                                      const Q& eps, const std::vector<int>& L,
                                                      int tau = 1);
inline bool is_regular(int k, const std::vector<LevelSet>& F, const Q& eps,
                       const std::vector<int>& L, int tau = 1) {
  return !regularity_violation(k, F, eps, L, tau).has_value();
}

struct IntervalResult {
  std::vector<int> M;
  int p0 = 0;  // index of the chosen block
};

// Least block I_p of m consecutive elements of N \ {max(N)} whose energy jump
// over the prefix J_p stays within eps^4/16 for every member, the jump taken
// at level max(N).  max_blocks < 0 scans every complete block.
std::optional<IntervalResult> select_block(int k, const std::vector<LevelSet>& F, const Q& eps,
                                           int m, const std::vector<int>& N,
                                           long max_blocks = -1);

// The energy increment interval search proper: requires 0 < eps < k^{-m} and
// |N| >= (q floor(16 eps^-4) + 1) m + 1, and then a block always exists.
IntervalResult energy_interval(int k, const std::vector<LevelSet>& F, const Q& eps, int m,
                               const std::vector<int>& N);

// Elements of base whose full tau block sits inside the window.
std::vector<int> full_blocks(const std::vector<int>& base, int tau,
                             const std::vector<int>& window);

// Sparse form: N tau-sparse, 0 < eps < k^{-tau(m+1)} and
// |N| >= (q floor(16 eps^-4) + 1)(m+1) + 1.  The returned M controls every
// section with coordinates inside (M)_tau.
IntervalResult sparse_energy_interval(int k, const std::vector<LevelSet>& F, const Q& eps,
                                      int m, const std::vector<int>& N, int tau);

enum class RegMode { Auto, Paper, Scan };

struct RegularizeResult {
  bool ok = false;
  std::vector<int> L;
  std::string mode;  // path that produced L: "paper" or "scan"
};

// |N| that makes the energy increment construction go through: the ell-fold
// iterate of the block recursion at rho = min{eps, k^-ell / 2} (tau = 1) or
// rho = min{eps, k^-(tau(ell+1)) / 2}.
mpz_class regularity_bound(int k, int ell, int q, const Q& eps, int tau = 1);

// Finds L ⊆ N of size ell making F (eps,L)-regular (resp. (eps,tau,L)).
// Auto takes the paper construction when |N| meets the bound and otherwise
// scans subsets of N in lexicographic order.  Every result is re-verified;
// ok = false means no certified L was found, not a precondition failure.
RegularizeResult regularize(int k, const std::vector<LevelSet>& F, const Q& eps, int ell,
                            const std::vector<int>& N, RegMode mode = RegMode::Auto,
                            int tau = 1);

}  // namespace cst
