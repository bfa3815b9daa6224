#pragma once

#include <boost/dynamic_bitset.hpp>
#include <functional>
#include <string>
#include <vector>

#include "cst/rational.hpp"

namespace cst {

using Event = boost::dynamic_bitset<>;

// Finite probability space with exact rational weights.
struct FiniteProbSpace {
  std::vector<std::string> points;
  std::vector<Q> weights;

  size_t size() const { return points.size(); }
  bool valid() const;

  static FiniteProbSpace uniform(size_t n);
  static FiniteProbSpace uniform(std::vector<std::string> pts);
};

Q mu(const FiniteProbSpace& sp, const Event& A);
// mu_Y(A) = mu(A n Y) / mu(Y); throws when mu(Y) = 0.
Q mu_cond(const FiniteProbSpace& sp, const Event& A, const Event& Y);

// Shared result scaffolding: each operation reports the precondition checks
// it made and the certificate inequalities for its output, all exact.
struct SelectResult {
  bool preconditions_ok = true;
  std::vector<Ineq> precondition_checks;
  std::vector<Ineq> certificate;

  bool certificate_ok() const {
    for (const auto& c : certificate)
      if (!c.holds()) return false;
    return true;
  }
};

// {w : |{i : w in A_i}| >= (delta/2) n} together with its measure, which is
// at least delta/2 whenever every mu(A_i) >= delta.
struct MarkovResult : SelectResult {
  Event selected;
  Q measure;
};
MarkovResult markov_select(const FiniteProbSpace& sp, const std::vector<Event>& As,
                           const Q& delta);

// I = {i : mu_{Q_i}(A) >= (lambda - eps) mu_{Q_i}(B) and mu_{Q_i}(B) >= beta eps/4},
// with sum_{i in I} mu(Q_i) >= beta eps/4.  With equal cell weights the size
// bound |I| >= (beta eps/4) n is certified as well.
struct PartitionResult : SelectResult {
  std::vector<int> I;
  Q mass;
  bool equal_weights = false;
};
PartitionResult partition_select(const FiniteProbSpace& sp, const Event& A, const Event& B,
                                 const std::vector<Event>& Qs, const Q& lambda, const Q& beta,
                                 const Q& eps);

// Lexicographically least pair i < j with mu(A_i n A_j) >= theta^2.
struct PairResult : SelectResult {
  bool found = false;
  int i = -1, j = -1;
  Q inter;
};
PairResult pair_intersect(const FiniteProbSpace& sp, const std::vector<Event>& As, const Q& eps,
                          const Q& theta);

// Product of factor spaces, iterated lazily (points are index tuples).
struct ProductSpace {
  std::vector<FiniteProbSpace> factors;

  // Number of points; throws on overflow past 2^62.
  uint64_t size() const;
  // Visit every point with its weight; the visitor returns false to stop.
  void for_each(const std::function<bool(const std::vector<size_t>&, const Q&)>& f) const;
  // Measure of the event given by a predicate on index tuples.
  Q mu(const std::function<bool(const std::vector<size_t>&)>& pred) const;
};

}  // namespace cst
