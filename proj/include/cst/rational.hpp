#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace cst {

// Thrown when an enumeration would exceed its configured element budget.
// The command line maps this to its own exit code.
struct budget_error : std::runtime_error {
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// Exact rational arithmetic everywhere; no floating point in any certificate.
using Q = mpq_class;
using Z = mpz_class;

// Accepts "p", "p/q", optional leading '-'. Throws std::invalid_argument on
// malformed input or zero denominator. Result is canonicalized.
Q parse_q(const std::string& s);

// Canonical text form: "p" when the denominator is 1, else "p/q".
std::string q_str(const Q& q);

Z q_floor(const Q& q);
Z q_ceil(const Q& q);

// q^e for integer e (e < 0 inverts; q must be nonzero then).
Q q_pow(const Q& q, long e);

// Convenience: exact k^-e as a rational.
Q q_pow_int(long base, long e);

// One checked inequality of a certificate. Both sides are exact, so holds()
// is decidable and reproducible.
struct Ineq {
  std::string label;
  Q lhs;
  std::string rel;  // ">=", "<=", ">", "<", "=="
  Q rhs;

  bool holds() const {
    if (rel == ">=") return lhs >= rhs;
    if (rel == "<=") return lhs <= rhs;
    if (rel == ">") return lhs > rhs;
    if (rel == "<") return lhs < rhs;
    return lhs == rhs;
  }
};

}  // namespace cst
