#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cst/rational.hpp"

namespace cst {

// Thrown when strict evaluation reaches an oracle-backed number with no table
// entry and no formula fallback.
struct missing_oracle : std::runtime_error {
  std::string oracle;
  std::vector<Q> args;
  missing_oracle(std::string name, std::vector<Q> a);
};

// Exact rational, or the overflow sentinel standing for a value whose
// numerator or denominator exceeds the configured bit cap.  The sentinel is
// absorbing: any arithmetic with an overflowed operand overflows, including
// min and max (the true value is unknowable, only its magnitude class is).
struct BVal {
  bool over = false;
  Q x = 0;

  BVal() = default;
  BVal(Q v) : x(std::move(v)) {}  // NOLINT: implicit by design
  static BVal overflow() {
    BVal b;
    b.over = true;
    return b;
  }
  bool operator==(const BVal& o) const {
    return over == o.over && (over || x == o.x);
  }
};

std::string bval_str(const BVal& v);

// Known numbers keyed by name and exact argument list.  Only the six listed
// names may appear; GR entries must satisfy GR(k,d,m,r) >= d and SubtrCount
// entries are recomputed and compared at load.
struct OracleTable {
  std::map<std::pair<std::string, std::vector<Q>>, Q> entries;

  static const std::vector<std::string>& names();  // HJ GR DHJ DCS CS SubtrCount

  std::optional<Q> find(const std::string& name, const std::vector<Q>& args) const;
  // Validates name, positivity, and the per-name requirements above.
  void insert(const std::string& name, std::vector<Q> args, Q value);

  // Top-level JSON array of {name, args, value}; numbers or "p/q" strings.
  static OracleTable from_json(const std::string& text);
  std::string to_json() const;
};

struct BoundExpr;
using ExprPtr = std::shared_ptr<const BoundExpr>;

// Expression tree over exact rationals.  Pow takes an integer-valued
// exponent.  Less(a,b) is the indicator [a < b]; multiplication
// short-circuits on an exact zero left factor, which is how guarded
// recursions avoid demanding oracle values outside their domain.
// Named nodes are calls of the quantities listed in named_bounds(); their
// operands are argument expressions.  Iterate holds {count, seed, body} and
// binds `name` inside body to the running value; count 0 yields the seed.
struct BoundExpr {
  enum class Kind {
    Const,
    Param,
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Floor,
    Ceil,
    Pow,
    Less,
    Named,
    Iterate
  };

  Kind kind = Kind::Const;
  Q value = 0;                // Const
  std::string name;           // Param, Named, Iterate loop variable
  std::vector<ExprPtr> kids;  // operands / arguments / {count, seed, body}
};

ExprPtr e_const(Q v);
ExprPtr e_param(std::string name);
ExprPtr e_add(ExprPtr a, ExprPtr b);
ExprPtr e_sub(ExprPtr a, ExprPtr b);
ExprPtr e_mul(ExprPtr a, ExprPtr b);
ExprPtr e_div(ExprPtr a, ExprPtr b);
ExprPtr e_min(ExprPtr a, ExprPtr b);
ExprPtr e_max(ExprPtr a, ExprPtr b);
ExprPtr e_floor(ExprPtr a);
ExprPtr e_ceil(ExprPtr a);
ExprPtr e_pow(ExprPtr base, ExprPtr expo);
ExprPtr e_less(ExprPtr a, ExprPtr b);
ExprPtr e_named(std::string name, std::vector<ExprPtr> args);
ExprPtr e_iter(ExprPtr count, ExprPtr seed, std::string var, ExprPtr body);

struct EvalConfig {
  // Magnitude cap 2^(2^20): numerator/denominator bit length limit.
  size_t bit_cap = size_t{1} << 20;
  // Unrolled steps allowed per Iterate or sequence recursion before a
  // non-stabilizing loop collapses to overflow.
  uint64_t iterate_budget = uint64_t{1} << 16;
  // Structural expansion depth guard (cyclic or runaway definitions).
  int max_depth = 64;
};

// Strict evaluation: exact value or overflow; missing_oracle when an
// HJ/GR/... number is required and absent; std::domain_error on arguments
// outside a formula's stated domain.
BVal eval_expr(const ExprPtr& e, const OracleTable& oracles, const EvalConfig& cfg = {});

// The named quantities the evaluator knows, with their argument lists.
// Integer arguments are validated as integers; rational ones must lie in
// the formula's stated range.
struct NamedBound {
  std::string name;
  std::vector<std::string> params;  // documentation and CLI flag names
  bool variadic = false;            // dpseq: (k, tau..., delta)
  bool oracle_backed = false;       // consults the table before expanding
};
const std::vector<NamedBound>& named_bounds();

// Call of a named bound with concrete arguments, by parameter name.
// Unknown name or missing/extra arguments throw std::invalid_argument.
ExprPtr build_bound(const std::string& name, const std::map<std::string, Q>& args);

// One-step expansion of a named call with concrete arguments: the defining
// formula with nested quantities left as named calls.  Oracle-only names
// (hj, gr) and subtrcount have no formula and return nullptr.
ExprPtr expand_bound(const std::string& name, const std::vector<Q>& args);

// eval_expr(build_bound(...)).
BVal eval_bound(const std::string& name, const std::map<std::string, Q>& args,
                const OracleTable& oracles, const EvalConfig& cfg = {});

// |Subtr_ell([k]^{<n})| by the generating-sequence count: stems at level
// l0 contribute k^l0 and each taller level multiplies by the left variable
// words spanning it.  Exact for any n; no point enumeration.
Z subtr_count_value(int k, int n, int ell);

// Cached form used by the evaluator; stores the result under SubtrCount.
// Collapses to overflow when the count would exceed the bit cap.
BVal subtr_count(int k, int n, int ell, OracleTable& cache, const EvalConfig& cfg = {});

// Printable grammar: infix + - * /, calls min/max/floor/ceil/pow/less,
// iter(count, seed, var -> body), named calls, rationals, parameters.
std::string expr_str(const ExprPtr& e);
// Recursive-descent reparse of expr_str output.  Throws std::invalid_argument
// on malformed input.
ExprPtr parse_expr(const std::string& text);

}  // namespace cst
