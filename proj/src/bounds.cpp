#include "cst/bounds.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace cst {

namespace {

std::string call_str(const std::string& name, const std::vector<Q>& args) {
  std::string s = name + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += q_str(args[i]);
  }
  return s + ")";
}

}  // namespace

missing_oracle::missing_oracle(std::string name, std::vector<Q> a)
    : std::runtime_error("missing oracle entry " + call_str(name, a)),
      oracle(std::move(name)),
      args(std::move(a)) {}

std::string bval_str(const BVal& v) { return v.over ? "OVERFLOW" : q_str(v.x); }

// ---------------------------------------------------------------------------
// Oracle table

const std::vector<std::string>& OracleTable::names() {
  static const std::vector<std::string> n = {"HJ", "GR", "DHJ", "DCS", "CS", "SubtrCount"};
  return n;
}

std::optional<Q> OracleTable::find(const std::string& name, const std::vector<Q>& args) const {
  auto it = entries.find({name, args});
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

namespace {

long arg_long(const Q& v, const std::string& what) {
  if (v.get_den() != 1) throw std::invalid_argument(what + " must be an integer");
  if (!v.get_num().fits_slong_p()) throw std::invalid_argument(what + " out of range");
  return v.get_num().get_si();
}

void check_unit_interval(const Q& v, const std::string& what) {
  if (v <= 0 || v > 1) throw std::invalid_argument(what + " must lie in (0,1]");
}

// Exact |Subtr_ell([k]^{<n})| via the generating decomposition: a stem of
// length l0 below the first variable level and ell left variable words whose
// spans partition (l0, l_top].  Grouping by D = l_top - l0 gives
// sum_D [sum_l0 k^l0] (k+1)^(D-ell) C(D-1, ell-1).
Z count_subtrees(const Z& k, const Z& n, const Z& ell) {
  Z total = 0;
  if (ell > n - 1) return total;
  unsigned long t = mpz_get_ui(Z(n - ell).get_mpz_t());  // term count, caller-guarded
  Z kp1 = k + 1;
  Z kp;  // k^(n-D), starts at D = ell
  mpz_pow_ui(kp.get_mpz_t(), k.get_mpz_t(), t);
  Z pw = 1;   // (k+1)^(D-ell)
  Z bin = 1;  // C(D-1, ell-1)
  Z D = ell;
  for (unsigned long i = 0; i < t; ++i, ++D) {
    if (i) {
      mpz_divexact(kp.get_mpz_t(), kp.get_mpz_t(), k.get_mpz_t());
      pw *= kp1;
      bin *= D - 1;       // C(D-1, ell-1) from C(D-2, ell-1):
      Z denom = D - ell;  // multiply by (D-1)/(D-ell)
      mpz_divexact(bin.get_mpz_t(), bin.get_mpz_t(), denom.get_mpz_t());
    }
    Z geo = (kp - 1) / (k - 1);  // sum of k^l0 over the admissible stems
    total += geo * pw * bin;
  }
  return total;
}

}  // namespace

void OracleTable::insert(const std::string& name, std::vector<Q> args, Q value) {
  const auto& ns = names();
  if (std::find(ns.begin(), ns.end(), name) == ns.end())
    throw std::invalid_argument("unknown oracle name " + name);
  if (value <= 0) throw std::invalid_argument("oracle values must be positive");

  size_t arity = name == "HJ" || name == "DHJ" ? 2 : name == "DCS" || name == "SubtrCount" ? 3 : 4;
  if (args.size() != arity) throw std::invalid_argument("wrong arity for " + name);

  long k = arg_long(args[0], name + " alphabet");
  if (k < 2) throw std::invalid_argument(name + " needs alphabet >= 2");
  if (name == "HJ") {
    if (arg_long(args[1], "HJ colors") < 1) throw std::invalid_argument("HJ needs r >= 1");
  } else if (name == "GR" || name == "CS") {
    long d = arg_long(args[1], name + " dimension");
    long m = arg_long(args[2], name + " subtree dimension");
    long r = arg_long(args[3], name + " colors");
    if (m < 1 || d < m || r < 1) throw std::invalid_argument(name + " needs d >= m >= 1, r >= 1");
    if (name == "GR" && value < d)
      throw std::invalid_argument("GR(k,d,m,r) entries must be at least d");
  } else if (name == "DCS") {
    if (arg_long(args[1], "DCS dimension") < 1) throw std::invalid_argument("DCS needs m >= 1");
    check_unit_interval(args[2], "DCS density");
  } else if (name == "DHJ") {
    check_unit_interval(args[1], "DHJ density");
  } else {  // SubtrCount
    long n = arg_long(args[1], "SubtrCount height");
    long ell = arg_long(args[2], "SubtrCount dimension");
    if (n < 0 || ell < 1) throw std::invalid_argument("SubtrCount needs n >= 0, ell >= 1");
    if (n <= 4096 && k <= 4096 && Q(count_subtrees(Z(k), Z(n), Z(ell))) != value)
      throw std::invalid_argument("SubtrCount entry disagrees with the enumeration");
  }
  for (Q& a : args) a.canonicalize();
  value.canonicalize();
  entries[{name, std::move(args)}] = std::move(value);
}

OracleTable OracleTable::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("oracle file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw std::invalid_argument("oracle file must be a JSON array");
  auto as_q = [](const nlohmann::json& v, const char* what) -> Q {
    if (v.is_number_integer()) return Q(static_cast<long>(v.get<long long>()));
    if (v.is_string()) return parse_q(v.get<std::string>());
    throw std::invalid_argument(std::string(what) + " must be an integer or a \"p/q\" string");
  };
  OracleTable t;
  for (const auto& e : doc) {
    if (!e.is_object() || !e.contains("name") || !e.contains("args") || !e.contains("value"))
      throw std::invalid_argument("oracle entries need name, args, value");
    if (!e.at("args").is_array()) throw std::invalid_argument("oracle args must be an array");
    std::vector<Q> args;
    for (const auto& a : e.at("args")) args.push_back(as_q(a, "oracle argument"));
    t.insert(e.at("name").get<std::string>(), std::move(args), as_q(e.at("value"), "oracle value"));
  }
  return t;
}

std::string OracleTable::to_json() const {
  nlohmann::json doc = nlohmann::json::array();
  auto emit = [](const Q& v) -> nlohmann::json {
    if (v.get_den() == 1 && v.get_num().fits_slong_p())
      return static_cast<long long>(v.get_num().get_si());
    return q_str(v);
  };
  for (const auto& [key, value] : entries) {
    nlohmann::json e;
    e["name"] = key.first;
    e["args"] = nlohmann::json::array();
    for (const Q& a : key.second) e["args"].push_back(emit(a));
    e["value"] = emit(value);
    doc.push_back(e);
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Expression constructors

namespace {

ExprPtr make(BoundExpr::Kind kind, std::vector<ExprPtr> kids, Q value = 0,
             std::string name = {}) {
  auto e = std::make_shared<BoundExpr>();
  e->kind = kind;
  e->value = std::move(value);
  e->name = std::move(name);
  e->kids = std::move(kids);
  return e;
}

}  // namespace

ExprPtr e_const(Q v) {
  v.canonicalize();
  return make(BoundExpr::Kind::Const, {}, std::move(v));
}
ExprPtr e_param(std::string name) {
  return make(BoundExpr::Kind::Param, {}, 0, std::move(name));
}
ExprPtr e_add(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Add, {a, b}); }
ExprPtr e_sub(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Sub, {a, b}); }
ExprPtr e_mul(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Mul, {a, b}); }
ExprPtr e_div(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Div, {a, b}); }
ExprPtr e_min(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Min, {a, b}); }
ExprPtr e_max(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Max, {a, b}); }
ExprPtr e_floor(ExprPtr a) { return make(BoundExpr::Kind::Floor, {a}); }
ExprPtr e_ceil(ExprPtr a) { return make(BoundExpr::Kind::Ceil, {a}); }
ExprPtr e_pow(ExprPtr base, ExprPtr expo) { return make(BoundExpr::Kind::Pow, {base, expo}); }
ExprPtr e_less(ExprPtr a, ExprPtr b) { return make(BoundExpr::Kind::Less, {a, b}); }
ExprPtr e_named(std::string name, std::vector<ExprPtr> args) {
  return make(BoundExpr::Kind::Named, std::move(args), 0, std::move(name));
}
ExprPtr e_iter(ExprPtr count, ExprPtr seed, std::string var, ExprPtr body) {
  return make(BoundExpr::Kind::Iterate, {count, seed, body}, 0, std::move(var));
}

// ---------------------------------------------------------------------------
// Named bound catalogue

const std::vector<NamedBound>& named_bounds() {
  static const std::vector<NamedBound> list = {
      {"hj", {"k", "r"}, false, true},
      {"gr", {"k", "d", "m", "r"}, false, true},
      {"cs", {"k", "d", "m", "r"}, false, true},
      {"dcs", {"k", "m", "delta"}, false, true},
      {"dhj", {"k", "delta"}, false, true},
      {"subtrcount", {"k", "n", "ell"}, false, true},
      {"rho", {"k", "ell", "eps"}, false, false},
      {"F", {"k", "ell", "q", "eps", "m"}, false, false},
      {"reg", {"k", "ell", "q", "eps"}, false, false},
      {"g", {"k", "m", "r", "n"}, false, false},
      {"Lambda", {"k", "ell", "delta"}, false, false},
      {"Theta", {"k", "ell", "delta"}, false, false},
      {"Lambda0", {"k", "delta"}, false, false},
      {"Theta0", {"k", "delta"}, false, false},
      {"h", {"k", "delta", "n"}, false, false},
      {"theta", {"k", "m", "gamma"}, false, false},
      {"vartheta", {"k", "m", "delta"}, false, false},
      {"eta", {"k", "m", "delta"}, false, false},
      {"LambdaPrime", {"k", "m", "delta"}, false, false},
      {"ell", {"k", "m", "delta", "n"}, false, false},
      {"G", {"k", "m", "delta", "n", "eps"}, false, false},
      {"vartheta1", {"k", "delta"}, false, false},
      {"eta1", {"k", "delta"}, false, false},
      {"G1", {"k", "delta", "n", "eps"}, false, false},
      {"mbar", {"m", "gamma"}, false, false},
      {"M", {"k", "m", "gamma"}, false, false},
      {"alpha", {"k", "m", "gamma"}, false, false},
      {"p0", {"k", "m", "gamma"}, false, false},
      {"n1", {"k", "m", "gamma", "p"}, false, false},
      {"n2", {"k", "m", "gamma", "p"}, false, false},
      {"N", {"k", "m", "gamma", "p"}, false, false},
      {"H", {"k", "m", "gamma"}, false, false},
      {"Hiter", {"k", "n", "m", "gamma"}, false, false},
      {"xi", {"k", "gamma"}, false, false},
      {"varrho", {"k", "delta"}, false, false},
      {"Fdelta", {"k", "delta", "m"}, false, false},
      {"rhotau", {"k", "tau", "ell", "eps"}, false, false},
      {"Ftilde", {"k", "tau", "ell", "q", "eps", "m"}, false, false},
      {"regtau", {"k", "tau", "ell", "q", "eps"}, false, false},
      {"LambdaP", {"k", "delta"}, false, false},
      {"ThetaP", {"k", "delta"}, false, false},
      {"htau", {"k", "tau", "delta", "n"}, false, false},
      {"dp", {"k", "tau", "delta"}, false, false},
      {"dpseq", {"k", "delta"}, true, false},
  };
  return list;
}

namespace {

const NamedBound* find_named(const std::string& name) {
  for (const auto& nb : named_bounds())
    if (nb.name == name) return &nb;
  return nullptr;
}

// The table name for oracle-backed bounds.
std::string oracle_name(const std::string& name) {
  if (name == "hj") return "HJ";
  if (name == "gr") return "GR";
  if (name == "cs") return "CS";
  if (name == "dcs") return "DCS";
  if (name == "dhj") return "DHJ";
  if (name == "subtrcount") return "SubtrCount";
  return {};
}

bool rational_param(const std::string& p) {
  return p == "eps" || p == "delta" || p == "gamma";
}

// Argument accessors shared by the expansions.  Small structural integers
// (alphabets, colour counts, pattern sizes) go through i(); counters that may
// carry iterate values of any magnitude go through nat(), which only checks
// integrality and a lower end.
struct Args {
  const std::string& name;
  const std::vector<Q>& v;

  const Q& q(size_t i) const { return v[i]; }
  long i(size_t i, const char* what) const { return arg_long(v[i], name + " " + what); }
  const Q& nat(size_t i, const char* what, long lo) const {
    const Q& x = v[i];
    if (x.get_den() != 1)
      throw std::invalid_argument(name + " " + std::string(what) + " must be an integer");
    if (x < lo) throw std::domain_error(name + " " + std::string(what) + " out of domain");
    return x;
  }
  void unit(size_t i, const char* what) const {
    const Q& x = v[i];
    if (x <= 0 || x > 1) throw std::domain_error(name + " " + what + " must lie in (0,1]");
  }
};

ExprPtr C(Q v) { return e_const(std::move(v)); }
ExprPtr C(long v) { return e_const(Q(v)); }

}  // namespace

ExprPtr expand_bound(const std::string& name, const std::vector<Q>& argv) {
  const NamedBound* nb = find_named(name);
  if (!nb) throw std::invalid_argument("unknown bound " + name);
  if (!nb->variadic && argv.size() != nb->params.size())
    throw std::invalid_argument("wrong arity for " + name);
  Args a{name, argv};

  if (name == "hj" || name == "gr" || name == "subtrcount") return nullptr;

  if (name == "rho") {
    long k = a.i(0, "k");
    const Q& ell = a.nat(1, "ell", 1);
    if (k < 2) throw std::domain_error("rho needs k >= 2");
    a.unit(2, "eps");
    return e_min(C(a.q(2)), e_div(e_pow(C(k), C(Q(-ell))), C(2)));
  }
  if (name == "F") {
    long k = a.i(0, "k"), q = a.i(2, "q");
    const Q& ell = a.nat(1, "ell", 1);
    if (k < 2 || q < 1) throw std::domain_error("F needs k >= 2, q >= 1");
    a.unit(3, "eps");
    ExprPtr rho = e_named("rho", {C(k), C(ell), C(a.q(3))});
    ExprPtr c = e_add(e_mul(C(q), e_floor(e_mul(C(16), e_pow(rho, C(-4))))), C(1));
    return e_add(e_mul(c, C(a.q(4))), C(1));
  }
  if (name == "reg") {
    long k = a.i(0, "k"), q = a.i(2, "q");
    const Q& ell = a.nat(1, "ell", 1);
    if (k < 2 || q < 1) throw std::domain_error("reg needs k >= 2, q >= 1");
    a.unit(3, "eps");
    return e_iter(C(ell), C(0), "x",
                  e_named("F", {C(k), C(ell), C(q), C(a.q(3)), e_param("x")}));
  }
  if (name == "g") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    const Q& r = a.nat(2, "r", 1);
    const Q& n = a.nat(3, "n", 0);
    if (k < 2) throw std::domain_error("g needs k >= 2");
    return e_mul(e_sub(C(1), e_less(C(n), C(Q(m - 1)))),
                 e_named("gr", {C(k), C(Q(n + 1)), C(m), C(r)}));
  }
  if (name == "cs") {
    long k = a.i(0, "k");
    const Q& d = a.nat(1, "d", 1);
    const Q& m = a.nat(2, "m", 1);
    const Q& r = a.nat(3, "r", 1);
    if (k < 2 || d < m) throw std::domain_error("cs needs k >= 2, d >= m");
    return e_iter(C(Q(d * r - m)), C(m), "x", e_named("g", {C(k), C(m), C(r), e_param("x")}));
  }
  if (name == "dcs") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("dcs needs k >= 2");
    a.unit(2, "delta");
    const Q& dl = a.q(2);
    if (m >= 2) {
      ExprPtr count = e_ceil(e_mul(C(8), e_pow(C(dl), C(-2))));
      ExprPtr seed = e_named(
          "dcs", {C(k), C(Q(m - 1)), e_div(e_named("Theta0", {C(k), C(dl)}), C(2))});
      return e_iter(count, seed, "x", e_named("h", {C(k), C(dl), e_param("x")}));
    }
    if (k == 2) {
      ExprPtr d = e_ceil(e_mul(C(17), e_pow(C(dl), C(-2))));
      ExprPtr levels = e_add(e_named("cs", {C(2), d, C(1), C(2)}), C(1));
      return e_named("reg", {C(2), levels, C(1), C(dl / 4)});
    }
    long kk = k - 1;
    ExprPtr count = e_ceil(e_pow(e_named("varrho", {C(kk), C(dl)}), C(-1)));
    return e_iter(count, C(1), "x", e_named("Fdelta", {C(kk), C(dl), e_param("x")}));
  }
  if (name == "dhj") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error("dhj needs k >= 2");
    a.unit(1, "delta");
    return e_named("dcs", {C(k), C(1), C(a.q(1))});
  }
  if (name == "Lambda") {
    long k = a.i(0, "k");
    const Q& ell = a.nat(1, "ell", 1);
    if (k < 2) throw std::domain_error("Lambda needs k >= 2");
    a.unit(2, "delta");
    return e_ceil(e_mul(e_pow(C(a.q(2)), C(-1)),
                        e_named("dcs", {C(k), C(ell), C(a.q(2))})));
  }
  if (name == "Theta") {
    long k = a.i(0, "k");
    const Q& ell = a.nat(1, "ell", 1);
    if (k < 2) throw std::domain_error("Theta needs k >= 2");
    a.unit(2, "delta");
    ExprPtr lam = e_named("Lambda", {C(k), C(ell), C(a.q(2))});
    return e_div(e_mul(C(2), C(a.q(2))), e_named("subtrcount", {C(k), lam, C(ell)}));
  }
  if (name == "Lambda0" || name == "Theta0") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error(name + " needs k >= 2");
    a.unit(1, "delta");
    Q d2 = a.q(1) * a.q(1) / 16;
    return e_named(name == "Lambda0" ? "Lambda" : "Theta", {C(k), C(1), C(d2)});
  }
  if (name == "h") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error("h needs k >= 2");
    a.unit(1, "delta");
    ExprPtr grow = e_ceil(e_mul(
        e_mul(C(2), e_pow(e_named("Theta0", {C(k), C(a.q(1))}), C(-1))), C(a.q(2))));
    return e_add(e_named("Lambda0", {C(k), C(a.q(1))}), grow);
  }
  if (name == "theta") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("theta needs k >= 2");
    a.unit(2, "gamma");
    return e_named("Theta", {C(k), C(m), C(a.q(2) / 4)});
  }
  if (name == "vartheta") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("vartheta needs k >= 2");
    a.unit(2, "delta");
    return e_named("Theta", {C(k), C(m), C(a.q(2) / 8)});
  }
  if (name == "eta") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("eta needs k >= 2");
    a.unit(2, "delta");
    ExprPtr vt = e_named("vartheta", {C(k), C(m), C(a.q(2))});
    return e_div(e_mul(C(a.q(2)), vt), C(30 * k));
  }
  if (name == "LambdaPrime") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("LambdaPrime needs k >= 2");
    a.unit(2, "delta");
    return e_named("Lambda", {C(k), C(m), C(a.q(2) / 8)});
  }
  if (name == "ell") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    const Q& n = a.nat(3, "n", 0);
    if (k < 2) throw std::domain_error("ell needs k >= 2");
    a.unit(2, "delta");
    ExprPtr d = e_add(C(n), e_named("LambdaPrime", {C(k), C(m), C(a.q(2))}));
    return e_add(e_named("cs", {C(k + 1), d, C(m), C(2)}), C(1));
  }
  if (name == "G") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    const Q& n = a.nat(3, "n", 0);
    if (k < 2) throw std::domain_error("G needs k >= 2");
    a.unit(2, "delta");
    a.unit(4, "eps");
    ExprPtr lv = e_named("ell", {C(k), C(m), C(a.q(2)), C(n)});
    return e_named("reg", {C(k + 1), lv, C(1), C(a.q(4))});
  }
  if (name == "vartheta1" || name == "eta1") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error(name + " needs k >= 2");
    a.unit(1, "delta");
    return e_named(name == "vartheta1" ? "vartheta" : "eta", {C(k), C(1), C(a.q(1))});
  }
  if (name == "G1") {
    long k = a.i(0, "k");
    const Q& n = a.nat(2, "n", 0);
    if (k < 2) throw std::domain_error("G1 needs k >= 2");
    a.unit(1, "delta");
    a.unit(3, "eps");
    return e_named("G", {C(k), C(1), C(a.q(1)), C(n), C(a.q(3))});
  }
  if (name == "mbar") {
    const Q& m = a.nat(0, "m", 1);
    a.unit(1, "gamma");
    return e_ceil(e_mul(e_div(C(512), e_pow(C(a.q(1)), C(3))), C(m)));
  }
  if (name == "M") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("M needs k >= 2");
    a.unit(2, "gamma");
    Q g2 = a.q(2) * a.q(2) / 32;
    return e_named("Lambda", {C(k), e_named("mbar", {C(m), C(a.q(2))}), C(g2)});
  }
  if (name == "alpha") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("alpha needs k >= 2");
    a.unit(2, "gamma");
    Q g2 = a.q(2) * a.q(2) / 8;
    return e_named("theta", {C(k), e_named("mbar", {C(m), C(a.q(2))}), C(g2)});
  }
  if (name == "p0") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    if (k < 2) throw std::domain_error("p0 needs k >= 2");
    a.unit(2, "gamma");
    return e_floor(e_pow(e_named("alpha", {C(k), C(m), C(a.q(2))}), C(-1)));
  }
  if (name == "n1" || name == "n2" || name == "N") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 1);
    const Q& p = a.nat(3, "p", 0);
    if (k < 2) throw std::domain_error(name + " needs k >= 2");
    a.unit(2, "gamma");
    if (p == 0) return C(0);
    const Q& gm = a.q(2);
    ExprPtr mb = e_named("mbar", {C(m), C(gm)});
    if (name == "n1") {
      ExprPtr prev = e_named("N", {C(k), C(m), C(gm), C(Q(p - 1))});
      return e_add(e_mul(e_add(prev, C(1)), mb), prev);
    }
    if (name == "n2") {
      ExprPtr d = e_named("n1", {C(k), C(m), C(gm), C(p)});
      return e_named("cs", {C(k + 1), d, mb, e_add(mb, C(1))});
    }
    ExprPtr d = e_max(e_named("n2", {C(k), C(m), C(gm), C(p)}),
                      e_named("M", {C(k), C(m), C(gm)}));
    return e_named("cs", {C(k + 1), d, mb, C(2)});
  }
  if (name == "H") {
    long k = a.i(0, "k");
    const Q& m = a.nat(1, "m", 0);
    if (k < 2) throw std::domain_error("H needs k >= 2");
    a.unit(2, "gamma");
    if (m == 0) return C(0);
    const Q& gm = a.q(2);
    ExprPtr np = e_named(
        "N", {C(k), C(m), C(gm), e_named("p0", {C(k), C(m), C(gm)})});
    return e_named("reg", {C(k + 1), e_add(np, C(1)), C(2), C(gm * gm / 2)});
  }
  if (name == "Hiter") {
    long k = a.i(0, "k");
    const Q& n = a.nat(1, "n", 0);
    const Q& m = a.nat(2, "m", 0);
    if (k < 2) throw std::domain_error("Hiter needs k >= 2");
    a.unit(3, "gamma");
    return e_iter(C(n), C(m), "x", e_named("H", {C(k), e_param("x"), C(a.q(3))}));
  }
  if (name == "xi") {
    long k = a.i(0, "k");
    if (k < 2 || k > 64) throw std::domain_error("xi needs 2 <= k <= 64");
    a.unit(1, "gamma");
    Z p3;
    mpz_ui_pow_ui(p3.get_mpz_t(), 3, static_cast<unsigned long>(k));
    Z bits = 11 * (p3 - 1) / 2;  // 3^k - 1 is even
    return e_div(e_pow(C(a.q(1)), C(Q(p3))), e_pow(C(2), C(Q(bits))));
  }
  if (name == "varrho") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error("varrho needs k >= 2");
    a.unit(1, "delta");
    ExprPtr g = e_div(e_pow(e_named("eta1", {C(k), C(a.q(1))}), C(2)), C(2));
    return e_named("xi", {C(k), g});
  }
  if (name == "Fdelta") {
    long k = a.i(0, "k");
    const Q& m = a.nat(2, "m", 0);
    if (k < 2) throw std::domain_error("Fdelta needs k >= 2");
    a.unit(1, "delta");
    ExprPtr e1 = e_named("eta1", {C(k), C(a.q(1))});
    ExprPtr hk = e_named(
        "Hiter", {C(k), C(k), C(m), e_named("varrho", {C(k), C(a.q(1))})});
    ExprPtr n = e_ceil(e_mul(e_mul(e_pow(e1, C(-4)), C(Q((k + 1) * k))), hk));
    ExprPtr eps = e_div(e_pow(e1, C(2)), C(2));
    return e_named("G1", {C(k), C(a.q(1)), n, eps});
  }
  if (name == "rhotau") {
    long k = a.i(0, "k"), tau = a.i(1, "tau");
    const Q& ell = a.nat(2, "ell", 1);
    if (k < 2 || tau < 1) throw std::domain_error("rhotau arguments out of domain");
    a.unit(3, "eps");
    Q ex = Q(-tau) * (ell + 1);
    return e_min(C(a.q(3)), e_div(e_pow(C(k), C(ex)), C(2)));
  }
  if (name == "Ftilde") {
    long k = a.i(0, "k"), tau = a.i(1, "tau"), q = a.i(3, "q");
    const Q& ell = a.nat(2, "ell", 1);
    if (k < 2 || tau < 1 || q < 1) throw std::domain_error("Ftilde arguments out of domain");
    a.unit(4, "eps");
    ExprPtr rho = e_named("rhotau", {C(k), C(tau), C(ell), C(a.q(4))});
    ExprPtr c = e_add(e_mul(C(q), e_floor(e_mul(C(16), e_pow(rho, C(-4))))), C(1));
    return e_add(e_mul(c, e_add(C(a.q(5)), C(1))), C(1));
  }
  if (name == "regtau") {
    long k = a.i(0, "k"), tau = a.i(1, "tau"), q = a.i(3, "q");
    const Q& ell = a.nat(2, "ell", 1);
    if (k < 2 || tau < 1 || q < 1) throw std::domain_error("regtau arguments out of domain");
    a.unit(4, "eps");
    return e_iter(C(ell), C(0), "x",
                  e_named("Ftilde",
                          {C(k), C(tau), C(ell), C(q), C(a.q(4)), e_param("x")}));
  }
  if (name == "LambdaP" || name == "ThetaP") {
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error(name + " needs k >= 2");
    a.unit(1, "delta");
    Q d2 = a.q(1) * a.q(1) / 32;
    return e_named(name == "LambdaP" ? "Lambda" : "Theta", {C(k), C(1), C(d2)});
  }
  if (name == "htau") {
    long k = a.i(0, "k"), tau = a.i(1, "tau");
    if (k < 2 || tau < 1) throw std::domain_error("htau arguments out of domain");
    a.unit(2, "delta");
    const Q& dl = a.q(2);
    ExprPtr head = e_mul(
        C(tau), e_named("regtau", {C(k), C(tau), e_named("LambdaP", {C(k), C(dl)}),
                                   C(1), C(dl / 4)}));
    ExprPtr grow = e_ceil(e_mul(
        e_mul(C(2), e_pow(e_named("ThetaP", {C(k), C(dl)}), C(-1))), C(a.q(3))));
    return e_add(head, grow);
  }
  if (name == "dp") {
    long k = a.i(0, "k"), tau = a.i(1, "tau");
    if (k < 2 || tau < 1) throw std::domain_error("dp arguments out of domain");
    a.unit(2, "delta");
    const Q& dl = a.q(2);
    return e_mul(C(tau),
                 e_named("regtau", {C(k), C(tau), e_named("Lambda", {C(k), C(1), C(dl / 8)}),
                                    C(1), C(dl / 2)}));
  }
  if (name == "dpseq") {
    if (argv.size() < 3) throw std::invalid_argument("dpseq needs k, at least one tau, delta");
    long k = a.i(0, "k");
    if (k < 2) throw std::domain_error("dpseq needs k >= 2");
    size_t last = argv.size() - 1;
    a.unit(last, "delta");
    const Q& dl = a.q(last);
    std::vector<long> taus;
    for (size_t i = 1; i < last; ++i) {
      taus.push_back(a.i(i, "tau"));
      if (taus.back() < 1) throw std::domain_error("dpseq patterns need tau >= 1");
    }
    if (taus.size() == 1) return e_named("dp", {C(k), C(taus[0]), C(dl)});
    std::vector<ExprPtr> rest = {C(k)};
    for (size_t i = 1; i < taus.size(); ++i) rest.push_back(C(taus[i]));
    rest.push_back(e_div(e_named("ThetaP", {C(k), C(dl)}), C(2)));
    ExprPtr count = e_ceil(e_mul(C(8), e_pow(C(dl), C(-2))));
    return e_iter(count, e_named("dpseq", std::move(rest)), "x",
                  e_named("htau", {C(k), C(taus[0]), C(dl), e_param("x")}));
  }
  throw std::invalid_argument("unknown bound " + name);
}

ExprPtr build_bound(const std::string& name, const std::map<std::string, Q>& args) {
  const NamedBound* nb = find_named(name);
  if (!nb) throw std::invalid_argument("unknown bound " + name);
  std::vector<ExprPtr> kids;
  if (nb->variadic) {
    // dpseq: k, tau0..taum, delta.
    std::vector<std::string> taus;
    for (const auto& [key, val] : args)
      if (key.rfind("tau", 0) == 0) taus.push_back(key);
    std::sort(taus.begin(), taus.end(), [](const std::string& x, const std::string& y) {
      return x.size() != y.size() ? x.size() < y.size() : x < y;
    });
    if (taus.empty()) throw std::invalid_argument("dpseq needs tau0, tau1, ...");
    for (size_t i = 0; i < taus.size(); ++i)
      if (taus[i] != "tau" + std::to_string(i))
        throw std::invalid_argument("dpseq patterns must be tau0, tau1, ... without gaps");
    auto kit = args.find("k");
    auto dit = args.find("delta");
    if (kit == args.end() || dit == args.end())
      throw std::invalid_argument("dpseq needs k and delta");
    if (args.size() != taus.size() + 2)
      throw std::invalid_argument("unexpected argument for dpseq");
    kids.push_back(C(kit->second));
    for (const auto& t : taus) kids.push_back(C(args.at(t)));
    kids.push_back(C(dit->second));
    return e_named(name, std::move(kids));
  }
  for (const auto& p : nb->params) {
    auto it = args.find(p);
    if (it == args.end()) throw std::invalid_argument(name + " needs argument " + p);
    if (!rational_param(p) && it->second.get_den() != 1)
      throw std::invalid_argument(name + " argument " + p + " must be an integer");
    kids.push_back(C(it->second));
  }
  if (args.size() != nb->params.size())
    throw std::invalid_argument("unexpected argument for " + name);
  return e_named(name, std::move(kids));
}

// ---------------------------------------------------------------------------
// Subtree counting

Z subtr_count_value(int k, int n, int ell) {
  if (k < 2 || n < 0 || ell < 1) throw std::invalid_argument("subtr_count arguments");
  return count_subtrees(Z(k), Z(n), Z(ell));
}

namespace {

// Shared by the public cached entry point and the evaluator.  The result only
// becomes OVERFLOW when the true count provably exceeds the cap; an
// infeasible but possibly-small count asks for a table entry instead.
BVal subtr_count_guarded(const Z& k, const Z& n, const Z& ell, const std::vector<Q>& key,
                         const EvalConfig& cfg) {
  if (ell > n - 1) return BVal(Q(0));
  Z terms = n - ell;  // loop length; also the largest exponent in play
  size_t bits_kp1 = mpz_sizeinbase(Z(k + 1).get_mpz_t(), 2);
  // The last term alone is at least (k+1)^(terms-1).
  if ((terms - 1) * static_cast<long>(bits_kp1 - 1) > static_cast<long>(cfg.bit_cap))
    return BVal::overflow();
  // When ell >= terms the binomial alone gives C(n-2, terms-1) >= ((n-2)/terms)^(terms-1).
  if (ell >= terms) {
    long gap = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - 2 -
               static_cast<long>(mpz_sizeinbase(terms.get_mpz_t(), 2));
    if (gap > 0 && (terms - 1) * gap > static_cast<long>(cfg.bit_cap)) return BVal::overflow();
  }
  if (terms > static_cast<long>(cfg.iterate_budget)) throw missing_oracle("SubtrCount", key);
  Z v = count_subtrees(k, n, ell);
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > cfg.bit_cap) return BVal::overflow();
  return BVal(Q(v));
}

}  // namespace

BVal subtr_count(int k, int n, int ell, OracleTable& cache, const EvalConfig& cfg) {
  if (k < 2 || n < 0 || ell < 1) throw std::invalid_argument("subtr_count arguments");
  std::vector<Q> args = {Q(k), Q(n), Q(ell)};
  if (auto hit = cache.find("SubtrCount", args)) return BVal(*hit);
  BVal v = subtr_count_guarded(Z(k), Z(n), Z(ell), args, cfg);
  if (!v.over && v.x > 0) cache.insert("SubtrCount", args, v.x);
  return v;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct EvalCtx {
  const OracleTable& table;
  const EvalConfig& cfg;
  std::map<std::pair<std::string, std::vector<Q>>, BVal> memo;
};

using Env = std::map<std::string, BVal>;

BVal capped(Q v, const EvalCtx& ctx) {
  if (mpz_sizeinbase(v.get_num().get_mpz_t(), 2) > ctx.cfg.bit_cap ||
      mpz_sizeinbase(v.get_den().get_mpz_t(), 2) > ctx.cfg.bit_cap)
    return BVal::overflow();
  return BVal(std::move(v));
}

// sdepth counts structural nesting inside one expression tree (guards
// pathological inputs); ndepth counts named-expansion nesting and collapses
// runaway definition chains to overflow.
BVal ev(const ExprPtr& e, EvalCtx& ctx, const Env& env, int sdepth, int ndepth);

BVal ev_pow(const BVal& base, const BVal& expo, EvalCtx& ctx) {
  if (!expo.over && expo.x.get_den() != 1)
    throw std::domain_error("pow exponent must be an integer");
  if (expo.over) return !base.over && base.x == 1 ? BVal(Q(1)) : BVal::overflow();
  const Z& e = expo.x.get_num();
  if (e == 0) return BVal(Q(1));
  if (base.over) return BVal::overflow();
  if (base.x == 0) {
    if (e < 0) throw std::domain_error("zero to a negative power");
    return BVal(Q(0));
  }
  if (base.x == 1) return BVal(Q(1));
  if (base.x == -1) return BVal(Q(mpz_even_p(e.get_mpz_t()) ? 1 : -1));
  // Result bit estimate |e|*(bits(base)-1); bits >= 2 here since the base is
  // neither 0 nor a unit, so a surviving exponent fits in a long.
  size_t bits = std::max(mpz_sizeinbase(base.x.get_num().get_mpz_t(), 2),
                         mpz_sizeinbase(base.x.get_den().get_mpz_t(), 2));
  Z estimate = Z(abs(e)) * static_cast<unsigned long>(bits - 1);
  if (estimate > 2 * Z(static_cast<unsigned long>(ctx.cfg.bit_cap)))
    return BVal::overflow();
  return capped(q_pow(base.x, e.get_si()), ctx);
}

BVal ev_named_values(const std::string& name, const std::vector<Q>& args, EvalCtx& ctx,
                     int ndepth);

// The coupled level sequences, run as one loop so a large index cannot build
// a deep expression chain.  Overflow is a fixed point of every step map, so
// stationarity detection terminates the loop once values stop moving.
BVal ev_sequence(const std::string& name, const std::vector<Q>& args, EvalCtx& ctx,
                 int ndepth) {
  long k = arg_long(args[0], "sequence k");
  const Q& m = args[1];
  const Q& gm = args[2];
  const Q& p = args[3];
  if (k < 2 || m.get_den() != 1 || m < 1 || p.get_den() != 1 || p < 0)
    throw std::domain_error("sequence arguments out of domain");
  if (gm <= 0 || gm > 1) throw std::domain_error("sequence gamma must lie in (0,1]");
  if (p == 0) return BVal(Q(0));
  BVal mb = ev_named_values("mbar", {m, gm}, ctx, ndepth + 1);
  BVal Mv = ev_named_values("M", {Q(k), m, gm}, ctx, ndepth + 1);
  BVal n1v(Q(0)), n2v(Q(0)), Nv(Q(0));
  auto cs_at = [&](const BVal& d, const BVal& sub, const BVal& r) -> BVal {
    if (d.over || sub.over || r.over) return BVal::overflow();
    return ev_named_values("cs", {Q(k + 1), d.x, sub.x, r.x}, ctx, ndepth + 1);
  };
  const Z& pz = p.get_num();
  uint64_t steps = 0;
  for (Z i = 1; i <= pz; ++i) {
    BVal pn1 = n1v, pn2 = n2v, pN = Nv;
    if (Nv.over || mb.over) {
      n1v = BVal::overflow();
    } else {
      n1v = capped((Nv.x + 1) * mb.x + Nv.x, ctx);
    }
    BVal rcol = mb.over ? BVal::overflow() : capped(mb.x + 1, ctx);
    n2v = cs_at(n1v, mb, rcol);
    BVal d = n2v.over || Mv.over ? BVal::overflow() : BVal(n2v.x > Mv.x ? n2v.x : Mv.x);
    Nv = cs_at(d, mb, BVal(Q(2)));
    if (n1v == pn1 && n2v == pn2 && Nv == pN) break;  // stationary
    if (++steps > ctx.cfg.iterate_budget) return BVal::overflow();
  }
  return name == "n1" ? n1v : name == "n2" ? n2v : Nv;
}

BVal ev_subtrcount(const std::vector<Q>& args, EvalCtx& ctx) {
  long k = arg_long(args[0], "subtrcount k");
  const Q& n = args[1];
  const Q& ell = args[2];
  if (k < 2 || n.get_den() != 1 || n < 0 || ell.get_den() != 1 || ell < 1)
    throw std::domain_error("subtrcount arguments out of domain");
  return subtr_count_guarded(Z(k), n.get_num(), ell.get_num(), args, ctx.cfg);
}

BVal ev_named_values(const std::string& name, const std::vector<Q>& args, EvalCtx& ctx,
                     int ndepth) {
  if (ndepth > ctx.cfg.max_depth) return BVal::overflow();
  const NamedBound* nb = find_named(name);
  if (!nb) throw std::invalid_argument("unknown bound " + name);
  if (nb->variadic ? args.size() < 3 : args.size() != nb->params.size())
    throw std::invalid_argument("wrong arity for " + name);

  std::string oname = oracle_name(name);
  if (!oname.empty()) {
    if (auto hit = ctx.table.find(oname, args)) return capped(*hit, ctx);
  }
  auto key = std::make_pair(name, args);
  if (auto it = ctx.memo.find(key); it != ctx.memo.end()) return it->second;

  BVal out;
  if (name == "subtrcount") {
    out = ev_subtrcount(args, ctx);
  } else if (name == "n1" || name == "n2" || name == "N") {
    out = ev_sequence(name, args, ctx, ndepth);
  } else {
    ExprPtr body = expand_bound(name, args);
    if (!body) throw missing_oracle(oname, args);
    Env fresh;
    out = ev(body, ctx, fresh, 0, ndepth + 1);
  }
  ctx.memo.emplace(std::move(key), out);
  return out;
}

BVal ev(const ExprPtr& e, EvalCtx& ctx, const Env& env, int sdepth, int ndepth) {
  if (!e) throw std::invalid_argument("null expression");
  if (sdepth > 4096) throw std::runtime_error("expression nesting too deep");
  using K = BoundExpr::Kind;
  switch (e->kind) {
    case K::Const:
      return capped(e->value, ctx);
    case K::Param: {
      auto it = env.find(e->name);
      if (it == env.end()) throw std::invalid_argument("unbound parameter " + e->name);
      return it->second;
    }
    case K::Add:
    case K::Sub: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      if (a.over || b.over) return BVal::overflow();
      return capped(e->kind == K::Add ? Q(a.x + b.x) : Q(a.x - b.x), ctx);
    }
    case K::Mul: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      if (!a.over && a.x == 0) return BVal(Q(0));  // guard: skip the right factor
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      if (!b.over && b.x == 0) return BVal(Q(0));
      if (a.over || b.over) return BVal::overflow();
      return capped(a.x * b.x, ctx);
    }
    case K::Div: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      if (!b.over && b.x == 0) throw std::domain_error("division by zero");
      if (!a.over && a.x == 0) return BVal(Q(0));
      if (a.over || b.over) return BVal::overflow();
      return capped(a.x / b.x, ctx);
    }
    case K::Min:
    case K::Max: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      if (a.over || b.over) return BVal::overflow();
      bool takeA = e->kind == K::Min ? a.x <= b.x : a.x >= b.x;
      return takeA ? a : b;
    }
    case K::Floor:
    case K::Ceil: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      if (a.over) return a;
      return capped(Q(e->kind == K::Floor ? q_floor(a.x) : q_ceil(a.x)), ctx);
    }
    case K::Pow: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      return ev_pow(a, b, ctx);
    }
    case K::Less: {
      BVal a = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal b = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      if (a.over || b.over) return BVal::overflow();
      return BVal(Q(a.x < b.x ? 1 : 0));
    }
    case K::Named: {
      std::vector<Q> args;
      for (const auto& kid : e->kids) {
        BVal v = ev(kid, ctx, env, sdepth + 1, ndepth);
        if (v.over) return BVal::overflow();
        args.push_back(v.x);
      }
      return ev_named_values(e->name, args, ctx, ndepth);
    }
    case K::Iterate: {
      BVal cnt = ev(e->kids[0], ctx, env, sdepth + 1, ndepth);
      BVal cur = ev(e->kids[1], ctx, env, sdepth + 1, ndepth);
      auto step = [&](const BVal& v) {
        Env inner = env;
        inner[e->name] = v;
        return ev(e->kids[2], ctx, inner, sdepth + 1, ndepth);
      };
      if (cnt.over) {
        // Unknown count: only a fixed point survives.
        BVal nxt = step(cur);
        return nxt == cur ? cur : BVal::overflow();
      }
      if (cnt.x.get_den() != 1 || cnt.x < 0)
        throw std::domain_error("iteration count must be a natural number");
      const Z& n = cnt.x.get_num();
      uint64_t steps = 0;
      for (Z i = 0; i < n; ++i) {
        BVal nxt = step(cur);
        if (nxt == cur) break;  // stationary; further steps cannot change it
        cur = nxt;
        if (++steps > ctx.cfg.iterate_budget) return BVal::overflow();
      }
      return cur;
    }
  }
  throw std::logic_error("unhandled expression kind");
}

}  // namespace

BVal eval_expr(const ExprPtr& e, const OracleTable& oracles, const EvalConfig& cfg) {
  EvalCtx ctx{oracles, cfg, {}};
  Env env;
  return ev(e, ctx, env, 0, 0);
}

BVal eval_bound(const std::string& name, const std::map<std::string, Q>& args,
                const OracleTable& oracles, const EvalConfig& cfg) {
  return eval_expr(build_bound(name, args), oracles, cfg);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print(const ExprPtr& e, std::string& out, int parent);

void print_infix(const ExprPtr& e, std::string& out, int parent, int prec, const char* op) {
  bool wrap = prec < parent;
  if (wrap) out += "(";
  print(e->kids[0], out, prec);
  out += op;
  print(e->kids[1], out, prec + 1);  // - and / associate to the left
  if (wrap) out += ")";
}

void print_call(const char* name, const std::vector<ExprPtr>& args, std::string& out) {
  out += name;
  out += "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    print(args[i], out, 0);
  }
  out += ")";
}

void print(const ExprPtr& e, std::string& out, int parent) {
  using K = BoundExpr::Kind;
  switch (e->kind) {
    case K::Const: {
      bool wrap = e->value < 0 && parent > 0;
      if (wrap) out += "(";
      out += q_str(e->value);
      if (wrap) out += ")";
      return;
    }
    case K::Param:
      out += e->name;
      return;
    case K::Add:
      return print_infix(e, out, parent, 1, " + ");
    case K::Sub:
      return print_infix(e, out, parent, 1, " - ");
    case K::Mul:
      return print_infix(e, out, parent, 2, "*");
    case K::Div:
      return print_infix(e, out, parent, 2, "/");
    case K::Min:
      return print_call("min", e->kids, out);
    case K::Max:
      return print_call("max", e->kids, out);
    case K::Floor:
      return print_call("floor", e->kids, out);
    case K::Ceil:
      return print_call("ceil", e->kids, out);
    case K::Pow:
      return print_call("pow", e->kids, out);
    case K::Less:
      return print_call("less", e->kids, out);
    case K::Named:
      return print_call(e->name.c_str(), e->kids, out);
    case K::Iterate:
      out += "iter(";
      print(e->kids[0], out, 0);
      out += ", ";
      print(e->kids[1], out, 0);
      out += ", ";
      out += e->name;
      out += " -> ";
      print(e->kids[2], out, 0);
      out += ")";
      return;
  }
}

}  // namespace

std::string expr_str(const ExprPtr& e) {
  if (!e) throw std::invalid_argument("null expression");
  std::string out;
  print(e, out, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Parser {
  const std::string& s;
  size_t i = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw std::invalid_argument(std::string("expected '") + c + "' at offset " +
                                  std::to_string(i));
  }
  bool at_arrow() {
    skip();
    return i + 1 < s.size() && s[i] == '-' && s[i + 1] == '>';
  }

  std::string ident() {
    skip();
    size_t b = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (b == i) throw std::invalid_argument("expected identifier at offset " + std::to_string(b));
    return s.substr(b, i - b);
  }

  ExprPtr expr() {
    ExprPtr a = term();
    while (true) {
      if (at_arrow()) return a;
      if (eat('+')) {
        a = e_add(a, term());
      } else if (eat('-')) {
        a = e_sub(a, term());
      } else {
        return a;
      }
    }
  }

  ExprPtr term() {
    ExprPtr a = unary();
    while (true) {
      if (eat('*')) {
        a = e_mul(a, unary());
      } else if (eat('/')) {
        a = e_div(a, unary());
      } else {
        return a;
      }
    }
  }

  ExprPtr unary() {
    if (!at_arrow() && eat('-')) {
      ExprPtr a = unary();
      if (a->kind == BoundExpr::Kind::Const) return e_const(-a->value);
      return e_sub(e_const(Q(0)), a);
    }
    return atom();
  }

  ExprPtr atom() {
    skip();
    if (i >= s.size()) throw std::invalid_argument("unexpected end of expression");
    if (s[i] == '(') {
      ++i;
      ExprPtr a = expr();
      expect(')');
      return a;
    }
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      Q v(s.substr(b, i - b));
      v.canonicalize();
      return e_const(v);
    }
    std::string name = ident();
    skip();
    if (i >= s.size() || s[i] != '(') return e_param(name);
    ++i;  // consume '('
    if (name == "iter") {
      ExprPtr count = expr();
      expect(',');
      ExprPtr seed = expr();
      expect(',');
      std::string var = ident();
      if (!at_arrow()) throw std::invalid_argument("iter needs 'var -> body'");
      i += 2;
      ExprPtr body = expr();
      expect(')');
      return e_iter(count, seed, var, body);
    }
    std::vector<ExprPtr> args;
    if (!eat(')')) {
      args.push_back(expr());
      while (eat(',')) args.push_back(expr());
      expect(')');
    }
    auto need = [&](size_t n, const char* what) {
      if (args.size() != n)
        throw std::invalid_argument(std::string(what) + " takes " + std::to_string(n) +
                                    " arguments");
    };
    if (name == "min") {
      need(2, "min");
      return e_min(args[0], args[1]);
    }
    if (name == "max") {
      need(2, "max");
      return e_max(args[0], args[1]);
    }
    if (name == "floor") {
      need(1, "floor");
      return e_floor(args[0]);
    }
    if (name == "ceil") {
      need(1, "ceil");
      return e_ceil(args[0]);
    }
    if (name == "pow") {
      need(2, "pow");
      return e_pow(args[0], args[1]);
    }
    if (name == "less") {
      need(2, "less");
      return e_less(args[0], args[1]);
    }
    const NamedBound* nb = find_named(name);
    if (!nb) throw std::invalid_argument("unknown call " + name);
    if (nb->variadic ? args.size() < 3 : args.size() != nb->params.size())
      throw std::invalid_argument("wrong arity for " + name);
    return e_named(name, std::move(args));
  }
};

}  // namespace

ExprPtr parse_expr(const std::string& text) {
  Parser p(text);
  ExprPtr e = p.expr();
  p.skip();
  if (p.i != text.size())
    throw std::invalid_argument("trailing input at offset " + std::to_string(p.i));
  return e;
}

}  // namespace cst
