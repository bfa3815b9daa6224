#include "cst/rational.hpp"

#include <stdexcept>

namespace cst {

Q parse_q(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational");
  Q q;
  if (q.set_str(s, 10) != 0)
    throw std::invalid_argument("bad rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

std::string q_str(const Q& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Z q_floor(const Q& q) {
  Z r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

Z q_ceil(const Q& q) {
  Z r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

Q q_pow(const Q& q, long e) {
  if (e == 0) return Q(1);
  bool inv = e < 0;
  unsigned long ue = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  if (inv && q == 0) throw std::domain_error("0 to negative power");
  Z num, den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num().get_mpz_t(), ue);
  mpz_pow_ui(den.get_mpz_t(), q.get_den().get_mpz_t(), ue);
  Q r = inv ? Q(den) / Q(num) : Q(num) / Q(den);
  r.canonicalize();
  return r;
}

Q q_pow_int(long base, long e) { return q_pow(Q(base), e); }

}  // namespace cst
