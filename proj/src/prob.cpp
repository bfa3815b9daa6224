#include "cst/prob.hpp"

#include <stdexcept>

namespace cst {

bool FiniteProbSpace::valid() const {
  if (points.size() != weights.size() || points.empty()) return false;
  Q sum = 0;
  for (const auto& w : weights) {
    if (w < 0) return false;
    sum += w;
  }
  return sum == 1;
}

FiniteProbSpace FiniteProbSpace::uniform(size_t n) {
  std::vector<std::string> pts;
  pts.reserve(n);
  for (size_t i = 0; i < n; ++i) pts.push_back(std::to_string(i));
  return uniform(std::move(pts));
}

FiniteProbSpace FiniteProbSpace::uniform(std::vector<std::string> pts) {
  if (pts.empty()) throw std::invalid_argument("empty space");
  Q w(1, static_cast<unsigned long>(pts.size()));
  w.canonicalize();
  FiniteProbSpace sp;
  sp.points = std::move(pts);
  sp.weights.assign(sp.points.size(), w);
  return sp;
}

static void check_event(const FiniteProbSpace& sp, const Event& A) {
  if (A.size() != sp.size()) throw std::invalid_argument("event size mismatch");
}

Q mu(const FiniteProbSpace& sp, const Event& A) {
  check_event(sp, A);
  Q sum = 0;
  for (size_t i = A.find_first(); i != Event::npos; i = A.find_next(i)) sum += sp.weights[i];
  return sum;
}

Q mu_cond(const FiniteProbSpace& sp, const Event& A, const Event& Y) {
  Q den = mu(sp, Y);
  if (den == 0) throw std::invalid_argument("conditioning on a null event");
  Q out = mu(sp, A & Y) / den;
  out.canonicalize();
  return out;
}

MarkovResult markov_select(const FiniteProbSpace& sp, const std::vector<Event>& As,
                           const Q& delta) {
  MarkovResult r;
  size_t n = As.size();
  if (n == 0) throw std::invalid_argument("no events");
  for (size_t i = 0; i < n; ++i) {
    check_event(sp, As[i]);
    Q m = mu(sp, As[i]);
    r.precondition_checks.push_back({"mu(A_" + std::to_string(i) + ")", m, ">=", delta});
  }
  for (const auto& c : r.precondition_checks) r.preconditions_ok &= c.holds();

  Q threshold = delta / 2 * static_cast<long>(n);
  threshold.canonicalize();
  r.selected = Event(sp.size());
  for (size_t w = 0; w < sp.size(); ++w) {
    long hits = 0;
    for (const auto& A : As)
      if (A.test(w)) ++hits;
    if (Q(hits) >= threshold) r.selected.set(w);
  }
  r.measure = mu(sp, r.selected);
  Q half = delta / 2;
  half.canonicalize();
  r.certificate.push_back({"mu(selected)", r.measure, ">=", half});
  return r;
}

PartitionResult partition_select(const FiniteProbSpace& sp, const Event& A, const Event& B,
                                 const std::vector<Event>& Qs, const Q& lambda, const Q& beta,
                                 const Q& eps) {
  PartitionResult r;
  check_event(sp, A);
  check_event(sp, B);
  size_t n = Qs.size();
  if (n == 0) throw std::invalid_argument("empty partition");
  Event uni(sp.size());
  bool disjoint = true;
  for (const auto& q : Qs) {
    check_event(sp, q);
    disjoint &= (uni & q).none();
    uni |= q;
  }
  if (!disjoint) throw std::invalid_argument("cells overlap");
  if (!(A & ~B).none()) throw std::invalid_argument("A not contained in B");

  Q muA = mu(sp, A), muB = mu(sp, B);
  Q lamB = lambda * muB;
  lamB.canonicalize();
  r.precondition_checks.push_back({"beta", beta, ">", Q(0)});
  r.precondition_checks.push_back({"eps", eps, ">", Q(0)});
  r.precondition_checks.push_back({"mu(A)", muA, ">=", lamB});
  r.precondition_checks.push_back({"mu(B)", muB, ">=", beta});
  Q leak = mu(sp, B & ~uni);
  Q leak_bound = eps * beta / 2;
  leak_bound.canonicalize();
  r.precondition_checks.push_back({"mu(B minus union)", leak, "<=", leak_bound});
  for (size_t i = 0; i < n; ++i)
    r.precondition_checks.push_back(
        {"mu(Q_" + std::to_string(i) + ")", mu(sp, Qs[i]), ">", Q(0)});
  for (const auto& c : r.precondition_checks) r.preconditions_ok &= c.holds();

  Q cell_bound = beta * eps / 4;
  cell_bound.canonicalize();
  r.mass = 0;
  bool equal = true;
  Q w0 = mu(sp, Qs[0]);
  for (size_t i = 0; i < n; ++i) {
    Q wq = mu(sp, Qs[i]);
    if (wq != w0) equal = false;
    if (wq == 0) continue;  // a_i = 0 convention for empty cells
    Q qb = mu_cond(sp, B, Qs[i]);
    Q qa = mu_cond(sp, A, Qs[i]);
    Q lhs = (lambda - eps) * qb;
    lhs.canonicalize();
    if (qa >= lhs && qb >= cell_bound) {
      r.I.push_back(static_cast<int>(i));
      r.mass += wq;
    }
  }
  r.mass.canonicalize();
  r.equal_weights = equal;
  r.certificate.push_back({"sum of selected cell measures", r.mass, ">=", cell_bound});
  if (equal) {
    Q count_bound = cell_bound * static_cast<long>(n);
    count_bound.canonicalize();
    r.certificate.push_back(
        {"selected cell count", Q(static_cast<long>(r.I.size())), ">=", count_bound});
  }
  return r;
}

PairResult pair_intersect(const FiniteProbSpace& sp, const std::vector<Event>& As, const Q& eps,
                          const Q& theta) {
  PairResult r;
  size_t n = As.size();
  if (n < 2) throw std::invalid_argument("need at least two events");
  r.precondition_checks.push_back({"theta", theta, ">", Q(0)});
  r.precondition_checks.push_back({"eps - theta", eps - theta, ">", Q(0)});
  r.precondition_checks.push_back({"eps", eps, "<=", Q(1)});
  Q gap = eps * eps - theta * theta;
  gap.canonicalize();
  Q nq(static_cast<long>(n));
  r.precondition_checks.push_back({"n (eps^2 - theta^2)", nq * gap, ">=", Q(1)});
  for (size_t i = 0; i < n; ++i) {
    check_event(sp, As[i]);
    r.precondition_checks.push_back(
        {"mu(A_" + std::to_string(i) + ")", mu(sp, As[i]), ">=", eps});
  }
  for (const auto& c : r.precondition_checks) r.preconditions_ok &= c.holds();

  Q thr = theta * theta;
  thr.canonicalize();
  for (size_t i = 0; i < n && !r.found; ++i)
    for (size_t j = i + 1; j < n && !r.found; ++j) {
      Q m = mu(sp, As[i] & As[j]);
      if (m >= thr) {
        r.found = true;
        r.i = static_cast<int>(i);
        r.j = static_cast<int>(j);
        r.inter = m;
      }
    }
  if (r.found)
    r.certificate.push_back({"mu(A_i n A_j)", r.inter, ">=", thr});
  return r;
}

uint64_t ProductSpace::size() const {
  uint64_t total = 1;
  for (const auto& f : factors) {
    if (f.size() == 0) return 0;
    if (total > (uint64_t{1} << 62) / f.size()) throw std::overflow_error("product too large");
    total *= f.size();
  }
  return total;
}

void ProductSpace::for_each(
    const std::function<bool(const std::vector<size_t>&, const Q&)>& f) const {
  std::vector<size_t> idx(factors.size(), 0);
  for (const auto& fac : factors)
    if (fac.size() == 0) return;
  while (true) {
    Q w = 1;
    for (size_t d = 0; d < factors.size(); ++d) w *= factors[d].weights[idx[d]];
    w.canonicalize();
    if (!f(idx, w)) return;
    size_t d = factors.size();
    while (d > 0) {
      --d;
      if (++idx[d] < factors[d].size()) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (factors.empty()) return;
  }
}

Q ProductSpace::mu(const std::function<bool(const std::vector<size_t>&)>& pred) const {
  Q sum = 0;
  for_each([&](const std::vector<size_t>& idx, const Q& w) {
    if (pred(idx)) sum += w;
    return true;
  });
  sum.canonicalize();
  return sum;
}

}  // namespace cst
