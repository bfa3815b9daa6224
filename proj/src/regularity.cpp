#include "cst/regularity.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cst {

namespace {

mpz_class mpz_pow(int k, long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(e));
  return p;
}

void check_levels(const std::vector<int>& L) {
  if (L.empty()) throw std::invalid_argument("empty level set");
  for (size_t i = 0; i < L.size(); ++i) {
    if (L[i] < 0) throw std::invalid_argument("negative level");
    if (i && L[i] <= L[i - 1]) throw std::invalid_argument("levels must increase");
  }
}

boost::dynamic_bitset<> level_bits(const LevelSet& A, int k, int n) {
  if (const auto* b = A.level_if(n)) return *b;
  return boost::dynamic_bitset<>(pow_u64(k, n));
}

void check_family(int k, const std::vector<LevelSet>& F) {
  if (k < 2) throw std::invalid_argument("alphabet too small");
  if (F.empty()) throw std::invalid_argument("empty family");
  for (const auto& A : F)
    if (A.k != k) throw std::invalid_argument("family alphabet mismatch");
}

// floor(16 / eps^4) for exact rational eps.
mpz_class jump_budget(const Q& eps) {
  mpz_class num = eps.get_num(), den = eps.get_den();
  mpz_class out;
  mpz_class hi = 16 * den * den * den * den;
  mpz_class lo = num * num * num * num;
  mpz_fdiv_q(out.get_mpz_t(), hi.get_mpz_t(), lo.get_mpz_t());
  return out;
}

}  // namespace

EnergyContext::EnergyContext(int k_, int n_, std::vector<int> I_, boost::dynamic_bitset<> A_)
    : k(k_), n(n_), I(std::move(I_)), A(std::move(A_)) {
  if (k < 2 || n < 0) throw std::invalid_argument("bad level parameters");
  for (size_t i = 0; i < I.size(); ++i) {
    if (I[i] < 0 || I[i] >= n) throw std::invalid_argument("coordinate out of range");
    if (i && I[i] <= I[i - 1]) throw std::invalid_argument("coordinates must increase");
  }
  if (A.size() != pow_u64(k, n)) throw std::invalid_argument("bitset size mismatch");
}

uint64_t EnergyContext::y_rank(uint64_t r) const {
  uint64_t y = 0;
  for (int i : I)
    y = y * static_cast<uint64_t>(k) + (r / pow_u64(k, n - 1 - i)) % static_cast<uint64_t>(k);
  return y;
}

std::vector<uint64_t> EnergyContext::section_counts() const {
  std::vector<uint64_t> counts(sections(), 0);
  size_t m = static_cast<size_t>(I.size());
  bool prefix = !I.empty() && I[0] == 0 && I.back() == static_cast<int>(m) - 1;
  uint64_t tail = pow_u64(k, n - static_cast<int>(m));
  for (auto r = A.find_first(); r != boost::dynamic_bitset<>::npos; r = A.find_next(r))
    ++counts[prefix ? r / tail : y_rank(r)];
  return counts;
}

Q EnergyContext::dens() const {
  Q d(static_cast<unsigned long>(A.count()), 1u);
  d /= Q(mpz_pow(k, n));
  d.canonicalize();
  return d;
}

Q energy(const EnergyContext& ctx) {
  mpz_class sum = 0;
  for (uint64_t c : ctx.section_counts()) {
    mpz_class m(static_cast<unsigned long>(c));
    sum += m * m;
  }
  // ave_y (c_y / k^{n-|I|})^2 = sum c_y^2 / k^{2n - |I|}
  Q e(sum, mpz_pow(ctx.k, 2L * ctx.n - static_cast<long>(ctx.I.size())));
  e.canonicalize();
  return e;
}

bool is_sparse(const std::vector<int>& L, int tau) {
  check_levels(L);
  if (tau < 1) throw std::invalid_argument("tau must be positive");
  for (size_t i = 1; i < L.size(); ++i)
    if (L[i] - L[i - 1] < tau) return false;
  return true;
}

std::vector<int> sparse_extension(const std::vector<int>& L, int tau) {
  if (!is_sparse(L, tau)) throw std::invalid_argument("set is not tau-sparse");
  std::vector<int> out;
  for (int l : L)
    for (int j = 0; j < tau; ++j) out.push_back(l + j);
  return out;
}

std::optional<RegularityWitness> regularity_violation(int k, const std::vector<LevelSet>& F,
                                                      const Q& eps, const std::vector<int>& L,
                                                      int tau) {
  check_family(k, F);
  check_levels(L);
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  if (tau > 1 && !is_sparse(L, tau)) throw std::invalid_argument("L is not tau-sparse");
  for (size_t a = 0; a < F.size(); ++a)
    for (size_t li = 0; li < L.size(); ++li) {
      int n = L[li];
      boost::dynamic_bitset<> bits = level_bits(F[a], k, n);
      Q ld(static_cast<unsigned long>(bits.count()), 1u);
      ld /= Q(mpz_pow(k, n));
      ld.canonicalize();
      for (uint64_t mask = 0; mask < (uint64_t{1} << li); ++mask) {
        std::vector<int> I;
        for (size_t j = 0; j < li; ++j)
          if (mask & (uint64_t{1} << j)) I.push_back(L[j]);
        std::vector<int> coords =
            (tau == 1 || I.empty()) ? I : sparse_extension(I, tau);
        EnergyContext ctx(k, n, coords, bits);
        auto counts = ctx.section_counts();
        uint64_t ss = ctx.section_size();
        for (uint64_t y = 0; y < counts.size(); ++y) {
          Q sd(static_cast<unsigned long>(counts[y]), static_cast<unsigned long>(ss));
          sd.canonicalize();
          Q diff = sd - ld;
          if (diff < 0) diff = -diff;
          if (diff > eps)
            return RegularityWitness{static_cast<int>(a), n, I, coords,
                                     word_unrank(y, static_cast<int>(coords.size()), k),
                                     sd, ld};
        }
      }
    }
  return std::nullopt;
}

std::optional<IntervalResult> select_block(int k, const std::vector<LevelSet>& F, const Q& eps,
                                           int m, const std::vector<int>& N, long max_blocks) {
  check_family(k, F);
  check_levels(N);
  if (m < 1) throw std::invalid_argument("block size must be positive");
  if (eps <= 0 || eps > 1) throw std::invalid_argument("eps out of range");
  int n = N.back();
  std::vector<int> rest(N.begin(), N.end() - 1);
  long blocks = static_cast<long>(rest.size()) / m;
  if (max_blocks >= 0) blocks = std::min(blocks, max_blocks);
  Q thr = eps * eps * eps * eps / 16;
  thr.canonicalize();
  std::vector<boost::dynamic_bitset<>> bits;
  for (const auto& A : F) bits.push_back(level_bits(A, k, n));
  for (long p = 0; p < blocks; ++p) {
    std::vector<int> Ip(rest.begin() + p * m, rest.begin() + (p + 1) * m);
    std::vector<int> JIp;   // J_p followed by the block, as one coordinate set
    for (int j = 0; j < Ip[0]; ++j) JIp.push_back(j);
    std::vector<int> Jp = JIp;
    JIp.insert(JIp.end(), Ip.begin(), Ip.end());
    bool admissible = true;
    for (const auto& b : bits) {
      Q gap = energy(EnergyContext(k, n, JIp, b)) - energy(EnergyContext(k, n, Jp, b));
      gap.canonicalize();
      if (gap > thr) {
        admissible = false;
        break;
      }
    }
    if (admissible) return IntervalResult{std::move(Ip), static_cast<int>(p)};
  }
  return std::nullopt;
}

IntervalResult energy_interval(int k, const std::vector<LevelSet>& F, const Q& eps, int m,
                               const std::vector<int>& N) {
  check_family(k, F);
  Q cap(1, mpz_pow(k, m));
  cap.canonicalize();
  if (eps <= 0 || eps >= cap) throw std::invalid_argument("eps must lie below k^-m");
  mpz_class r0 = mpz_class(static_cast<unsigned long>(F.size())) * jump_budget(eps) + 1;
  if (mpz_class(static_cast<long>(N.size())) < r0 * m + 1)
    throw std::invalid_argument("candidate set too small");
  auto out = select_block(k, F, eps, m, N, r0.get_si());
  if (!out) throw std::runtime_error("no admissible block");  // unreachable under the bound
  return *out;
}

std::vector<int> full_blocks(const std::vector<int>& base, int tau,
                             const std::vector<int>& window) {
  std::set<int> w(window.begin(), window.end());
  std::vector<int> out;
  for (int l : base) {
    bool all = true;
    for (int j = 0; j < tau && all; ++j) all = w.count(l + j) != 0;
    if (all) out.push_back(l);
  }
  return out;
}

IntervalResult sparse_energy_interval(int k, const std::vector<LevelSet>& F, const Q& eps,
                                      int m, const std::vector<int>& N, int tau) {
  check_family(k, F);
  if (!is_sparse(N, tau)) throw std::invalid_argument("N is not tau-sparse");
  if (m < 1) throw std::invalid_argument("block size must be positive");
  Q cap(1, mpz_pow(k, static_cast<long>(tau) * (m + 1)));
  cap.canonicalize();
  if (eps <= 0 || eps >= cap) throw std::invalid_argument("eps must lie below k^-tau(m+1)");
  mpz_class r0 = mpz_class(static_cast<unsigned long>(F.size())) * jump_budget(eps) + 1;
  if (mpz_class(static_cast<long>(N.size())) < r0 * (m + 1) + 1)
    throw std::invalid_argument("candidate set too small");
  std::vector<int> rest(N.begin(), N.end() - 1);
  std::vector<int> cand = sparse_extension(rest, tau);
  cand.push_back(N.back());
  auto got = select_block(k, F, eps, tau * (m + 1), cand, r0.get_si());
  if (!got) throw std::runtime_error("no admissible block");  // unreachable under the bound
  std::vector<int> M = full_blocks(rest, tau, got->M);
  if (static_cast<int>(M.size()) < m) throw std::runtime_error("window misses full blocks");
  M.resize(static_cast<size_t>(m));
  return IntervalResult{std::move(M), got->p0};
}

mpz_class regularity_bound(int k, int ell, int q, const Q& eps, int tau) {
  if (ell < 1 || q < 1 || tau < 1) throw std::invalid_argument("bad bound parameters");
  if (eps <= 0 || eps > 1) throw std::invalid_argument("eps out of range");
  Q half(1, 2 * mpz_pow(k, tau == 1 ? ell : static_cast<long>(tau) * (ell + 1)));
  half.canonicalize();
  Q rho = std::min(eps, half);
  mpz_class c = mpz_class(q) * jump_budget(rho) + 1;
  mpz_class m = 0;
  for (int i = 0; i < ell; ++i)
    m = tau == 1 ? mpz_class(c * m + 1) : mpz_class(c * (m + 1) + 1);
  return m;
}

RegularizeResult regularize(int k, const std::vector<LevelSet>& F, const Q& eps, int ell,
                            const std::vector<int>& N, RegMode mode, int tau) {
  check_family(k, F);
  check_levels(N);
  if (ell < 1) throw std::invalid_argument("ell must be positive");
  if (eps <= 0 || eps > 1) throw std::invalid_argument("eps out of range");
  if (static_cast<int>(N.size()) < ell) throw std::invalid_argument("N smaller than ell");
  if (tau > 1 && !is_sparse(N, tau)) throw std::invalid_argument("N is not tau-sparse");

  Q half(1, 2 * mpz_pow(k, tau == 1 ? ell : static_cast<long>(tau) * (ell + 1)));
  half.canonicalize();
  Q rho = std::min(eps, half);
  mpz_class bound = regularity_bound(k, ell, static_cast<int>(F.size()), eps, tau);
  bool meets = mpz_class(static_cast<long>(N.size())) >= bound;
  RegMode path = mode == RegMode::Auto ? (meets ? RegMode::Paper : RegMode::Scan) : mode;

  if (path == RegMode::Paper) {
    // Block sizes F^{(ell-i)}(0) for the nested intervals M_0, ..., M_{ell-1}.
    mpz_class c = mpz_class(static_cast<long>(F.size())) * jump_budget(rho) + 1;
    std::vector<mpz_class> sizes(static_cast<size_t>(ell));
    mpz_class cur = 0;
    for (int i = ell - 1; i >= 0; --i) {
      cur = tau == 1 ? mpz_class(c * cur + 1) : mpz_class(c * (cur + 1) + 1);
      sizes[static_cast<size_t>(i)] = cur;
    }
    bool built = false;
    std::vector<int> L;
    if (sizes[0] <= static_cast<long>(N.size())) {
      std::vector<int> M(N.begin(), N.begin() + sizes[0].get_si());
      L.push_back(M.back());
      built = true;
      for (int i = 1; i < ell && built; ++i) {
        int m = static_cast<int>(sizes[static_cast<size_t>(i)].get_si());
        if (tau == 1) {
          auto got = select_block(k, F, rho, m, M);
          built = got.has_value();
          if (built) M = got->M;
        } else {
          std::vector<int> rest(M.begin(), M.end() - 1);
          std::vector<int> cand = sparse_extension(rest, tau);
          cand.push_back(M.back());
          auto got = select_block(k, F, rho, tau * (m + 1), cand);
          if (got) {
            std::vector<int> blocks = full_blocks(rest, tau, got->M);
            built = static_cast<int>(blocks.size()) >= m;
            if (built) {
              blocks.resize(static_cast<size_t>(m));
              M = std::move(blocks);
            }
          } else {
            built = false;
          }
        }
        if (built) L.push_back(M.back());
      }
    }
    if (built) {
      std::sort(L.begin(), L.end());
      if (is_regular(k, F, eps, L, tau)) return {true, std::move(L), "paper"};
    }
    if (mode == RegMode::Paper) return {false, {}, "paper"};
    path = RegMode::Scan;
  }

  // Subsets of N of size ell in lexicographic order.
  std::vector<size_t> idx(static_cast<size_t>(ell));
  for (int i = 0; i < ell; ++i) idx[static_cast<size_t>(i)] = static_cast<size_t>(i);
  while (true) {
    std::vector<int> L;
    for (size_t i : idx) L.push_back(N[i]);
    if (is_regular(k, F, eps, L, tau)) return {true, std::move(L), "scan"};
    int j = ell - 1;
    while (j >= 0 &&
           idx[static_cast<size_t>(j)] == N.size() - static_cast<size_t>(ell - j))
      --j;
    if (j < 0) break;
    ++idx[static_cast<size_t>(j)];
    for (int i = j + 1; i < ell; ++i)
      idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
  }
  return {false, {}, "scan"};
}

}  // namespace cst
