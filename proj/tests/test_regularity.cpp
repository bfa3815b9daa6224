#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cst/regularity.hpp"
#include "oracles.hpp"

using namespace cst;

namespace {

using WordSet = std::set<std::vector<int>>;

void for_each_tuple(int k, int n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> w(static_cast<size_t>(n), 1);
  while (true) {
    f(w);
    int i = n - 1;
    while (i >= 0 && w[static_cast<size_t>(i)] == k) w[static_cast<size_t>(i--)] = 1;
    if (i < 0) break;
    ++w[static_cast<size_t>(i)];
  }
}

bool matches(const std::vector<int>& w, const std::vector<int>& pos,
             const std::vector<int>& vals) {
  for (size_t j = 0; j < pos.size(); ++j)
    if (w[static_cast<size_t>(pos[j])] != vals[j]) return false;
  return true;
}

Q frac(uint64_t a, uint64_t b) {
  Q q(static_cast<unsigned long>(a), static_cast<unsigned long>(b));
  q.canonicalize();
  return q;
}

// Section density of A inside [k]^n at the assignment vals on pos.
Q oracle_section(int k, int n, const WordSet& A, const std::vector<int>& pos,
                 const std::vector<int>& vals) {
  uint64_t hit = 0;
  for_each_tuple(k, n, [&](const std::vector<int>& w) {
    if (matches(w, pos, vals) && A.count(w)) ++hit;
  });
  return frac(hit, oracle::ipow(static_cast<uint64_t>(k), n - static_cast<int>(pos.size())));
}

Q oracle_energy(int k, int n, const std::vector<int>& I, const WordSet& A) {
  Q sum(0);
  uint64_t ys = oracle::ipow(static_cast<uint64_t>(k), static_cast<int>(I.size()));
  for (uint64_t yr = 0; yr < ys; ++yr) {
    std::vector<int> y = oracle::digits(yr, static_cast<int>(I.size()), k);
    for (int& v : y) ++v;
    Q d = oracle_section(k, n, A, I, y);
    sum += d * d;
  }
  sum /= Q(static_cast<unsigned long>(ys), 1u);
  sum.canonicalize();
  return sum;
}

// Reads Def 3.1 / Def 11.3 off the page over explicit word sets.
bool oracle_regular(int k, const std::vector<std::map<int, WordSet>>& F, const Q& eps,
                    const std::vector<int>& L, int tau) {
  for (const auto& A : F)
    for (size_t li = 0; li < L.size(); ++li) {
      int n = L[li];
      WordSet level = A.count(n) ? A.at(n) : WordSet{};
      Q ld = frac(level.size(), oracle::ipow(static_cast<uint64_t>(k), n));
      for (uint64_t mask = 0; mask < (uint64_t{1} << li); ++mask) {
        std::vector<int> pos;
        for (size_t j = 0; j < li; ++j)
          if (mask & (uint64_t{1} << j))
            for (int t = 0; t < tau; ++t) pos.push_back(L[j] + t);
        bool bad = false;
        uint64_t ys = oracle::ipow(static_cast<uint64_t>(k), static_cast<int>(pos.size()));
        for (uint64_t yr = 0; yr < ys && !bad; ++yr) {
          std::vector<int> y = oracle::digits(yr, static_cast<int>(pos.size()), k);
          for (int& v : y) ++v;
          Q sd = oracle_section(k, n, level, pos, y);
          Q diff = sd - ld;
          if (diff < 0) diff = -diff;
          if (diff > eps) bad = true;
        }
        if (bad) return false;
      }
    }
  return true;
}

boost::dynamic_bitset<> bits_of(int k, int n, const WordSet& A) {
  boost::dynamic_bitset<> b(oracle::ipow(static_cast<uint64_t>(k), n));
  for (const auto& w : A) {
    uint64_t r = 0;
    for (int c : w) r = r * static_cast<uint64_t>(k) + static_cast<uint64_t>(c - 1);
    b.set(r);
  }
  return b;
}

WordSet random_words(int k, int n, std::mt19937_64& rng) {
  WordSet out;
  for_each_tuple(k, n, [&](const std::vector<int>& w) {
    if (rng() & 1) out.insert(w);
  });
  return out;
}

// Family in both representations: library level sets and plain word sets.
struct SampledFamily {
  std::vector<LevelSet> lib;
  std::vector<std::map<int, WordSet>> raw;
};

SampledFamily sample_family(int k, int q, const std::vector<int>& levels,
                            std::mt19937_64& rng) {
  SampledFamily out;
  for (int a = 0; a < q; ++a) {
    LevelSet A(k);
    std::map<int, WordSet> raw;
    for (int n : levels) {
      WordSet ws = random_words(k, n, rng);
      for (const auto& w : ws) A.insert(Word(w));
      raw[n] = std::move(ws);
    }
    out.lib.push_back(std::move(A));
    out.raw.push_back(std::move(raw));
  }
  return out;
}

}  // namespace

TEST_SUITE("regularity") {

TEST_CASE("energy matches hand values and the oracle") {
  // Full square: every section is full.
  boost::dynamic_bitset<> full(4);
  full.set();
  for (const auto& I : std::vector<std::vector<int>>{{}, {0}, {1}, {0, 1}})
    CHECK(energy(EnergyContext(2, 2, I, full)) == Q(1));

  // A = {11,12}: ranks 0 and 1.
  boost::dynamic_bitset<> two(4);
  two.set(0);
  two.set(1);
  CHECK(energy(EnergyContext(2, 2, {}, two)) == Q(1, 4));
  CHECK(energy(EnergyContext(2, 2, {0}, two)) == Q(1, 2));
  CHECK(energy(EnergyContext(2, 2, {1}, two)) == Q(1, 4));

  for (int n = 0; n <= 3; ++n) {
    uint64_t sets = oracle::ipow(2, static_cast<int>(oracle::ipow(2, n)));
    for (uint64_t code = 0; code < sets; ++code) {
      WordSet A;
      uint64_t r = 0;
      for_each_tuple(2, n, [&](const std::vector<int>& w) {
        if (code & (uint64_t{1} << r)) A.insert(w);
        ++r;
      });
      auto bits = bits_of(2, n, A);
      for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
        std::vector<int> I;
        for (int j = 0; j < n; ++j)
          if (mask & (uint64_t{1} << j)) I.push_back(j);
        CHECK(energy(EnergyContext(2, n, I, bits)) == oracle_energy(2, n, I, A));
      }
    }
  }

  std::mt19937_64 rng(8101);
  for (int rep = 0; rep < 10; ++rep) {
    WordSet A = random_words(3, 2, rng);
    auto bits = bits_of(3, 2, A);
    for (const auto& I : std::vector<std::vector<int>>{{}, {0}, {1}, {0, 1}})
      CHECK(energy(EnergyContext(3, 2, I, bits)) == oracle_energy(3, 2, I, A));
  }

  CHECK_THROWS_AS(EnergyContext(2, 2, {2}, full), std::invalid_argument);
  CHECK_THROWS_AS(EnergyContext(2, 2, {1, 0}, full), std::invalid_argument);
  CHECK_THROWS_AS(EnergyContext(2, 3, {}, full), std::invalid_argument);
}

TEST_CASE("energy is monotone with an exact variance decomposition") {
  std::mt19937_64 rng(8102);
  auto check_one = [&](int n, const WordSet& A) {
    auto bits = bits_of(2, n, A);
    // Each coordinate goes to I, J, or neither.
    std::vector<int> label(static_cast<size_t>(n), 0);
    while (true) {
      std::vector<int> I, J, U;
      for (int j = 0; j < n; ++j) {
        if (label[static_cast<size_t>(j)] == 1) I.push_back(j);
        if (label[static_cast<size_t>(j)] == 2) J.push_back(j);
      }
      U = I;
      U.insert(U.end(), J.begin(), J.end());
      std::sort(U.begin(), U.end());
      Q eU = energy(EnergyContext(2, n, U, bits));
      Q eJ = energy(EnergyContext(2, n, J, bits));
      CHECK(eU <= Q(1));
      CHECK(eJ <= eU);
      // ave_z ave_y (dens A_(y,z) - ave_y dens A_(y,z))^2 computed afresh.
      Q rhs(0);
      uint64_t zs = oracle::ipow(2, static_cast<int>(J.size()));
      uint64_t ys = oracle::ipow(2, static_cast<int>(I.size()));
      for (uint64_t zr = 0; zr < zs; ++zr) {
        std::vector<int> z = oracle::digits(zr, static_cast<int>(J.size()), 2);
        for (int& v : z) ++v;
        std::vector<Q> ds;
        Q mean(0);
        for (uint64_t yr = 0; yr < ys; ++yr) {
          std::vector<int> y = oracle::digits(yr, static_cast<int>(I.size()), 2);
          for (int& v : y) ++v;
          std::vector<int> pos = I, vals = y;
          pos.insert(pos.end(), J.begin(), J.end());
          vals.insert(vals.end(), z.begin(), z.end());
          Q d = oracle_section(2, n, A, pos, vals);
          ds.push_back(d);
          mean += d;
        }
        mean /= Q(static_cast<unsigned long>(ys), 1u);
        for (const Q& d : ds) rhs += (d - mean) * (d - mean);
      }
      rhs /= Q(static_cast<unsigned long>(ys * zs), 1u);
      rhs.canonicalize();
      Q gap = eU - eJ;
      gap.canonicalize();
      CHECK(gap == rhs);
      int j = n - 1;
      while (j >= 0 && label[static_cast<size_t>(j)] == 2) label[static_cast<size_t>(j--)] = 0;
      if (j < 0) break;
      ++label[static_cast<size_t>(j)];
    }
  };

  for (int n = 0; n <= 3; ++n) {
    uint64_t sets = oracle::ipow(2, static_cast<int>(oracle::ipow(2, n)));
    for (uint64_t code = 0; code < sets; ++code) {
      WordSet A;
      uint64_t r = 0;
      for_each_tuple(2, n, [&](const std::vector<int>& w) {
        if (code & (uint64_t{1} << r)) A.insert(w);
        ++r;
      });
      check_one(n, A);
    }
  }
  for (int rep = 0; rep < 10; ++rep) check_one(4, random_words(2, 4, rng));
}

TEST_CASE("small energy gaps pin section densities") {
  std::mt19937_64 rng(8103);
  int used35 = 0, used36 = 0;
  const std::vector<Q> epss = {Q(1, 2), Q(1, 3), Q(1, 4), Q(1, 5)};
  for (int rep = 0; rep < 60; ++rep) {
    int n = 4;
    WordSet A = random_words(2, n, rng);
    auto bits = bits_of(2, n, A);
    std::vector<int> I, J;
    for (int j = 0; j < n; ++j) {
      switch (rng() % 3) {
        case 0: I.push_back(j); break;
        case 1: J.push_back(j); break;
        default: break;
      }
    }
    std::vector<int> U = I;
    U.insert(U.end(), J.begin(), J.end());
    std::sort(U.begin(), U.end());
    Q gap = energy(EnergyContext(2, n, U, bits)) - energy(EnergyContext(2, n, J, bits));
    Q cap = frac(1, oracle::ipow(2, static_cast<int>(I.size())));
    Q densA = frac(A.size(), oracle::ipow(2, n));

    uint64_t ys = oracle::ipow(2, static_cast<int>(I.size()));
    uint64_t zs = oracle::ipow(2, static_cast<int>(J.size()));
    for (const Q& eps : epss) {
      if (!(eps < cap)) continue;
      // Sublemma 3.5: gap <= eps^4 leaves few drifting z.
      if (gap <= eps * eps * eps * eps) {
        ++used35;
        uint64_t good = 0;
        for (uint64_t zr = 0; zr < zs; ++zr) {
          std::vector<int> z = oracle::digits(zr, static_cast<int>(J.size()), 2);
          for (int& v : z) ++v;
          Q dz = oracle_section(2, n, A, J, z);
          bool ok = true;
          for (uint64_t yr = 0; yr < ys && ok; ++yr) {
            std::vector<int> y = oracle::digits(yr, static_cast<int>(I.size()), 2);
            for (int& v : y) ++v;
            std::vector<int> pos = I, vals = y;
            pos.insert(pos.end(), J.begin(), J.end());
            vals.insert(vals.end(), z.begin(), z.end());
            Q diff = oracle_section(2, n, A, pos, vals) - dz;
            if (diff < 0) diff = -diff;
            ok = diff <= eps;
          }
          if (ok) ++good;
        }
        CHECK(frac(good, zs) >= Q(1) - eps);
      }
      // Corollary 3.6: gap <= eps^4/16 pins every section of I.
      Q thr = eps * eps * eps * eps / 16;
      if (gap <= thr) {
        ++used36;
        for (uint64_t yr = 0; yr < ys; ++yr) {
          std::vector<int> y = oracle::digits(yr, static_cast<int>(I.size()), 2);
          for (int& v : y) ++v;
          Q diff = oracle_section(2, n, A, I, y) - densA;
          if (diff < 0) diff = -diff;
          CHECK(diff <= eps);
        }
      }
    }
  }
  CHECK(used35 > 0);
  CHECK(used36 > 0);
}

TEST_CASE("regularity check matches a brute force reading") {
  std::mt19937_64 rng(8104);

  // Hand instances first.
  LevelSet empty2(2);
  CHECK(is_regular(2, {empty2}, Q(1, 10), {1, 2, 3}));
  LevelSet fulls(2);
  for (int n : {1, 2, 3}) fulls.level(n).set();
  CHECK(is_regular(2, {fulls}, Q(1, 10), {1, 2, 3}));

  LevelSet half(2);
  half.insert(Word({1}));
  half.insert(Word({1, 1}));
  half.insert(Word({1, 2}));
  CHECK(is_regular(2, {half}, Q(1, 10), {1, 2}));

  LevelSet corner(2);
  corner.insert(Word({1, 1}));
  auto w = regularity_violation(2, {corner}, Q(1, 10), {1, 2});
  REQUIRE(w.has_value());
  CHECK(w->member == 0);
  CHECK(w->n == 2);
  CHECK(w->I == std::vector<int>{1});
  CHECK(w->coords == std::vector<int>{1});
  CHECK(w->y == Word({1}));
  CHECK(w->section_dens == Q(1, 2));
  CHECK(w->level_dens == Q(1, 4));

  // Randomized agreement with the oracle, dense and sparse.
  for (int rep = 0; rep < 40; ++rep) {
    int k = 2, q = 1 + static_cast<int>(rng() % 2);
    std::vector<int> levels;
    for (int n = 0; n <= 5; ++n)
      if (rng() & 1) levels.push_back(n);
    if (levels.size() < 2) levels = {1, 3, 5};
    SampledFamily fam = sample_family(k, q, levels, rng);
    Q eps = rep % 3 == 0 ? Q(1, 10) : (rep % 3 == 1 ? Q(1, 4) : Q(1, 2));
    bool lib = is_regular(k, fam.lib, eps, levels);
    CHECK(lib == oracle_regular(k, fam.raw, eps, levels, 1));
    auto viol = regularity_violation(k, fam.lib, eps, levels);
    CHECK(lib == !viol.has_value());
    if (viol) {
      // Re-derive the reported densities from scratch.
      std::vector<int> vals;
      for (int c : viol->y.letters) vals.push_back(c);
      WordSet lvl = fam.raw[static_cast<size_t>(viol->member)].count(viol->n)
                        ? fam.raw[static_cast<size_t>(viol->member)].at(viol->n)
                        : WordSet{};
      CHECK(oracle_section(k, viol->n, lvl, viol->coords, vals) == viol->section_dens);
      Q diff = viol->section_dens - viol->level_dens;
      if (diff < 0) diff = -diff;
      CHECK(diff > eps);
    }

    std::vector<int> sparseL;
    for (int n : {0, 2, 4}) sparseL.push_back(n);
    CHECK(is_regular(k, fam.lib, eps, sparseL, 2) ==
          oracle_regular(k, fam.raw, eps, sparseL, 2));
  }

  LevelSet any(2);
  CHECK_THROWS_AS(is_regular(2, {any}, Q(1, 2), {1, 2}, 2), std::invalid_argument);
  CHECK_THROWS_AS(is_regular(2, {any}, Q(1, 2), std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(is_regular(2, {}, Q(1, 2), {1}), std::invalid_argument);
}

TEST_CASE("sparse helpers") {
  CHECK(is_sparse({1, 3, 5}, 2));
  CHECK(is_sparse({0, 7}, 7));
  CHECK(!is_sparse({1, 2, 5}, 2));
  CHECK(sparse_extension({2, 5}, 2) == std::vector<int>{2, 3, 5, 6});
  CHECK(sparse_extension({0, 3, 6}, 3) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
  for (int tau = 1; tau <= 3; ++tau) {
    std::vector<int> L;
    for (int i = 0; i < 4; ++i) L.push_back(2 + i * tau);
    CHECK(sparse_extension(L, tau).size() == static_cast<size_t>(tau) * L.size());
    // Sparseness is hereditary.
    for (uint64_t mask = 1; mask < 16; ++mask) {
      std::vector<int> sub;
      for (int i = 0; i < 4; ++i)
        if (mask & (uint64_t{1} << i)) sub.push_back(L[static_cast<size_t>(i)]);
      CHECK(is_sparse(sub, tau));
    }
  }
  CHECK_THROWS_AS(sparse_extension({1, 2}, 2), std::invalid_argument);
}

TEST_CASE("least admissible block is selected") {
  // A depends on coordinate 0 only, so the jump dies once 0 enters the prefix.
  LevelSet A(2);
  for (const auto& w : all_words(2, 4))
    if (w(0) == 1) A.insert(w);
  std::vector<int> N = {0, 1, 2, 3, 4};
  auto got = select_block(2, {A}, Q(1, 2), 1, N);
  REQUIRE(got.has_value());
  CHECK(got->p0 == 1);
  CHECK(got->M == std::vector<int>{1});

  // A full level has zero jumps everywhere, so the first block passes.
  LevelSet fullA(2);
  fullA.level(4).set();
  auto loose = select_block(2, {fullA}, Q(1, 2), 1, N);
  REQUIRE(loose.has_value());
  CHECK(loose->p0 == 0);

  // Blocks of width 2: {0,1} jumps, {2,3} does not.
  auto wide = select_block(2, {A}, Q(1, 2), 2, N);
  REQUIRE(wide.has_value());
  CHECK(wide->p0 == 1);
  CHECK(wide->M == std::vector<int>{2, 3});

  // A singleton gains energy from every coordinate, refusing all blocks.
  LevelSet point(2);
  point.insert(Word({1, 1, 1, 1}));
  CHECK(!select_block(2, {point}, Q(1, 100), 1, N).has_value());

  // The strict interval search enforces the stated preconditions.
  CHECK_THROWS_AS(energy_interval(2, {A}, Q(1, 2), 1, N), std::invalid_argument);
  CHECK_THROWS_AS(energy_interval(2, {A}, Q(1, 4), 1, N), std::invalid_argument);
  CHECK_THROWS_AS(sparse_energy_interval(2, {A}, Q(1, 4), 1, {0, 2, 4}, 2),
                  std::invalid_argument);
}

TEST_CASE("full block extraction inside a window") {
  CHECK(full_blocks({1, 3, 5, 7}, 2, {2, 3, 4, 5, 6}) == std::vector<int>{3, 5});
  CHECK(full_blocks({0, 4, 8}, 3, {4, 5, 6, 7, 8}) == std::vector<int>{4});
  CHECK(full_blocks({2, 9}, 1, {9}) == std::vector<int>{9});

  // Any window of tau(m+1) consecutive extension elements holds m full blocks.
  std::mt19937_64 rng(8105);
  for (int rep = 0; rep < 50; ++rep) {
    int tau = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    std::vector<int> base;
    int cur = static_cast<int>(rng() % 3);
    for (int i = 0; i < m + 3; ++i) {
      base.push_back(cur);
      cur += tau + static_cast<int>(rng() % 3);
    }
    std::vector<int> ext = sparse_extension(base, tau);
    size_t win = static_cast<size_t>(tau) * static_cast<size_t>(m + 1);
    for (size_t s = 0; s + win <= ext.size(); ++s) {
      std::vector<int> window(ext.begin() + static_cast<long>(s),
                              ext.begin() + static_cast<long>(s + win));
      CHECK(full_blocks(base, tau, window).size() >= static_cast<size_t>(m));
    }
  }
}

TEST_CASE("regularize certifies its output") {
  std::mt19937_64 rng(8106);

  // ell = 1 runs the paper construction: the bound is 1 and any singleton works.
  CHECK(regularity_bound(2, 1, 1, Q(1, 4)) == 1);
  CHECK(regularity_bound(2, 2, 1, Q(1, 4)) == 65538);
  CHECK(regularity_bound(2, 1, 3, Q(1, 2)) == 1);
  LevelSet seed(2);
  seed.insert(Word({1, 2}));
  auto one = regularize(2, {seed}, Q(1, 4), 1, {2, 5, 7});
  CHECK(one.ok);
  CHECK(one.mode == "paper");
  CHECK(one.L == std::vector<int>{2});

  // eps = 1 makes every pair regular; the scan returns the least subset.
  auto easy = regularize(2, {seed}, Q(1), 2, {1, 3, 4});
  CHECK(easy.ok);
  CHECK(easy.mode == "scan");
  CHECK(easy.L == std::vector<int>{1, 3});

  for (int rep = 0; rep < 30; ++rep) {
    int q = 1 + static_cast<int>(rng() % 2);
    std::vector<int> N;
    for (int n = 0; n <= 7; ++n)
      if (rng() % 3) N.push_back(n);
    if (N.size() < 3) N = {1, 2, 4, 6};
    SampledFamily fam = sample_family(2, q, N, rng);
    Q eps = rep & 1 ? Q(1, 4) : Q(1, 2);
    auto got = regularize(2, fam.lib, eps, 2, N);
    if (got.ok) {
      CHECK(got.mode == "scan");
      CHECK(got.L.size() == 2);
      CHECK(std::includes(N.begin(), N.end(), got.L.begin(), got.L.end()));
      CHECK(is_regular(2, fam.lib, eps, got.L));
      CHECK(oracle_regular(2, fam.raw, eps, got.L, 1));
    } else {
      // Certified absence: no pair of candidate levels is regular.
      for (size_t i = 0; i < N.size(); ++i)
        for (size_t j = i + 1; j < N.size(); ++j)
          CHECK(!oracle_regular(2, fam.raw, eps, {N[i], N[j]}, 1));
    }
  }

  // Sparse scan with certification.
  std::vector<int> sparseN = {0, 2, 4, 6};
  SampledFamily fam = sample_family(2, 1, sparseN, rng);
  auto sp = regularize(2, fam.lib, Q(1, 2), 2, sparseN, RegMode::Auto, 2);
  if (sp.ok) {
    CHECK(is_regular(2, fam.lib, Q(1, 2), sp.L, 2));
    CHECK(oracle_regular(2, fam.raw, Q(1, 2), sp.L, 2));
  } else {
    for (size_t i = 0; i < sparseN.size(); ++i)
      for (size_t j = i + 1; j < sparseN.size(); ++j)
        CHECK(!oracle_regular(2, fam.raw, Q(1, 2), {sparseN[i], sparseN[j]}, 2));
  }

  // Paper mode on a candidate set below the bound fails without throwing.
  auto forced = regularize(2, fam.lib, Q(1, 4), 2, sparseN, RegMode::Paper, 2);
  CHECK(!forced.ok);
  CHECK(forced.mode == "paper");

  CHECK_THROWS_AS(regularize(2, fam.lib, Q(1, 2), 5, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(regularize(2, fam.lib, Q(1, 2), 2, {1, 2, 3}, RegMode::Auto, 2),
                  std::invalid_argument);
}

}  // TEST_SUITE
