#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "cst/convolution.hpp"
#include "cst/measures.hpp"
#include "oracles.hpp"

using namespace cst;

namespace {

LevelSet random_set(int k, const std::vector<int>& lens, std::mt19937_64& rng) {
  LevelSet A(k);
  for (int n : lens) {
    auto& bs = A.level(n);
    for (size_t r = 0; r < bs.size(); ++r)
      if (rng() & 1) bs.set(r);
  }
  return A;
}

std::set<std::vector<int>> word_set(const std::vector<Word>& v) {
  std::set<std::vector<int>> out;
  for (const auto& w : v) out.insert(w.letters);
  return out;
}

// k = 2 host of dimension 4 whose levels sit at lengths 1,2,4,5,7.
CSTree bent_host() {
  return CSTree(2, Word({1}),
                {VariableWord(2, 1, {0}), VariableWord(2, 1, {0, 2}),
                 VariableWord(2, 1, {0}), VariableWord(2, 1, {0, 1})});
}

Q ratio(uint64_t num, uint64_t den) {
  Q q(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  q.canonicalize();
  return q;
}

Q dens_in(const LevelSet& A, const std::vector<Word>& pts) {
  uint64_t hit = 0;
  for (const auto& w : pts)
    if (A.contains(w)) ++hit;
  return ratio(hit, pts.size());
}

}  // namespace

TEST_SUITE("convolution") {

TEST_CASE("coordinate formula matches the worked examples") {
  ConvMap M5(5, {1, 3, 7, 9});
  CHECK(M5.nL() == 6);
  CHECK(M5.conv(Word({1, 2}), Word({3, 5, 4, 2, 4, 1})) == Word({3, 1, 5, 2, 4, 2, 4}));

  ConvMap M2(2, {2, 4});
  CHECK(M2.nL() == 3);
  CHECK(M2.conv(Word(), Word({1, 2, 1})) == Word({1, 2}));
  CHECK(M2.conv(Word({2}), Word({1, 2, 1})) == Word({1, 2, 2, 1}));

  // L = {0}: a single selected level at the root, X_L is a single empty word.
  ConvMap M0(2, {0});
  CHECK(M0.nL() == 0);
  CHECK(M0.conv(Word(), Word()) == Word());

  CHECK_THROWS_AS(M2.conv(Word({1, 2}), Word({1, 2, 1})), std::invalid_argument);
  CHECK_THROWS_AS(M2.conv(Word(), Word({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(ConvMap(2, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(ConvMap(2, {3, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ConvMap(2, {-1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(ConvMap(1, {0, 1}), std::invalid_argument);

  // Hosted: push through I_V.  Host dimension must cover max(L) and the
  // branching alphabets must agree.
  CSTree V = bent_host();
  ConvMap MH(2, {1, 3}, V);
  for (const auto& t : all_words(2, 1))
    for (const auto& x : MH.x_space())
      CHECK(MH.conv(t, x) == V.iso(MH.conv_coord(t, x)));
  CHECK_THROWS_AS(ConvMap(2, {1, 5}, V), std::invalid_argument);
  CHECK_THROWS_AS(ConvMap(3, {1, 3}, V), std::invalid_argument);
}

TEST_CASE("coordinate formula agrees with the independent oracle") {
  for (int k : {2, 3})
    for (const auto& L : std::vector<std::vector<int>>{
             {0, 2}, {1, 3, 4}, {2, 3, 5}, {0, 1, 2}}) {
      ConvMap M(k, L);
      for (int i = 0; i < M.ell(); ++i)
        for (const auto& t : all_words(k, i))
          for (const auto& x : M.x_space())
            CHECK(M.conv(t, x).letters == oracle::conv(L, t.letters, x.letters));
    }
}

TEST_CASE("omega families equipartition the host levels") {
  CSTree V = bent_host();
  for (const auto& L : std::vector<std::vector<int>>{{0, 2, 4}, {1, 3}, {2, 3, 4}}) {
    ConvMap M(2, L, V);
    for (int i = 0; i < M.ell(); ++i) {
      int li = L[static_cast<size_t>(i)];
      std::set<std::vector<int>> seen;
      size_t each = 0;
      for (const auto& t : all_words(2, i)) {
        auto om = M.omega(t);
        std::set<std::vector<int>> os = word_set(om);
        CHECK(os.size() == om.size());
        CHECK(os.size() == pow_u64(2, li - i));
        if (each == 0) each = os.size();
        CHECK(os.size() == each);
        for (const auto& ls : os) {
          CHECK(!seen.count(ls));
          // The I_V preimage of Omega_t is cut out by fixing the coordinates
          // along L_i = {l in L : l < l_i} to the letters of t.
          auto y = V.coords(Word(ls));
          REQUIRE(y.has_value());
          for (int j = 0; j < i; ++j) CHECK((*y)(L[static_cast<size_t>(j)]) == t(j));
        }
        seen.insert(os.begin(), os.end());
      }
      CHECK(seen == word_set(V.level(li)));
    }
  }
}

TEST_CASE("fibers equipartition the sample space") {
  CSTree V = bent_host();
  ConvMap M(2, {0, 2, 4}, V);
  auto xs = M.x_space();
  for (int i = 0; i < M.ell(); ++i)
    for (const auto& t : all_words(2, i)) {
      std::set<std::vector<int>> covered;
      auto om = M.omega(t);
      for (const auto& s : om) {
        auto fib = M.fiber(t, s);
        CHECK(!fib.empty());
        CHECK(fib.size() == xs.size() / om.size());
        CHECK(M.fiber_rep(t, s) == *std::min_element(fib.begin(), fib.end()));
        for (const auto& x : fib) {
          CHECK(M.conv(t, x) == s);
          CHECK(!covered.count(x.letters));
          covered.insert(x.letters);
        }
      }
      CHECK(covered == word_set(xs));
    }
  CHECK_THROWS_AS(M.fiber(Word(), Word({2, 2})), std::invalid_argument);
}

TEST_CASE("transfer maps are order and equivalence preserving bijections") {
  CSTree V = bent_host();
  for (const ConvMap& M : {ConvMap(2, {1, 3, 4}, V), ConvMap(3, {0, 2, 3})}) {
    for (int i = 1; i < M.ell(); ++i)
      for (const auto& t : all_words(M.k, i))
        for (const auto& t2 : all_words(M.k, i)) {
          auto om = M.omega(t);
          std::vector<Word> img;
          for (const auto& s : om) {
            Word g = M.transfer(t, t2, s);
            img.push_back(g);
            CHECK(word_set(M.fiber(t, s)) == word_set(M.fiber(t2, g)));
          }
          // omega() lists sections in lexicographic order, so a strictly
          // increasing image is exactly order preservation plus injectivity.
          for (size_t j = 1; j < img.size(); ++j) CHECK(img[j - 1] < img[j]);
          CHECK(word_set(img) == word_set(M.omega(t2)));
          for (int r = 1; r <= M.k; ++r)
            for (int r2 = 1; r2 <= M.k; ++r2) {
              if (r == r2 || !is_equivalent(t, t2, r, r2)) continue;
              for (size_t j = 0; j < om.size(); ++j)
                CHECK(is_equivalent(om[j], img[j], r, r2));
            }
        }
  }
}

TEST_CASE("pullback sections carry the density identities") {
  std::mt19937_64 rng(7101);
  CSTree V = bent_host();
  for (const ConvMap& M : {ConvMap(2, {1, 3}, V), ConvMap(2, {0, 2, 4}, V),
                           ConvMap(2, {2, 4}), ConvMap(3, {1, 3})}) {
    std::vector<int> lens;
    for (int l : M.L)
      lens.push_back(M.host ? M.host->level_len(l) : l);
    for (int rep = 0; rep < 4; ++rep) {
      LevelSet A = random_set(M.k, lens, rng);
      if (rep == 2)
        for (auto& [n, bs] : A.levels) bs.reset();
      if (rep == 3)
        for (auto& [n, bs] : A.levels) bs.set();
      Pullback B = pullback(M, A);
      for (int i = 0; i < M.ell(); ++i) {
        uint64_t levelHits = 0;
        for (const auto& t : all_words(M.k, i)) {
          auto om = M.omega(t);
          CHECK(dens_in(A, om) == B.section_density(t));
          levelHits += B.section(t).count();
        }
        // dens over the level of the host equals dens of B over [k]^i x X_L.
        std::vector<Word> lv =
            M.host ? M.host->level(M.L[static_cast<size_t>(i)])
                   : all_words(M.k, M.L[static_cast<size_t>(i)]);
        CHECK(dens_in(A, lv) == ratio(levelHits, pow_u64(M.k, i) * M.x_count()));
      }
    }
  }
  CHECK_THROWS_AS(pullback(ConvMap(2, {2, 4}), LevelSet(2), 1), budget_error);
}

TEST_CASE("fiber trees realize the convolution") {
  // Spec example: k = 2, L = {2,4} inside the full host of dimension 4.
  ConvMap M(2, {2, 4}, full_tree(2, 4));
  CSTree W = full_tree(2, 1);
  CSTree Wx = fiber_tree(M, W, Word({1, 2, 1}));
  CHECK(Wx.c == Word({1, 2}));
  CHECK(Wx.dim() == 1);
  CHECK(word_set(Wx.level(1)) ==
        word_set({Word({1, 2, 1, 1}), Word({1, 2, 2, 1})}));

  // cv_L(t, x) = I_{S_x}(t) for the coordinate tree S_x.
  for (int k : {2, 3})
    for (const auto& L : std::vector<std::vector<int>>{{0, 2}, {1, 3, 4}, {2, 3}}) {
      ConvMap N(k, L);
      for (const auto& x : N.x_space()) {
        CSTree S = fiber_coord_tree(N, x);
        CHECK(S.dim() == N.ell() - 1);
        for (int i = 0; i < N.ell(); ++i) {
          CHECK(S.level_len(i) == L[static_cast<size_t>(i)]);
          for (const auto& t : all_words(k, i)) CHECK(N.conv_coord(t, x) == S.iso(t));
        }
      }
    }

  // Hosted: W_x is a subtree of the host of the same dimension and its levels
  // are the convolution images of the levels of W.
  CSTree V = bent_host();
  ConvMap MH(2, {0, 2, 4}, V);
  std::vector<CSTree> ws = enumerate_subtrees(full_tree(2, 2), 1);
  ws.push_back(full_tree(2, 2));
  for (const CSTree& U : ws)
    for (const auto& x : MH.x_space()) {
      CSTree Ux = fiber_tree(MH, U, x);
      CHECK(Ux.dim() == U.dim());
      CHECK(is_subtree(V, Ux));
      for (int i = 0; i <= U.dim(); ++i) {
        std::set<std::vector<int>> img;
        for (const auto& w : U.level(i)) img.insert(MH.conv(w, x).letters);
        CHECK(word_set(Ux.level(i)) == img);
      }
    }

  CHECK_THROWS_AS(fiber_coord_tree(ConvMap(2, {3}), Word({1, 1, 1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(fiber_tree(MH, full_tree(2, 3), Word({1, 1})),
                  std::invalid_argument);
}

TEST_CASE("fiber tree levels carry section densities") {
  std::mt19937_64 rng(7102);
  CSTree V = bent_host();
  ConvMap M(2, {0, 2, 4}, V);
  std::vector<int> lens;
  for (int n : V.level_values()) lens.push_back(n);
  LevelSet A = random_set(2, lens, rng);
  Pullback B = pullback(M, A);
  std::vector<CSTree> ws = enumerate_subtrees(full_tree(2, 2), 1);
  ws.push_back(full_tree(2, 2));
  for (const CSTree& U : ws)
    for (const auto& x : M.x_space()) {
      CSTree Ux = fiber_tree(M, U, x);
      uint64_t xr = word_rank(x, 2);
      for (int i = 0; i <= U.dim(); ++i) {
        uint64_t hit = 0;
        for (const auto& w : U.level(i))
          if (B.section(w).test(xr)) ++hit;
        CHECK(dens_in(A, Ux.level(i)) == ratio(hit, U.level(i).size()));
      }
    }
}

TEST_CASE("averaged fiber densities reproduce level densities") {
  std::mt19937_64 rng(7103);
  CSTree V = bent_host();
  ConvMap M(2, {0, 2, 4}, V);
  std::vector<int> lens;
  for (int n : V.level_values()) lens.push_back(n);
  LevelSet A = random_set(2, lens, rng);
  auto xs = M.x_space();
  std::vector<CSTree> ws = enumerate_subtrees(full_tree(2, 2), 2);
  ws.insert(ws.end(), {full_tree(2, 2), full_tree(2, 1)});
  for (const CSTree& U : ws)
    for (int i = 0; i <= U.dim(); ++i) {
      // The images cv(W(i) x X_L) decompose as the disjoint union of the
      // omega sets of the level's words.
      std::set<std::vector<int>> img;
      for (const auto& w : U.level(i)) {
        auto om = M.omega(w);
        for (const auto& s : om) {
          CHECK(!img.count(s.letters));
          img.insert(s.letters);
        }
      }
      std::vector<Word> impts;
      for (const auto& ls : img) impts.push_back(Word(ls));
      Q lhs = dens_in(A, impts);
      Q rhs(0);
      for (const auto& x : xs) rhs += dens_in(A, fiber_tree(M, U, x).level(i));
      rhs /= Q(static_cast<unsigned long>(xs.size()), 1u);
      rhs.canonicalize();
      CHECK(lhs == rhs);
      // Taking W to be all of [2]^{<|L|} recovers the host level densities.
      if (U.dim() == 2 && U == full_tree(2, 2))
        CHECK(lhs == dens_in(A, V.level(M.L[static_cast<size_t>(i)])));
    }
}

TEST_CASE("averaged tree measures reproduce the level measure") {
  std::mt19937_64 rng(7104);
  for (int k : {2, 3})
    for (const auto& L : std::vector<std::vector<int>>{{1, 3, 4}, {0, 2}}) {
      ConvMap M(k, L);
      std::vector<int> lens;
      for (int n = 0; n <= L.back(); ++n) lens.push_back(n);
      LevelSet A = random_set(k, lens, rng);
      CSTree full = full_tree(k, M.ell() - 1);
      auto xs = M.x_space();
      Q ave(0);
      for (const auto& x : xs) ave += fw_measure_tree(A, fiber_tree(M, full, x));
      ave /= Q(static_cast<unsigned long>(xs.size()), 1u);
      ave.canonicalize();
      CHECK(ave == fw_measure_L(A, L));
    }
}

TEST_CASE("iterated convolution composes the level maps") {
  CSTree V = bent_host();

  // d = 0 reduces to a single convolution.
  CompatiblePair P0(2, {{1, 3}}, {V});
  CHECK(P0.d() == 0);
  ConvMap M0 = P0.level_map(0);
  for (int i = 0; i < 2; ++i)
    for (const auto& t : all_words(2, i))
      for (const auto& x : M0.x_space())
        CHECK(P0.iterate(t, {x}) == M0.conv(t, x));
  CHECK_THROWS_AS(P0.quotient(Word(), {Word({1, 1})}), std::invalid_argument);

  // d = 1: the iterate is the outer convolution of the inner one.
  CompatiblePair P1(2, {{1, 3}, {0, 1}}, {V, full_tree(2, 1)});
  ConvMap Ma = P1.level_map(0), Mb = P1.level_map(1);
  for (int i = 0; i < 2; ++i)
    for (const auto& t : all_words(2, i))
      for (const auto& xa : Ma.x_space())
        for (const auto& xb : Mb.x_space()) {
          CHECK(P1.iterate(t, {xa, xb}) == Ma.conv(Mb.conv(t, xb), xa));
          auto [s, rest] = P1.quotient(t, {xa, xb});
          CHECK(s == Mb.conv(t, xb));
          CHECK(P1.iterate(t, {xa, xb}) == P1.prefix(0).iterate(s, rest));
        }
  CHECK(P1.x_count() == Ma.x_count() * Mb.x_count());
  CHECK(P1.x_space().size() == P1.x_count());

  // d = 2 chain with a three element L_0.
  CompatiblePair P2(2, {{1, 3, 5}, {0, 2}, {0, 1}},
                    {full_tree(2, 5), full_tree(2, 2), full_tree(2, 1)});
  ConvMap N0 = P2.level_map(0), N1 = P2.level_map(1), N2 = P2.level_map(2);
  for (int i = 0; i < 2; ++i)
    for (const auto& t : all_words(2, i))
      for (const auto& tup : P2.x_space()) {
        CHECK(P2.iterate(t, tup) ==
              N0.conv(N1.conv(N2.conv(t, tup[2]), tup[1]), tup[0]));
        auto [s, rest] = P2.quotient(t, tup);
        CHECK(P2.iterate(t, tup) == P2.prefix(1).iterate(s, rest));
      }

  // V_1 must fit inside [k]^{<|L_0|}.
  CHECK_THROWS_AS(CompatiblePair(2, {{1, 3}, {0, 1}}, {V, full_tree(2, 2)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CompatiblePair(2, {{1, 5}, {0, 1}}, {V, full_tree(2, 1)}),
                  std::invalid_argument);
}

TEST_CASE("iterated fiber trees carry densities") {
  std::mt19937_64 rng(7105);
  CSTree V = bent_host();
  CompatiblePair P(2, {{0, 2, 4}, {0, 2}, {0, 1}},
                   {V, full_tree(2, 2), full_tree(2, 1)});
  std::vector<int> lens;
  for (int n : V.level_values()) lens.push_back(n);
  LevelSet A = random_set(2, lens, rng);
  CSTree W = full_tree(2, 1);  // subtree of [2]^{<|L_2|}
  for (const auto& bx : P.x_space()) {
    CSTree T = iterated_fiber_tree(P, W, bx);
    CHECK(T.dim() == W.dim());
    CHECK(is_subtree(V, T));
    for (int i = 0; i <= W.dim(); ++i) {
      uint64_t hit = 0;
      for (const auto& w : W.level(i))
        if (A.contains(P.iterate(w, bx))) ++hit;
      CHECK(dens_in(A, T.level(i)) == ratio(hit, W.level(i).size()));
    }
  }
}

TEST_CASE("quotient preimages and the density corollaries") {
  std::mt19937_64 rng(7106);
  CSTree V = bent_host();
  CompatiblePair P(2, {{0, 2, 4}, {0, 2}, {0, 1}},
                   {V, full_tree(2, 2), full_tree(2, 1)});
  int d = P.d();
  ConvMap Md = P.level_map(d);
  CompatiblePair Pp = P.prefix(d - 1);
  auto bxs = P.x_space();
  auto bxps = Pp.x_space();
  std::vector<int> lens;
  for (int n : V.level_values()) lens.push_back(n);

  for (int i = 0; i < 2; ++i)
    for (const auto& t : all_words(2, i)) {
      auto om = Md.omega(t);
      std::set<std::vector<int>> oms = word_set(om);

      // qv^{-1}(Omega_t x X_bl') = {t} x X_bl.
      for (const auto& t2 : all_words(2, i))
        for (const auto& bx : bxs) {
          auto [s, rest] = P.quotient(t2, bx);
          CHECK((oms.count(s.letters) != 0) == (t2 == t));
        }

      LevelSet A = random_set(2, lens, rng);

      // Corollary 6.7: top section density averages the lower ones.
      Q lhs = iterated_section_density(P, A, t);
      Q rhs(0);
      for (const auto& s : om) rhs += iterated_section_density(Pp, A, s);
      rhs /= Q(static_cast<unsigned long>(om.size()), 1u);
      rhs.canonicalize();
      CHECK(lhs == rhs);

      // Lemma 6.6 / Corollary 6.10 on random sections C of Omega_t x X_bl'.
      std::vector<std::pair<std::vector<int>, size_t>> cells;
      for (const auto& s : om)
        for (size_t j = 0; j < bxps.size(); ++j) cells.emplace_back(s.letters, j);
      std::set<std::pair<std::vector<int>, size_t>> C0, C1;
      for (const auto& c : cells) {
        if (rng() % 4 != 0) C0.insert(c);
        if (rng() & 1) C1.insert(c);
      }
      C0.insert(cells[0]);
      uint64_t b0 = 0, b01 = 0, binC = 0;
      for (const auto& bx : bxs) {
        auto [s, rest] = P.quotient(t, bx);
        size_t j = static_cast<size_t>(
            std::find(bxps.begin(), bxps.end(), rest) - bxps.begin());
        std::pair<std::vector<int>, size_t> cell{s.letters, j};
        bool in0 = C0.count(cell), in1 = C1.count(cell);
        if (in0) ++b0;
        if (in0 && in1) ++b01;
        if (in0) ++binC;
      }
      CHECK(ratio(C0.size(), cells.size()) == ratio(binC, bxs.size()));
      CHECK(ratio(b01, b0) ==
            ratio([&] {
                    uint64_t n = 0;
                    for (const auto& c : C0)
                      if (C1.count(c)) ++n;
                    return n;
                  }(),
                  C0.size()));
    }

  // Corollaries 6.8 and 6.9: lower bounds at the base level propagate up.
  LevelSet B = random_set(2, lens, rng);
  LevelSet A(2);
  for (const auto& [n, bs] : B.levels) {
    auto& a = A.level(n);
    for (size_t r = 0; r < bs.size(); ++r)
      if (bs.test(r) && (rng() & 1)) a.set(r);
  }
  CompatiblePair P0 = P.prefix(0);
  Q gamma(1), lambda(1);
  for (int i = 0; i < 3; ++i)
    for (const auto& s : all_words(2, i)) {
      Q da = iterated_section_density(P0, A, s);
      Q db = iterated_section_density(P0, B, s);
      gamma = std::min(gamma, db);
      if (db != 0) lambda = std::min(lambda, Q(da / db));
    }
  for (int i = 0; i < 2; ++i)
    for (const auto& t : all_words(2, i)) {
      CHECK(iterated_section_density(P, B, t) >= gamma);
      CHECK(iterated_section_density(P, A, t) >=
            lambda * iterated_section_density(P, B, t));
    }

  CHECK_THROWS_AS(iterated_section_density(P, B, Word(), 3), budget_error);
}

}  // TEST_SUITE
