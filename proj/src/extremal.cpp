#include "cst/extremal.hpp"

#include "cst/tree.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

namespace cst {

std::vector<Word> CSWitness::points() const {
  std::vector<Word> out = {c};
  std::vector<Word> cur = {c};
  for (const VariableWord& w : ws) {
    std::vector<Word> next;
    next.reserve(cur.size() * static_cast<size_t>(w.k));
    for (const Word& x : cur)
      for (int a = 1; a <= w.k; ++a) next.push_back(x.concat(w.substitute1(a)));
    out.insert(out.end(), next.begin(), next.end());
    cur = std::move(next);
  }
  return out;
}

std::optional<VariableWord> find_line(const LevelSet& A, int n) {
  if (n < 1) throw std::invalid_argument("line length must be at least 1");
  for (const VariableWord& w : enumerate_variable_words(A.k, n, 1)) {
    bool ok = true;
    for (int a = 1; a <= A.k && ok; ++a) ok = A.contains(w.substitute1(a));
    if (ok) return w;
  }
  return std::nullopt;
}

std::optional<CSWitness> find_cs(const LevelSet& A, int m,
                                 const std::vector<VariableWord>& pattern) {
  if (m < 1) throw std::invalid_argument("tree dimension must be at least 1");
  const int k = A.k;
  // The unconstrained search asks each generator to start with its variable,
  // which is exactly the one-letter pattern (v).
  std::vector<VariableWord> pre;
  if (pattern.empty()) {
    pre.assign(static_cast<size_t>(m), VariableWord(k, 1, {var_code(0)}));
  } else {
    if (static_cast<int>(pattern.size()) != m)
      throw std::invalid_argument("pattern must list one word per generator");
    for (const VariableWord& p : pattern)
      if (p.k != k || p.m != 1 || !p.valid())
        throw std::invalid_argument("pattern entries must be one-variable words over the same alphabet");
    pre = pattern;
  }

  int maxlev = -1;
  for (const auto& [lvl, bits] : A.levels)
    if (bits.any()) maxlev = std::max(maxlev, lvl);
  if (maxlev < 0) return std::nullopt;

  // rest[i] = least total length generators i..m-1 can add.
  std::vector<int> rest(static_cast<size_t>(m) + 1, 0);
  for (int i = m - 1; i >= 0; --i)
    rest[static_cast<size_t>(i)] = rest[static_cast<size_t>(i) + 1] + pre[static_cast<size_t>(i)].size();

  std::vector<VariableWord> gens;
  // Extensions of pre[stage] by length, then by suffix letters with the
  // variable first; matches compare_varwords on the candidate family.
  std::function<bool(int, int, const std::vector<Word>&)> grow =
      [&](int stage, int lvl, const std::vector<Word>& pts) -> bool {
    if (stage == m) return true;
    const VariableWord& p = pre[static_cast<size_t>(stage)];
    for (int len = p.size(); lvl + len + rest[static_cast<size_t>(stage) + 1] <= maxlev; ++len) {
      int s = len - p.size();
      uint64_t nsuf = pow_u64(k + 1, s);
      for (uint64_t sr = 0; sr < nsuf; ++sr) {
        std::vector<int> ls = p.letters;
        ls.resize(static_cast<size_t>(len));
        uint64_t r = sr;
        for (int i = s - 1; i >= 0; --i) {
          int d = static_cast<int>(r % static_cast<uint64_t>(k + 1));
          r /= static_cast<uint64_t>(k + 1);
          ls[static_cast<size_t>(p.size() + i)] = d == 0 ? var_code(0) : d;
        }
        VariableWord w(k, 1, std::move(ls));
        std::vector<Word> subs;
        subs.reserve(static_cast<size_t>(k));
        for (int a = 1; a <= k; ++a) subs.push_back(w.substitute1(a));
        bool ok = true;
        std::vector<Word> next;
        next.reserve(pts.size() * static_cast<size_t>(k));
        for (const Word& x : pts) {
          for (const Word& sub : subs) {
            Word y = x.concat(sub);
            if (!A.contains(y)) { ok = false; break; }
            next.push_back(std::move(y));
          }
          if (!ok) break;
        }
        if (!ok) continue;
        gens.push_back(w);
        if (grow(stage + 1, lvl + len, next)) return true;
        gens.pop_back();
      }
    }
    return false;
  };

  for (int l0 = 0; l0 + rest[0] <= maxlev; ++l0) {
    for (const Word& c : A.words(l0)) {
      std::vector<Word> pts = {c};
      if (grow(0, l0, pts)) {
        CSWitness out{c, gens};
        for (const Word& pt : out.points())
          if (!A.contains(pt)) throw std::logic_error("witness expansion left the set");
        return out;
      }
    }
  }
  return std::nullopt;
}

namespace {

// Include-first depth-first maximisation over a ground set of at most 31
// elements with forbidden fully-included edges.  First completed maximum in
// branch order is the size-lexicographically least witness; the shared bound
// only prunes strictly worse branches, so the outcome does not depend on
// thread timing.
struct FreeSearch {
  int u = 0;
  const std::vector<uint32_t>* edges = nullptr;
  int64_t max_nodes = 0;
  std::chrono::steady_clock::time_point deadline;
  std::atomic<int>* shared_best = nullptr;

  int64_t nodes = 0;
  int local_best = -1;
  uint32_t local_wit = 0;
  bool out_of_budget = false;

  void dfs(uint32_t in, int idx, int cnt) {
    if (out_of_budget) return;
    ++nodes;
    if (nodes > max_nodes ||
        ((nodes & 1023) == 0 && std::chrono::steady_clock::now() > deadline)) {
      out_of_budget = true;
      return;
    }
    uint32_t decided = idx >= 32 ? ~uint32_t{0} : (uint32_t{1} << idx) - 1;
    uint32_t out = decided & ~in;
    uint32_t undec = (u >= 32 ? ~uint32_t{0} : (uint32_t{1} << u) - 1) & ~decided;
    uint32_t taken = 0;
    int packed = 0;
    for (uint32_t e : *edges) {
      if (e & out) continue;
      uint32_t res = e & undec;
      if (res == 0) return;  // an avoided structure sits inside `in`
      if ((res & taken) == 0) {
        taken |= res;
        ++packed;
      }
    }
    int ub = cnt + std::popcount(undec) - packed;
    if (ub < std::max(local_best, shared_best->load(std::memory_order_relaxed))) return;
    if (idx == u) {
      if (cnt > local_best) {
        local_best = cnt;
        local_wit = in;
        int cur = shared_best->load(std::memory_order_relaxed);
        while (cnt > cur &&
               !shared_best->compare_exchange_weak(cur, cnt, std::memory_order_relaxed)) {
        }
      }
      return;
    }
    dfs(in | (uint32_t{1} << idx), idx + 1, cnt + 1);
    dfs(in, idx + 1, cnt);
  }
};

}  // namespace

ExtremalResult extremal_free(int k, const std::vector<int>& levels, int m, Avoid structure,
                             const SearchBudget& budget) {
  if (k < 2) throw std::invalid_argument("alphabet size must be at least 2");
  if (budget.max_nodes <= 0 || budget.max_millis <= 0)
    throw std::invalid_argument("budget must be positive");
  if (structure == Avoid::Line) {
    if (m != 1) throw std::invalid_argument("line avoidance is one-dimensional");
  } else if (m < 1) {
    throw std::invalid_argument("tree dimension must be at least 1");
  }
  std::vector<int> lv = levels;
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  if (lv.empty() || lv.front() < 0)
    throw std::invalid_argument("levels must be nonnegative");

  std::vector<Word> uni;
  for (int n : lv)
    for (const Word& w : all_words(k, n)) uni.push_back(w);
  if (uni.size() > 31) throw std::invalid_argument("universe exceeds 31 elements");
  const int u = static_cast<int>(uni.size());
  std::map<Word, int> index;
  for (int i = 0; i < u; ++i) index.emplace(uni[static_cast<size_t>(i)], i);

  std::vector<uint32_t> edges;
  if (structure == Avoid::Line) {
    for (int n : lv) {
      if (n < 1) continue;
      for (const VariableWord& w : enumerate_variable_words(k, n, 1)) {
        uint32_t e = 0;
        for (int a = 1; a <= k; ++a)
          e |= uint32_t{1} << index.at(w.substitute1(a));
        edges.push_back(e);
      }
    }
  } else {
    int nmax = lv.back();
    if (nmax >= 1 && m <= nmax) {
      std::set<int> lvset(lv.begin(), lv.end());
      for (const CSTree& t : enumerate_subtrees(full_tree(k, nmax), m)) {
        bool inside = true;
        for (int val : t.level_values())
          if (!lvset.count(val)) { inside = false; break; }
        if (!inside) continue;
        uint32_t e = 0;
        for (int j = 0; j <= m; ++j)
          for (const Word& p : t.level(j)) e |= uint32_t{1} << index.at(p);
        edges.push_back(e);
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(budget.max_millis);
  std::atomic<int> shared_best{-1};

  // Split on the first two decisions; seed order mirrors the sequential
  // include-first order, and the merge below restores it.
  const int t = std::min(2, u);
  const int ntask = 1 << t;
  std::vector<FreeSearch> tasks(static_cast<size_t>(ntask));
  for (int s = 0; s < ntask; ++s) {
    FreeSearch& fs = tasks[static_cast<size_t>(s)];
    fs.u = u;
    fs.edges = &edges;
    fs.max_nodes = budget.max_nodes;
    fs.deadline = deadline;
    fs.shared_best = &shared_best;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(ntask));
  for (int s = 0; s < ntask; ++s) {
    pool.emplace_back([&tasks, s, t] {
      uint32_t in = 0;
      for (int p = 0; p < t; ++p)
        if (!((s >> (t - 1 - p)) & 1)) in |= uint32_t{1} << p;
      tasks[static_cast<size_t>(s)].dfs(in, t, std::popcount(in));
    });
  }
  for (std::thread& th : pool) th.join();

  ExtremalResult res;
  int best = -1;
  uint32_t wit = 0;
  for (const FreeSearch& fs : tasks) {
    res.nodes += fs.nodes;
    if (fs.out_of_budget) throw budget_error("extremal search budget exceeded");
    if (fs.local_best > best) {
      best = fs.local_best;
      wit = fs.local_wit;
    }
  }
  res.max_size = static_cast<uint64_t>(best);
  for (int i = 0; i < u; ++i)
    if (wit & (uint32_t{1} << i)) res.witness.push_back(uni[static_cast<size_t>(i)]);
  return res;
}

std::optional<VariableWord> dhj_reduce(const LevelSet& A, int n, const Q& delta) {
  if (n < 1) throw std::invalid_argument("word length must be at least 1");
  if (delta <= Q(0) || delta > Q(1))
    throw std::invalid_argument("delta must lie in (0, 1]");
  const int k = A.k;
  if (Q(static_cast<long>(A.count(n))) < delta * q_pow_int(k, n))
    throw std::invalid_argument("set density below delta");

  // Section A_y = {x : y cat x in A}; keep the densest section per suffix
  // length, ties to the least prefix.
  LevelSet B(k);
  std::vector<Word> ys(static_cast<size_t>(n) + 1);
  for (int ell = 1; ell <= n; ++ell) {
    uint64_t ny = pow_u64(k, n - ell);
    uint64_t nx = pow_u64(k, ell);
    uint64_t bestCnt = 0;
    uint64_t bestY = 0;
    for (uint64_t yr = 0; yr < ny; ++yr) {
      Word y = word_unrank(yr, n - ell, k);
      uint64_t cnt = 0;
      for (uint64_t xr = 0; xr < nx; ++xr)
        if (A.contains(y.concat(word_unrank(xr, ell, k)))) ++cnt;
      if (yr == 0 || cnt > bestCnt) {
        bestCnt = cnt;
        bestY = yr;
      }
    }
    Word y = word_unrank(bestY, n - ell, k);
    ys[static_cast<size_t>(ell)] = y;
    for (uint64_t xr = 0; xr < nx; ++xr) {
      Word x = word_unrank(xr, ell, k);
      if (A.contains(y.concat(x))) B.insert(x);
    }
  }

  std::optional<CSWitness> line = find_cs(B, 1);
  if (!line) return std::nullopt;
  const VariableWord& w = line->ws.front();
  int ellR = line->c.size() + w.size();
  std::vector<int> gl = ys[static_cast<size_t>(ellR)].letters;
  gl.insert(gl.end(), line->c.letters.begin(), line->c.letters.end());
  gl.insert(gl.end(), w.letters.begin(), w.letters.end());
  VariableWord gen(k, 1, std::move(gl));
  for (int a = 1; a <= k; ++a)
    if (!A.contains(gen.substitute1(a)))
      throw std::logic_error("lifted line leaves the set");
  return gen;
}

}  // namespace cst
