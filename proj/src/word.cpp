#include "cst/word.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cst {

Word Word::prefix(int n) const {
  return Word(std::vector<int>(letters.begin(), letters.begin() + n));
}

Word Word::concat(const Word& o) const {
  std::vector<int> ls = letters;
  ls.insert(ls.end(), o.letters.begin(), o.letters.end());
  return Word(std::move(ls));
}

std::strong_ordering compare_words(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  for (int i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return letter_key(a(i)) <=> letter_key(b(i));
  return std::strong_ordering::equal;
}

static void letter_to_stream(std::ostringstream& os, int c) {
  if (!is_var(c)) {
    if (c > 9) throw std::invalid_argument("text form needs k <= 9");
    os << c;
  } else if (var_index(c) == 0) {
    os << 'v';
  } else {
    os << 'v' << var_index(c);
  }
}

std::string word_str(const Word& w) {
  if (w.empty()) return "-";
  std::ostringstream os;
  for (int c : w.letters) letter_to_stream(os, c);
  return os.str();
}

Word parse_word(const std::string& s) {
  if (s == "-" || s.empty()) return Word{};
  std::vector<int> ls;
  for (char ch : s) {
    if (ch < '1' || ch > '9') throw std::invalid_argument("bad word text: " + s);
    ls.push_back(ch - '0');
  }
  return Word(std::move(ls));
}

uint64_t word_rank(const Word& w, int k) {
  uint64_t r = 0;
  for (int c : w.letters) {
    if (is_var(c) || c > k) throw std::invalid_argument("rank of non-plain word");
    r = r * static_cast<uint64_t>(k) + static_cast<uint64_t>(c - 1);
  }
  return r;
}

Word word_unrank(uint64_t r, int n, int k) {
  std::vector<int> ls(static_cast<size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    ls[static_cast<size_t>(i)] = static_cast<int>(r % static_cast<uint64_t>(k)) + 1;
    r /= static_cast<uint64_t>(k);
  }
  return Word(std::move(ls));
}

std::vector<Word> all_words(int k, int n) {
  uint64_t total = pow_u64(k, n);
  std::vector<Word> out;
  out.reserve(total);
  for (uint64_t r = 0; r < total; ++r) out.push_back(word_unrank(r, n, k));
  return out;
}

bool VariableWord::valid() const {
  if (m < 1) return false;
  int last = -1;
  for (int c : letters) {
    if (is_var(c)) {
      int i = var_index(c);
      if (i >= m) return false;
      // Blocks open in order; revisiting an older block would put an occurrence
      // of v_i after one of v_last with i < last.
      if (i == last + 1)
        last = i;
      else if (i != last)
        return false;
    } else if (c < 1 || c > k) {
      return false;
    }
  }
  return last == m - 1;
}

Word VariableWord::substitute(const std::vector<int>& a) const {
  if (static_cast<int>(a.size()) != m) throw std::invalid_argument("arity mismatch");
  for (int x : a)
    if (x < 1 || x > k) throw std::invalid_argument("letter out of range");
  std::vector<int> out;
  out.reserve(letters.size());
  for (int c : letters) out.push_back(is_var(c) ? a[static_cast<size_t>(var_index(c))] : c);
  return Word(std::move(out));
}

std::strong_ordering compare_varwords(const VariableWord& a, const VariableWord& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  for (int i = 0; i < a.size(); ++i)
    if (a.letters[static_cast<size_t>(i)] != b.letters[static_cast<size_t>(i)])
      return letter_key(a.letters[static_cast<size_t>(i)]) <=>
             letter_key(b.letters[static_cast<size_t>(i)]);
  return std::strong_ordering::equal;
}

std::string varword_str(const VariableWord& w) {
  if (w.m <= 1) {
    if (w.letters.empty()) return "-";
    std::ostringstream os;
    for (int c : w.letters) letter_to_stream(os, c);
    return os.str();
  }
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < w.letters.size(); ++i) {
    if (i) os << ',';
    int c = w.letters[i];
    if (is_var(c))
      os << 'v' << var_index(c);
    else
      os << c;
  }
  os << ']';
  return os.str();
}

VariableWord parse_varword(const std::string& s, int k) {
  std::vector<int> ls;
  int maxv = -1;
  if (!s.empty() && s[0] == '[') {
    if (s.back() != ']') throw std::invalid_argument("unterminated variable word: " + s);
    std::string body = s.substr(1, s.size() - 2);
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      if (tok.empty()) throw std::invalid_argument("bad variable word: " + s);
      if (tok[0] == 'v') {
        int idx = tok.size() == 1 ? 0 : std::stoi(tok.substr(1));
        ls.push_back(var_code(idx));
        maxv = std::max(maxv, idx);
      } else {
        ls.push_back(std::stoi(tok));
      }
    }
  } else {
    size_t i = 0;
    while (i < s.size()) {
      char ch = s[i];
      if (ch == 'v') {
        // Compact form has a single variable; digits after 'v' are constants.
        ls.push_back(var_code(0));
        maxv = std::max(maxv, 0);
        ++i;
      } else if (ch >= '1' && ch <= '9') {
        ls.push_back(ch - '0');
        ++i;
      } else {
        throw std::invalid_argument("bad variable word text: " + s);
      }
    }
  }
  VariableWord w(k, maxv + 1, std::move(ls));
  if (!w.valid()) throw std::invalid_argument("invalid variable word: " + s);
  return w;
}

namespace {

void enum_varwords_rec(int k, int n, int m, std::vector<int>& cur, int last,
                       std::vector<VariableWord>& out) {
  int pos = static_cast<int>(cur.size());
  if (pos == n) {
    if (last == m - 1) out.emplace_back(k, m, cur);
    return;
  }
  int remaining = n - pos;
  // Choices in letter_key order: repeat current variable, open the next one,
  // then constants; prune when the unopened variables cannot fit.
  if (last >= 0 && m - 1 - last <= remaining) {
    cur.push_back(var_code(last));
    enum_varwords_rec(k, n, m, cur, last, out);
    cur.pop_back();
  }
  if (last + 1 < m && m - 1 - (last + 1) <= remaining - 1) {
    cur.push_back(var_code(last + 1));
    enum_varwords_rec(k, n, m, cur, last + 1, out);
    cur.pop_back();
  }
  if (m - 1 - last <= remaining - 1) {
    for (int c = 1; c <= k; ++c) {
      cur.push_back(c);
      enum_varwords_rec(k, n, m, cur, last, out);
      cur.pop_back();
    }
  }
}

}  // namespace

std::vector<VariableWord> enumerate_variable_words(int k, int n, int m) {
  std::vector<VariableWord> out;
  if (m < 1 || m > n) return out;
  std::vector<int> cur;
  cur.reserve(static_cast<size_t>(n));
  enum_varwords_rec(k, n, m, cur, -1, out);
  return out;
}

std::vector<VariableWord> enumerate_left_variable_words(int k, int n) {
  std::vector<VariableWord> out;
  if (n < 1) return out;
  std::vector<int> cur{var_code(0)};
  // Positions 1..n-1 range over {v} then 1..k, counted in mixed radix for lex order.
  uint64_t total = pow_u64(k + 1, n - 1);
  out.reserve(total);
  for (uint64_t r = 0; r < total; ++r) {
    cur.resize(1);
    uint64_t t = r;
    std::vector<int> tail(static_cast<size_t>(n - 1));
    for (int i = n - 2; i >= 0; --i) {
      int d = static_cast<int>(t % static_cast<uint64_t>(k + 1));
      t /= static_cast<uint64_t>(k + 1);
      tail[static_cast<size_t>(i)] = d == 0 ? var_code(0) : d;
    }
    cur.insert(cur.end(), tail.begin(), tail.end());
    out.emplace_back(k, 1, cur);
  }
  return out;
}

std::vector<Word> CombSubspace::points() const {
  std::vector<Word> out;
  uint64_t total = pow_u64(gen.k, gen.m);
  out.reserve(total);
  std::vector<int> a(static_cast<size_t>(gen.m), 1);
  for (uint64_t r = 0; r < total; ++r) {
    uint64_t t = r;
    for (int i = gen.m - 1; i >= 0; --i) {
      a[static_cast<size_t>(i)] = static_cast<int>(t % static_cast<uint64_t>(gen.k)) + 1;
      t /= static_cast<uint64_t>(gen.k);
    }
    out.push_back(gen.substitute(a));
  }
  return out;
}

bool CombSubspace::contains(const Word& w) const {
  if (w.size() != gen.size()) return false;
  std::vector<int> assign(static_cast<size_t>(gen.m), 0);
  for (int p = 0; p < w.size(); ++p) {
    int g = gen.letters[static_cast<size_t>(p)];
    if (is_var(g)) {
      int i = var_index(g);
      if (assign[static_cast<size_t>(i)] == 0)
        assign[static_cast<size_t>(i)] = w(p);
      else if (assign[static_cast<size_t>(i)] != w(p))
        return false;
    } else if (g != w(p)) {
      return false;
    }
  }
  return true;
}

VariableWord compose_varwords(const VariableWord& g, const VariableWord& u) {
  if (u.size() != g.m) throw std::invalid_argument("compose arity mismatch");
  std::vector<int> out;
  out.reserve(g.letters.size());
  for (int c : g.letters)
    out.push_back(is_var(c) ? u.letters[static_cast<size_t>(var_index(c))] : c);
  VariableWord r(g.k, u.m, std::move(out));
  return r;
}

std::vector<CombSubspace> enumerate_subspaces(const CombSubspace& V, int ell) {
  if (ell < 1 || ell > V.dim()) throw std::invalid_argument("subspace dimension out of range");
  std::vector<CombSubspace> out;
  for (const VariableWord& u : enumerate_variable_words(V.gen.k, V.dim(), ell))
    out.push_back(CombSubspace{compose_varwords(V.gen, u)});
  return out;
}

CombSubspace full_space(int k, int n) {
  std::vector<int> ls;
  ls.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ls.push_back(var_code(i));
  return CombSubspace{VariableWord(k, n, std::move(ls))};
}

std::vector<CombSubspace> enumerate_subspaces_full(int k, int n, int ell) {
  std::vector<CombSubspace> out;
  for (const VariableWord& u : enumerate_variable_words(k, n, ell))
    out.push_back(CombSubspace{u});
  return out;
}

LocatedWord canonical_embed(const std::set<int>& J, const Word& x) {
  if (static_cast<int>(J.size()) != x.size())
    throw std::invalid_argument("canonical_embed length mismatch");
  LocatedWord lw;
  int i = 0;
  for (int pos : J) lw.values[pos] = x(i++);
  return lw;
}

Word canonical_extract(const LocatedWord& lw) {
  std::vector<int> ls;
  ls.reserve(lw.values.size());
  for (const auto& [pos, letter] : lw.values) ls.push_back(letter);
  return Word(std::move(ls));
}

bool is_equivalent(const Word& x, const Word& y, int i, int j) {
  if (i == j) throw std::invalid_argument("equivalence needs i != j");
  if (x.size() != y.size()) return false;
  for (int r = 0; r < x.size(); ++r) {
    bool xi = x(r) == i || x(r) == j;
    bool yi = y(r) == i || y(r) == j;
    if (xi != yi) return false;
    if (!xi && x(r) != y(r)) return false;
  }
  return true;
}

std::vector<Word> equiv_partners(const Word& x, int i, int j) {
  std::vector<int> positions;
  for (int r = 0; r < x.size(); ++r)
    if (x(r) == i || x(r) == j) positions.push_back(r);
  std::vector<Word> out;
  uint64_t total = 1ull << positions.size();
  out.reserve(total);
  int lo = std::min(i, j), hi = std::max(i, j);
  for (uint64_t mask = 0; mask < total; ++mask) {
    Word y = x;
    for (size_t p = 0; p < positions.size(); ++p)
      y.letters[static_cast<size_t>(positions[p])] = (mask >> p & 1) ? hi : lo;
    out.push_back(y);
  }
  std::sort(out.begin(), out.end());
  return out;
}

uint64_t pow_u64(int k, int n) {
  uint64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > UINT64_MAX / static_cast<uint64_t>(k)) throw std::overflow_error("level too large");
    r *= static_cast<uint64_t>(k);
  }
  return r;
}

boost::dynamic_bitset<>& LevelSet::level(int n) {
  auto it = levels.find(n);
  if (it == levels.end())
    it = levels.emplace(n, boost::dynamic_bitset<>(pow_u64(k, n))).first;
  return it->second;
}

const boost::dynamic_bitset<>* LevelSet::level_if(int n) const {
  auto it = levels.find(n);
  return it == levels.end() ? nullptr : &it->second;
}

void LevelSet::insert(const Word& w) { level(w.size()).set(word_rank(w, k)); }

bool LevelSet::contains(const Word& w) const {
  const auto* b = level_if(w.size());
  return b && b->test(word_rank(w, k));
}

uint64_t LevelSet::count(int n) const {
  const auto* b = level_if(n);
  return b ? b->count() : 0;
}

uint64_t LevelSet::total() const {
  uint64_t t = 0;
  for (const auto& [n, b] : levels) t += b.count();
  return t;
}

Q LevelSet::dens(int n) const {
  Q d(static_cast<unsigned long>(count(n)), static_cast<unsigned long>(pow_u64(k, n)));
  d.canonicalize();
  return d;
}

std::vector<Word> LevelSet::words(int n) const {
  std::vector<Word> out;
  const auto* b = level_if(n);
  if (!b) return out;
  for (uint64_t r = b->find_first(); r != boost::dynamic_bitset<>::npos; r = b->find_next(r))
    out.push_back(word_unrank(r, n, k));
  return out;
}

std::vector<Word> LevelSet::all() const {
  std::vector<Word> out;
  for (const auto& [n, b] : levels) {
    auto ws = words(n);
    out.insert(out.end(), ws.begin(), ws.end());
  }
  return out;
}

bool is_insensitive(const LevelSet& A, int i, int j) {
  for (const auto& [n, b] : A.levels) {
    for (uint64_t r = b.find_first(); r != boost::dynamic_bitset<>::npos; r = b.find_next(r)) {
      Word x = word_unrank(r, n, A.k);
      for (const Word& y : equiv_partners(x, i, j))
        if (!b.test(word_rank(y, A.k))) return false;
    }
  }
  return true;
}

LevelSet parse_level_set(const std::string& text, int k) {
  LevelSet A(k);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    A.insert(parse_word(line));
  }
  return A;
}

std::string level_set_text(const LevelSet& A) {
  std::ostringstream os;
  for (const auto& [n, b] : A.levels)
    for (uint64_t r = b.find_first(); r != boost::dynamic_bitset<>::npos; r = b.find_next(r))
      os << word_str(word_unrank(r, n, A.k)) << "\n";
  return os.str();
}

}  // namespace cst
