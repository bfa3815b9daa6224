#include "cst/measures.hpp"

#include <stdexcept>

namespace cst {

Q fw_measure_m(const LevelSet& A, int m) {
  if (m < 0) throw std::invalid_argument("negative depth");
  Q sum = 0;
  for (int n = 0; n <= m; ++n) sum += A.dens(n);
  Q out = sum / (m + 1);
  out.canonicalize();
  return out;
}

Q fw_measure_tree(const LevelSet& A, const CSTree& W) {
  Q sum = 0;
  for (int n = 0; n <= W.dim(); ++n) {
    uint64_t hit = 0;
    for (const auto& t : W.level(n))
      if (A.contains(t)) ++hit;
    Q d(static_cast<unsigned long>(hit), static_cast<unsigned long>(W.level(n).size()));
    d.canonicalize();
    sum += d;
  }
  Q out = sum / (W.dim() + 1);
  out.canonicalize();
  return out;
}

Q fw_measure_L(const LevelSet& A, const std::vector<int>& L) {
  if (L.empty()) throw std::invalid_argument("empty level selection");
  Q sum = 0;
  for (int n : L) sum += A.dens(n);
  Q out = sum / static_cast<unsigned long>(L.size());
  out.canonicalize();
  return out;
}

}  // namespace cst
