#pragma once

#include <vector>

#include "gpwalk/marginals.hpp"

namespace gpwalk {

// Strictly increasing finite list of levels t_1 < ... < t_m.
class LevelGrid {
 public:
  explicit LevelGrid(std::vector<double> levels);

  const std::vector<double>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  double max_level() const { return levels_.back(); }

  // Geometric grid with exact endpoints; the LLN drivers use half-decade
  // spacing so the top decade holds points where ratio fluctuations are
  // already well inside the tolerance band.
  static LevelGrid geometric(double lo, double hi, std::size_t count);

 private:
  std::vector<double> levels_;
};

}  // namespace gpwalk
