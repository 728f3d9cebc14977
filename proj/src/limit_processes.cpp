#include "gpwalk/limit_processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpwalk/normal.hpp"

namespace gpwalk {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_prm_params(double a, double b, double window, double eps) {
  if (!(a > 0.0) || !(b > 0.0) || !(window > 0.0) || !(eps > 0.0))
    throw ConfigError("sample_prm: a, b, window and eps must be positive");
  const double expected = window * a * std::pow(eps, -b);
  if (expected > 1e8)
    throw ConfigError("sample_prm: expected atom count above 1e8; raise the "
                      "mark truncation");
}

// Appends atoms on (offset, offset + span]; two uniforms per atom, gap first.
void append_atoms(AtomSet& set, double offset, double span, SplitMix64& rng) {
  const double rate = set.intensity_a * std::pow(set.truncation, -set.intensity_b);
  const double inv_b = 1.0 / set.intensity_b;
  double t = 0.0;
  for (;;) {
    t += -std::log(rng.next_unit()) / rate;
    if (t > span) break;
    set.times.push_back(offset + t);
    set.marks.push_back(set.truncation * std::pow(rng.next_unit(), -inv_b));
  }
}
}  // namespace

AtomSet sample_prm(double a, double b, double window, double eps,
                   SplitMix64& rng) {
  check_prm_params(a, b, window, eps);
  AtomSet set;
  set.intensity_a = a;
  set.intensity_b = b;
  set.window = window;
  set.truncation = eps;
  append_atoms(set, 0.0, window, rng);
  return set;
}

double record_value(const AtomSet& atoms, double mu, double z) {
  if (!(z >= 0.0 && z <= atoms.window))
    throw ConfigError("record_value: z must lie in [0, window]");
  double best = mu > 0.0 ? mu * z : 0.0;
  for (std::size_t k = 0; k < atoms.times.size(); ++k) {
    if (atoms.times[k] > z) break;
    best = std::max(best, mu * atoms.times[k] + atoms.marks[k]);
  }
  return best;
}

double inverse_record(const AtomSet& atoms, double mu, double u) {
  if (!(u >= 0.0)) throw ConfigError("inverse_record: u must be nonnegative");
  const double drift_cross = mu > 0.0 ? u / mu : kInf;
  if (mu > 0.0 && drift_cross > atoms.window)
    throw WindowTooShort("inverse_record: drift crossing beyond the window");
  for (std::size_t k = 0; k < atoms.times.size(); ++k) {
    const double t = atoms.times[k];
    if (t >= drift_cross) break;
    if (mu * t + atoms.marks[k] > u) return t;
  }
  if (mu > 0.0) return drift_cross;
  throw WindowTooShort("inverse_record: no crossing inside the window");
}

double cdf_X(double mu, double c, double u, double y) {
  if (!(c > 0.0) || !(u > 0.0)) throw ConfigError("cdf_X: c and u must be positive");
  if (y < 0.0) return 0.0;
  if (mu > 0.0) {
    if (y >= u / mu) return 1.0;
    return -std::expm1(c / mu * std::log1p(-mu * y / u));
  }
  if (mu < 0.0) {
    return -std::expm1(-c / (-mu) * std::log1p(-mu * y / u));
  }
  return -std::expm1(-c * y / u);
}

std::vector<double> gaussian_fdd_reference(const std::vector<double>& u_grid,
                                           SplitMix64& rng) {
  if (u_grid.empty()) throw ConfigError("gaussian_fdd_reference: empty grid");
  std::vector<double> out(u_grid.size());
  double prev_u = 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (!(u_grid[i] >= 0.0) || (i > 0 && !(u_grid[i] > u_grid[i - 1])))
      throw ConfigError("gaussian_fdd_reference: grid must be increasing and >= 0");
    const double du = u_grid[i] - prev_u;
    value += du > 0.0 ? std::sqrt(du) * norm_quantile(rng.next_unit()) : 0.0;
    out[i] = value;
    prev_u = u_grid[i];
  }
  return out;
}

double sample_inverse_record(double a, double b, double mu, double u,
                             double eps, SplitMix64& rng) {
  if (!(u > 0.0)) throw ConfigError("sample_inverse_record: u must be positive");
  check_prm_params(a, b, std::max(mu > 0.0 ? u / mu : 1.0, 1e-6), eps);
  // Same sorted-gap construction as sample_prm, consumed lazily: the first
  // crossing is determined by the atom prefix up to that time, so generation
  // stops there. Draw-for-draw identical to inverse_record(sample_prm(...))
  // whenever the eager window covers the crossing.
  const double rate = a * std::pow(eps, -b);
  const double inv_b = 1.0 / b;
  const double drift_cross = mu > 0.0 ? u / mu : kInf;
  const bool inv1 = inv_b == 1.0;
  const bool inv2 = inv_b == 2.0;
  double t = 0.0;
  for (std::int64_t k = 0; k < 10'000'000'000LL; ++k) {
    t += -std::log(rng.next_unit()) / rate;
    if (t >= drift_cross) return drift_cross;
    const double w = rng.next_unit();
    const double mark =
        inv1 ? eps / w : (inv2 ? eps / (w * w) : eps * std::pow(w, -inv_b));
    if (mu * t + mark > u) return t;
  }
  throw WindowTooShort("sample_inverse_record: crossing not reached");
}

}  // namespace gpwalk
