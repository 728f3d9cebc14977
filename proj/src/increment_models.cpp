#include "gpwalk/increment_models.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace gpwalk {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool close(double a, double b, double tol = 1e-9) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

bool specs_match(const MarginalSpec& a, const MarginalSpec& b) {
  if (a.index() != b.index()) return false;
  bool ok = true;
  std::visit(
      [&](const auto& fa) {
        using T = std::decay_t<decltype(fa)>;
        const auto& fb = std::get<T>(b);
        if constexpr (std::is_same_v<T, Constant>) {
          ok = close(fa.value, fb.value);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          ok = close(fa.rate, fb.rate);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          ok = close(fa.mean, fb.mean) && close(fa.sd, fb.sd);
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          ok = close(fa.alpha, fb.alpha) && close(fa.scale, fb.scale) &&
               close(fa.shift, fb.shift);
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          ok = close(fa.lo, fb.lo) && close(fa.p_lo, fb.p_lo) && close(fa.hi, fb.hi);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          ok = close(fa.lo, fb.lo) && close(fa.hi, fb.hi);
        }
      },
      a);
  return ok;
}

MarginalSpec shift_spec(const MarginalSpec& m, double offset) {
  return std::visit(
      [offset](const auto& f) -> MarginalSpec {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return Constant{f.value + offset};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return Gaussian{f.mean + offset, f.sd};
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          return ShiftedPareto{f.alpha, f.scale, f.shift + offset};
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          return TwoPoint{f.lo + offset, f.p_lo, f.hi + offset};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return Uniform{f.lo + offset, f.hi + offset};
        } else {
          // exponential has no shift parameter in the catalog
          throw ConfigError(
              "functional dependence: exponential noise cannot absorb a "
              "nonzero offset");
        }
      },
      m);
}

// Marginal of a*xi + b + noise when it stays inside the catalog.
std::optional<MarginalSpec> induced_eta(const MarginalSpec& xi,
                                        const DependenceSpec& dep) {
  const double a = dep.coeff_a;
  const double b = dep.coeff_b;
  const MarginalSpec& noise = *dep.noise;
  if (a == 0.0) {
    if (b == 0.0) return noise;
    return shift_spec(noise, b);
  }
  if (const auto* cx = std::get_if<Constant>(&xi)) {
    const double off = a * cx->value + b;
    if (off == 0.0) return noise;
    return shift_spec(noise, off);
  }
  if (const auto* gx = std::get_if<Gaussian>(&xi)) {
    if (const auto* gn = std::get_if<Gaussian>(&noise)) {
      const double sd = std::hypot(a * gx->sd, gn->sd);
      return MarginalSpec{Gaussian{a * gx->mean + b + gn->mean, sd}};
    }
    if (const auto* cn = std::get_if<Constant>(&noise)) {
      return MarginalSpec{Gaussian{a * gx->mean + b + cn->value,
                                   std::fabs(a) * gx->sd}};
    }
  }
  return std::nullopt;
}

double minus_tail(const MarginalSpec& m, double t) {
  // P{X^- > t} = P{X < -t}; for the probe points this is only consulted for
  // continuous families, where P{X < -t} = cdf(-t).
  return cdf(m, -t);
}

void check_descriptor(const TailDescriptor& d, const MarginalSpec& m,
                      TailSide side) {
  const char* name = side == TailSide::plus ? "eta_plus_tail" : "eta_minus_tail";
  if (d.side != side) throw ConfigError(std::string(name) + ": wrong side tag");
  auto tail_at = [&](double t) {
    return side == TailSide::plus ? tail(m, t) : minus_tail(m, t);
  };
  switch (d.cls) {
    case TailClass::integrable: {
      const bool ok = side == TailSide::plus ? plus_part_integrable(m)
                                             : minus_part_integrable(m);
      if (!ok)
        throw ConfigError(std::string(name) +
                          ": integrable class declared but the positive part "
                          "has no finite mean");
      break;
    }
    case TailClass::boundary: {
      if (!(d.c > 0.0)) throw ConfigError(std::string(name) + ": boundary c must be > 0");
      for (double t : {1e3, 1e4, 1e5}) {
        const double v = t * tail_at(t);
        if (std::fabs(v - d.c) > 0.1 * d.c)
          throw ConfigError(std::string(name) +
                            ": boundary class inconsistent with the analytic "
                            "tail at probe points");
      }
      break;
    }
    case TailClass::regvar: {
      if (!(d.alpha > 0.0 && d.alpha < 1.0))
        throw ConfigError(std::string(name) + ": regvar alpha must lie in (0,1)");
      if (!(d.scale > 0.0))
        throw ConfigError(std::string(name) + ": regvar scale must be > 0");
      for (double t : {1e3, 1e4, 1e5}) {
        const double ref = std::pow(t / d.scale, -d.alpha);
        const double v = tail_at(t);
        if (std::fabs(v - ref) > 0.1 * ref)
          throw ConfigError(std::string(name) +
                            ": regvar class inconsistent with the analytic "
                            "tail at probe points");
      }
      break;
    }
  }
}

// Adaptive Simpson with a recursion cap and a node budget; the budget is
// what detects tolerances the integrand cannot reach at double precision.
double simpson_rec(const std::function<double(double)>& f, double a, double fa,
                   double b, double fb, double m, double fm, double whole,
                   double tol, int depth, long& budget) {
  if (--budget <= 0)
    throw QuadratureError("adaptive quadrature did not converge");
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureError("adaptive quadrature did not converge");
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1,
                     budget) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1,
                     budget);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, long& budget) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 60, budget);
}

}  // namespace

TailDescriptor TailDescriptor::derive(const MarginalSpec& m, TailSide side) {
  TailDescriptor d;
  d.side = side;
  if (side == TailSide::minus) {
    d.cls = TailClass::integrable;
    return d;
  }
  if (const auto* p = std::get_if<ShiftedPareto>(&m)) {
    if (p->alpha < 1.0) {
      d.cls = TailClass::regvar;
      d.alpha = p->alpha;
      d.scale = p->scale;
      return d;
    }
    if (p->alpha == 1.0) {
      d.cls = TailClass::boundary;
      d.c = p->scale;
      return d;
    }
  }
  d.cls = TailClass::integrable;
  return d;
}

JointIncrementModel JointIncrementModel::make(MarginalSpec xi_spec,
                                              MarginalSpec eta_spec,
                                              DependenceSpec dep) {
  JointIncrementModel m;
  m.xi = std::move(xi_spec);
  m.eta = std::move(eta_spec);
  m.dependence = std::move(dep);
  gpwalk::validate(m.xi);
  gpwalk::validate(m.eta);
  if (m.dependence.mode == DependenceMode::functional) {
    if (!m.dependence.noise)
      throw ConfigError("functional dependence requires a noise marginal");
    gpwalk::validate(*m.dependence.noise);
    auto induced = induced_eta(m.xi, m.dependence);
    if (!induced)
      throw ConfigError(
          "functional dependence: eta = a*xi + b + noise has no closed-form "
          "marginal for these families (supported: a = 0, constant xi, or "
          "gaussian xi with gaussian/constant noise)");
    if (!specs_match(*induced, m.eta))
      throw ConfigError(
          "functional dependence: declared eta marginal does not match the "
          "law of a*xi + b + noise (" + describe(*induced) + " expected)");
  }
  m.mu = gpwalk::mean(m.xi);
  if (!std::isfinite(m.mu))
    throw ConfigError("model requires a finite E[xi]; got " + describe(m.xi));
  m.sigma2 = gpwalk::variance(m.xi);
  m.eta_plus_tail = TailDescriptor::derive(m.eta, TailSide::plus);
  m.eta_minus_tail = TailDescriptor::derive(m.eta, TailSide::minus);
  m.eta_lower_bound = essential_infimum(m.eta);
  m.validate();
  return m;
}

void JointIncrementModel::validate() const {
  gpwalk::validate(xi);
  gpwalk::validate(eta);
  if (!close(mu, gpwalk::mean(xi), 1e-12))
    throw ConfigError("declared mu does not equal the analytic mean of xi");
  if (!close(sigma2, gpwalk::variance(xi), 1e-12))
    throw ConfigError("declared sigma2 does not equal the analytic Var[xi]");
  const auto inf = essential_infimum(eta);
  if (inf.has_value() != eta_lower_bound.has_value() ||
      (inf && !close(*inf, *eta_lower_bound, 1e-12)))
    throw ConfigError("declared eta_lower_bound is inconsistent with the family");
  check_descriptor(eta_plus_tail, eta, TailSide::plus);
  check_descriptor(eta_minus_tail, eta, TailSide::minus);
  if (dependence.mode == DependenceMode::functional) {
    if (!dependence.noise)
      throw ConfigError("functional dependence requires a noise marginal");
    auto induced = induced_eta(xi, dependence);
    if (!induced || !specs_match(*induced, eta))
      throw ConfigError("functional dependence inconsistent with declared eta");
  }
}

double tail_eta(const JointIncrementModel& m, double y) { return tail(m.eta, y); }

double centering_integral(const JointIncrementModel& m, double t) {
  if (t < 0.0) throw ConfigError("centering_integral: t must be nonnegative");
  if (!(m.mu > 0.0))
    throw ConfigError("centering_integral: requires mu > 0");
  return tail_integral(m.eta, t) / m.mu;
}

double centering_integral_quadrature(const JointIncrementModel& m, double t,
                                     double abs_tol) {
  if (t < 0.0) throw ConfigError("centering_integral: t must be nonnegative");
  if (!(m.mu > 0.0))
    throw ConfigError("centering_integral: requires mu > 0");
  if (t == 0.0) return 0.0;
  auto f = [&m](double y) { return tail(m.eta, y); };
  std::vector<double> knots = tail_breakpoints(m.eta, t);
  knots.insert(knots.begin(), 0.0);
  knots.push_back(t);
  const double tol = abs_tol / static_cast<double>(knots.size() - 1);
  long budget = 1000000;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += adaptive_simpson(f, knots[i], knots[i + 1], tol, budget);
  }
  return total / m.mu;
}

HypothesisFlags hypothesis_flags(const JointIncrementModel& m) {
  HypothesisFlags f;
  f.eta_plus_integrable = plus_part_integrable(m.eta);
  f.eta_minus_integrable = minus_part_integrable(m.eta);
  f.weak_lln_tail = tail_t_vanishes(m.eta);
  f.sigma2_finite = std::isfinite(m.sigma2);
  f.root_moment_plus = sqrt_plus_moment_finite(m.eta);
  return f;
}

}  // namespace gpwalk
