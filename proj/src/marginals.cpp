#include "gpwalk/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gpwalk/normal.hpp"

namespace gpwalk {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double x) { return std::isfinite(x); }

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }
}  // namespace

MarginalSpec make_constant(double v) { return Constant{v}; }
MarginalSpec make_exponential(double rate) { return Exponential{rate}; }
MarginalSpec make_gaussian(double mean, double sd) { return Gaussian{mean, sd}; }
MarginalSpec make_shifted_pareto(double alpha, double scale, double shift) {
  return ShiftedPareto{alpha, scale, shift};
}
MarginalSpec make_two_point(double v1, double p1, double v2) {
  if (v1 <= v2) return TwoPoint{v1, p1, v2};
  return TwoPoint{v2, 1.0 - p1, v1};
}
MarginalSpec make_uniform(double lo, double hi) { return Uniform{lo, hi}; }

void validate(const MarginalSpec& m) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          if (!finite(f.value)) bad("constant: value must be finite");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (!(f.rate > 0.0) || !finite(f.rate))
            bad("exponential: rate must be positive");
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (!finite(f.mean)) bad("gaussian: mean must be finite");
          if (!(f.sd > 0.0) || !finite(f.sd)) bad("gaussian: sd must be positive");
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          if (!(f.alpha > 0.0) || !finite(f.alpha))
            bad("shifted_pareto: alpha must be positive");
          if (!(f.scale > 0.0) || !finite(f.scale))
            bad("shifted_pareto: scale must be positive");
          if (!finite(f.shift)) bad("shifted_pareto: shift must be finite");
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          if (!finite(f.lo) || !finite(f.hi)) bad("two_point: values must be finite");
          if (f.lo > f.hi) bad("two_point: not in canonical order");
          if (!(f.p_lo >= 0.0 && f.p_lo <= 1.0)) bad("two_point: p1 must lie in [0,1]");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!finite(f.lo) || !finite(f.hi)) bad("uniform: bounds must be finite");
          if (!(f.lo < f.hi)) bad("uniform: lo must be below hi");
        }
      },
      m);
}

std::string describe(const MarginalSpec& m) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          os << "constant(" << f.value << ")";
        } else if constexpr (std::is_same_v<T, Exponential>) {
          os << "exponential(rate=" << f.rate << ")";
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          os << "gaussian(mean=" << f.mean << ", sd=" << f.sd << ")";
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          os << "shifted_pareto(alpha=" << f.alpha << ", scale=" << f.scale
             << ", shift=" << f.shift << ")";
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          os << "two_point(" << f.lo << " w.p. " << f.p_lo << ", " << f.hi << ")";
        } else if constexpr (std::is_same_v<T, Uniform>) {
          os << "uniform(" << f.lo << ", " << f.hi << ")";
        }
      },
      m);
  return os.str();
}

bool is_continuous(const MarginalSpec& m) {
  return !std::holds_alternative<Constant>(m) &&
         !std::holds_alternative<TwoPoint>(m);
}

double quantile(const MarginalSpec& m, double p) {
  if (!(p > 0.0 && p < 1.0)) bad("quantile: p must lie in (0,1)");
  return std::visit(
      [p](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log1p(-p) / f.rate;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return f.mean + f.sd * norm_quantile(p);
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          return f.shift + f.scale * std::pow(1.0 - p, -1.0 / f.alpha);
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          return p <= f.p_lo ? f.lo : f.hi;
        } else {
          return f.lo + (f.hi - f.lo) * p;
        }
      },
      m);
}

double tail(const MarginalSpec& m, double x) {
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return x < f.value ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return x < 0.0 ? 1.0 : std::exp(-f.rate * x);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return norm_cdf((f.mean - x) / f.sd);
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          const double lo = f.shift + f.scale;
          if (x < lo) return 1.0;
          return std::pow(f.scale / (x - f.shift), f.alpha);
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          if (x < f.lo) return 1.0;
          if (x < f.hi) return 1.0 - f.p_lo;
          return 0.0;
        } else {
          if (x <= f.lo) return 1.0;
          if (x >= f.hi) return 0.0;
          return (f.hi - x) / (f.hi - f.lo);
        }
      },
      m);
}

double cdf(const MarginalSpec& m, double x) {
  return std::visit(
      [x, &m](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return norm_cdf((x - f.mean) / f.sd);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return x < 0.0 ? 0.0 : -std::expm1(-f.rate * x);
        } else {
          return 1.0 - tail(m, x);
        }
      },
      m);
}

double mean(const MarginalSpec& m) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / f.rate;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return f.mean;
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          if (f.alpha <= 1.0) return kInf;
          return f.shift + f.scale * f.alpha / (f.alpha - 1.0);
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          return f.p_lo * f.lo + (1.0 - f.p_lo) * f.hi;
        } else {
          return 0.5 * (f.lo + f.hi);
        }
      },
      m);
}

double variance(const MarginalSpec& m) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / (f.rate * f.rate);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return f.sd * f.sd;
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          if (f.alpha <= 2.0) return kInf;
          const double am1 = f.alpha - 1.0;
          return f.scale * f.scale * f.alpha / (am1 * am1 * (f.alpha - 2.0));
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          const double d = f.hi - f.lo;
          return f.p_lo * (1.0 - f.p_lo) * d * d;
        } else {
          const double d = f.hi - f.lo;
          return d * d / 12.0;
        }
      },
      m);
}

std::optional<double> essential_infimum(const MarginalSpec& m) {
  return std::visit(
      [](const auto& f) -> std::optional<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          return f.shift + f.scale;
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          return f.p_lo > 0.0 ? f.lo : f.hi;
        } else {
          return f.lo;
        }
      },
      m);
}

bool plus_part_integrable(const MarginalSpec& m) {
  if (const auto* p = std::get_if<ShiftedPareto>(&m)) return p->alpha > 1.0;
  return true;
}

bool minus_part_integrable(const MarginalSpec& m) {
  // Every family in the catalog is either bounded below or has an
  // exponentially light left tail.
  (void)m;
  return true;
}

bool sqrt_plus_moment_finite(const MarginalSpec& m) {
  if (const auto* p = std::get_if<ShiftedPareto>(&m)) return p->alpha > 0.5;
  return true;
}

bool tail_t_vanishes(const MarginalSpec& m) {
  if (const auto* p = std::get_if<ShiftedPareto>(&m)) return p->alpha > 1.0;
  return true;
}

double tail_integral(const MarginalSpec& m, double t) {
  if (t < 0.0) bad("tail_integral: t must be nonnegative");
  if (t == 0.0) return 0.0;
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return std::min(t, std::max(f.value, 0.0));
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return -std::expm1(-f.rate * t) / f.rate;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          // antiderivative of the upper tail: A(z) = z*Q(z) - pdf(z)
          const auto A = [](double z) { return z * norm_cdf(-z) - norm_pdf(z); };
          const double z0 = (0.0 - f.mean) / f.sd;
          const double z1 = (t - f.mean) / f.sd;
          return f.sd * (A(z1) - A(z0));
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          const double lo = f.shift + f.scale;
          const double head = std::max(0.0, std::min(t, lo));
          const double y1 = std::max(lo, 0.0);
          if (t <= y1) return head;
          double body;
          if (f.alpha == 1.0) {
            body = f.scale * (std::log(t - f.shift) - std::log(y1 - f.shift));
          } else {
            const double k = std::pow(f.scale, f.alpha) / (1.0 - f.alpha);
            body = k * (std::pow(t - f.shift, 1.0 - f.alpha) -
                        std::pow(y1 - f.shift, 1.0 - f.alpha));
          }
          return head + body;
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          const double head = std::max(0.0, std::min(t, f.lo));
          const double mid =
              std::max(0.0, std::min(t, f.hi) - std::max(f.lo, 0.0));
          return head + (1.0 - f.p_lo) * mid;
        } else {
          const double head = std::max(0.0, std::min(t, f.lo));
          const double y1 = std::max(f.lo, 0.0);
          const double y2 = std::min(f.hi, t);
          double mid = 0.0;
          if (y2 > y1) {
            mid = 0.5 * ((f.hi - y1) + (f.hi - y2)) * (y2 - y1) / (f.hi - f.lo);
          }
          return head + mid;
        }
      },
      m);
}

std::vector<double> tail_breakpoints(const MarginalSpec& m, double t) {
  std::vector<double> pts;
  std::visit(
      [&pts](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          pts.push_back(f.value);
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          pts.push_back(f.shift + f.scale);
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          pts.push_back(f.lo);
          pts.push_back(f.hi);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          pts.push_back(f.lo);
          pts.push_back(f.hi);
        }
      },
      m);
  std::vector<double> inside;
  for (double p : pts) {
    if (p > 0.0 && p < t) inside.push_back(p);
  }
  std::sort(inside.begin(), inside.end());
  return inside;
}

CompiledQuantile CompiledQuantile::compile(const MarginalSpec& m) {
  CompiledQuantile q;
  std::visit(
      [&q](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Constant>) {
          q.code_ = Code::constant;
          q.a_ = f.value;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          q.code_ = Code::exponential;
          q.a_ = 1.0 / f.rate;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          q.code_ = Code::gaussian;
          q.a_ = f.mean;
          q.b_ = f.sd;
        } else if constexpr (std::is_same_v<T, ShiftedPareto>) {
          const double inv = 1.0 / f.alpha;
          q.a_ = f.scale;
          q.b_ = f.shift;
          q.c_ = inv;
          if (inv == 1.0) {
            q.code_ = Code::pareto_inv1;
          } else if (inv == 2.0) {
            q.code_ = Code::pareto_inv2;
          } else if (inv - 0.5 == std::floor(inv - 0.5) && inv <= 3.5) {
            q.code_ = Code::pareto_half;
            q.c_ = std::floor(inv - 0.5);  // integer part of the exponent
          } else {
            q.code_ = Code::pareto_pow;
          }
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          q.code_ = Code::two_point;
          q.a_ = f.lo;
          q.b_ = f.p_lo;
          q.c_ = f.hi;
        } else {
          q.code_ = Code::uniform;
          q.a_ = f.lo;
          q.b_ = f.hi - f.lo;
        }
      },
      m);
  return q;
}

double CompiledQuantile::operator()(double u) const {
  switch (code_) {
    case Code::constant:
      return a_;
    case Code::exponential:
      return -a_ * std::log1p(-u);
    case Code::gaussian:
      return a_ + b_ * norm_quantile(u);
    case Code::uniform:
      return a_ + b_ * u;
    case Code::two_point:
      return u <= b_ ? a_ : c_;
    case Code::pareto_inv1:
      return b_ + a_ / (1.0 - u);
    case Code::pareto_inv2: {
      const double w = 1.0 - u;
      return b_ + a_ / (w * w);
    }
    case Code::pareto_half: {
      const double w = 1.0 - u;
      double wk = std::sqrt(w);
      for (int i = 0; i < static_cast<int>(c_); ++i) wk *= w;
      return b_ + a_ / wk;
    }
    case Code::pareto_pow:
      return b_ + a_ * std::pow(1.0 - u, -c_);
  }
  return a_;  // unreachable
}

}  // namespace gpwalk
