#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gpwalk {

// Raised by every validation routine in the library when a model, policy or
// experiment description is inconsistent.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closed catalog of marginal families. Every family carries an exact
// quantile, CDF, tail, the first two moments and tail-integrability flags,
// which is what makes the hypothesis checks and the reference laws exact.

struct Constant {
  double value = 0.0;
  bool operator==(const Constant&) const = default;
};

struct Exponential {
  double rate = 1.0;
  bool operator==(const Exponential&) const = default;
};

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
  bool operator==(const Gaussian&) const = default;
};

// P{X > x} = (scale/(x - shift))^alpha for x >= shift + scale, 1 below.
struct ShiftedPareto {
  double alpha = 1.0;
  double scale = 1.0;
  double shift = 0.0;
  bool operator==(const ShiftedPareto&) const = default;
};

// Canonical form keeps the smaller atom first: P{lo} = p_lo, P{hi} = 1-p_lo.
struct TwoPoint {
  double lo = 0.0;
  double p_lo = 0.5;
  double hi = 1.0;
  bool operator==(const TwoPoint&) const = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Uniform&) const = default;
};

using MarginalSpec =
    std::variant<Constant, Exponential, Gaussian, ShiftedPareto, TwoPoint,
                 Uniform>;

MarginalSpec make_constant(double v);
MarginalSpec make_exponential(double rate);
MarginalSpec make_gaussian(double mean, double sd);
MarginalSpec make_shifted_pareto(double alpha, double scale, double shift);
MarginalSpec make_two_point(double v1, double p1, double v2);
MarginalSpec make_uniform(double lo, double hi);

void validate(const MarginalSpec& m);  // throws ConfigError
std::string describe(const MarginalSpec& m);
bool is_continuous(const MarginalSpec& m);

// Nondecreasing inverse CDF, p in (0,1). Sampling is always quantile(U), so
// comonotone coupling works by feeding both coordinates the same uniform.
double quantile(const MarginalSpec& m, double p);
double cdf(const MarginalSpec& m, double x);   // P{X <= x}
double tail(const MarginalSpec& m, double x);  // P{X > x}, evaluated directly
double mean(const MarginalSpec& m);            // +-inf when divergent
double variance(const MarginalSpec& m);        // +inf when divergent
std::optional<double> essential_infimum(const MarginalSpec& m);

bool plus_part_integrable(const MarginalSpec& m);     // E[X+] < inf
bool minus_part_integrable(const MarginalSpec& m);    // E[X-] < inf
bool sqrt_plus_moment_finite(const MarginalSpec& m);  // E[(X+)^(1/2)] < inf
bool tail_t_vanishes(const MarginalSpec& m);          // t P{X>t} -> 0

// Closed form of int_0^t P{X > y} dy (t >= 0), nondecreasing in t.
double tail_integral(const MarginalSpec& m, double t);

// Points in (0, t) where the tail has a kink or jump; quadrature panels are
// split there so the independent numeric route converges.
std::vector<double> tail_breakpoints(const MarginalSpec& m, double t);

// Flattened quantile for hot sampling loops: one switch, no variant visit,
// fast paths for small integer / half-integer Pareto exponents.
class CompiledQuantile {
 public:
  static CompiledQuantile compile(const MarginalSpec& m);
  double operator()(double u) const;

 private:
  enum class Code {
    constant,
    exponential,
    gaussian,
    uniform,
    two_point,
    pareto_inv1,   // 1/alpha == 1
    pareto_inv2,   // 1/alpha == 2
    pareto_half,   // 1/alpha == k + 1/2, k in {0..3}
    pareto_pow,    // general exponent
  };
  Code code_ = Code::constant;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
};

}  // namespace gpwalk
