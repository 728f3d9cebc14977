#pragma once

#include <optional>
#include <utility>

#include "gpwalk/marginals.hpp"
#include "gpwalk/rng.hpp"

namespace gpwalk {

enum class DependenceMode { independent, comonotone, functional };

// How (xi, eta) are coupled. Comonotone pushes one shared uniform through
// both quantile functions; functional builds eta = a*xi + b + noise.
struct DependenceSpec {
  DependenceMode mode = DependenceMode::independent;
  double coeff_a = 0.0;
  double coeff_b = 0.0;
  std::optional<MarginalSpec> noise;

  static DependenceSpec independent() { return {}; }
  static DependenceSpec comonotone() {
    DependenceSpec d;
    d.mode = DependenceMode::comonotone;
    return d;
  }
  static DependenceSpec functional(double a, double b, MarginalSpec noise_spec) {
    DependenceSpec d;
    d.mode = DependenceMode::functional;
    d.coeff_a = a;
    d.coeff_b = b;
    d.noise = std::move(noise_spec);
    return d;
  }
};

enum class TailClass { integrable, boundary, regvar };
enum class TailSide { plus, minus };

// Summary of one tail of eta: either the relevant positive part is
// integrable, or t*P{tail>t} -> c (boundary), or the tail is a pure power
// P{tail>t} ~ (t/scale)^(-alpha) with alpha in (0,1).
struct TailDescriptor {
  TailClass cls = TailClass::integrable;
  TailSide side = TailSide::plus;
  double c = 0.0;
  double alpha = 0.0;
  double scale = 0.0;

  static TailDescriptor derive(const MarginalSpec& m, TailSide side);
};

struct HypothesisFlags {
  bool eta_plus_integrable = false;
  bool eta_minus_integrable = false;
  bool weak_lln_tail = false;  // t * P{eta > t} -> 0
  bool sigma2_finite = false;
  bool root_moment_plus = false;  // E[(eta+)^(1/2)] < inf
};

// Full description of the law of (xi, eta). Immutable after make(); all
// derived fields are analytic functions of the declared families.
struct JointIncrementModel {
  MarginalSpec xi = Constant{1.0};
  MarginalSpec eta = Constant{0.0};
  DependenceSpec dependence;
  double mu = 1.0;       // E[xi]
  double sigma2 = 0.0;   // Var[xi], +inf when divergent
  TailDescriptor eta_plus_tail;
  TailDescriptor eta_minus_tail;
  std::optional<double> eta_lower_bound;

  static JointIncrementModel make(MarginalSpec xi_spec, MarginalSpec eta_spec,
                                  DependenceSpec dep = DependenceSpec::independent());
  void validate() const;  // throws ConfigError
};

// Precompiled sampler. The uniform-draw budget is fixed by the dependence
// mode alone -- independent/functional: two draws (xi first), comonotone:
// one shared draw -- and every marginal consumes exactly one uniform through
// its quantile, degenerate families included, so streams stay aligned when a
// family is swapped under the same seed.
class PairSampler {
 public:
  explicit PairSampler(const JointIncrementModel& m)
      : mode_(m.dependence.mode),
        a_(m.dependence.coeff_a),
        b_(m.dependence.coeff_b),
        q_xi_(CompiledQuantile::compile(m.xi)),
        q_second_(CompiledQuantile::compile(
            m.dependence.mode == DependenceMode::functional ? *m.dependence.noise
                                                            : m.eta)) {}

  template <UniformSource R>
  void operator()(R& rng, double& xi_out, double& eta_out) const {
    switch (mode_) {
      case DependenceMode::independent: {
        const double u1 = rng.next_unit();
        const double u2 = rng.next_unit();
        xi_out = q_xi_(u1);
        eta_out = q_second_(u2);
        break;
      }
      case DependenceMode::comonotone: {
        const double u = rng.next_unit();
        xi_out = q_xi_(u);
        eta_out = q_second_(u);
        break;
      }
      case DependenceMode::functional: {
        const double u1 = rng.next_unit();
        const double u2 = rng.next_unit();
        xi_out = q_xi_(u1);
        eta_out = a_ * xi_out + b_ + q_second_(u2);
        break;
      }
    }
  }

 private:
  DependenceMode mode_;
  double a_, b_;
  CompiledQuantile q_xi_, q_second_;
};

template <UniformSource R>
std::pair<double, double> sample_pair(const JointIncrementModel& m, R& rng) {
  PairSampler s(m);
  double xi, eta;
  s(rng, xi, eta);
  return {xi, eta};
}

// Exact P{eta > y} for the declared marginal family.
double tail_eta(const JointIncrementModel& m, double y);

// mu^{-1} * int_0^t P{eta > y} dy via the closed-form antiderivative, and an
// independent adaptive-quadrature route for cross-checking.
double centering_integral(const JointIncrementModel& m, double t);
double centering_integral_quadrature(const JointIncrementModel& m, double t,
                                     double abs_tol = 1e-8);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HypothesisFlags hypothesis_flags(const JointIncrementModel& m);

}  // namespace gpwalk
