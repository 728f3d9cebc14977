#pragma once

namespace gpwalk {

// Standard normal density, CDF and quantile. The CDF goes through erfc so
// both tails stay accurate down to the underflow threshold; the quantile is
// Wichura's PPND16 rational approximation (relative error ~1e-16), which
// keeps quantile sampling on a fixed one-uniform budget.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);  // p in (0,1)

}  // namespace gpwalk
