#include "decaylab/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "decaylab/error.hpp"

namespace decaylab {

QuadResult integrate(const ScalarFn& f, double a, double b, const std::vector<double>& breaks,
                     double rtol) {
  if (!(b > a)) return {};
  std::vector<double> pts{a};
  for (double p : breaks)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  QuadResult r;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    double err = 0.0;
    r.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 20,
                                                                           rtol, &err);
    r.error += err * std::max(1.0, std::abs(r.value));
  }
  if (!std::isfinite(r.value)) throw NumericalError("quadrature produced a non-finite value");
  return r;
}

QuadResult integrate_to_infinity(const ScalarFn& f, double a, double rtol) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  double v = 0.0;
  try {
    v = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), rtol, &err, &l1);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("tail integral failed: ") + e.what());
  }
  if (!std::isfinite(v) || !std::isfinite(err)) throw NumericalError("tail integral is not finite");
  if (err > 1e-3 * std::max(std::abs(v), 1e-300) && err > 1e-12)
    throw NumericalError("tail integral did not converge (integrand not integrable?)");
  return {v, err};
}

}  // namespace decaylab
