#pragma once

#include <filesystem>
#include <vector>

#include "decaylab/curves.hpp"
#include "decaylab/parallel.hpp"

namespace decaylab {

// Discretization of L^2(1, S_max) for F(u) = 1/2 int u^2/s ds. Nodes are
// log-spaced; w are trapezoid weights in log s, so int f ds ~ sum_j w_j f(s_j).
struct SpectralProfile {
  std::vector<double> s;
  std::vector<double> u0;
  std::vector<double> w;
  double S_max = 0.0;
  // g(S_max): the modes above S_max are dropped, which lowers every
  // F(u(t)) >= g(t) check by at most this much
  double bias = 0.0;
  // (1/2e^2) int_{S_max}^inf u0^2 = S_max g(S_max) + int_{S_max}^inf g, when computable
  double norm_bias = 0.0;
  DecayCurve curve;

  double norm_sq() const;  // sum_j w_j u0_j^2
};

// u0(s) = sqrt(-2 e^2 s g'(s)) on [1, S_max], `per_decade` nodes per decade.
SpectralProfile build_profile(const DecayCurve& curve, double S_max, std::size_t per_decade = 64);

// F(u(t)) with u(t, s) = e^{-t/s} u0(s).
double gf_energy(const SpectralProfile& p, double t);
// (1/2e^2) sum_{s_j >= t} w_j u0_j^2 / s_j: the middle term of the t >= 1 bound chain
double gf_tail_term(const SpectralProfile& p, double t);

struct FlatnessPoint {
  double R = 0.0;
  double norm = 0.0;    // ||u_n|| = 1/n
  double energy = 0.0;  // F(u_n) = log((1+R)/R) / (2 n^2)
  double bound = 0.0;   // 1/(n R)
  double ratio = 0.0;   // F(u_n) / phi(||u_n||)
};

// u_n = (1/n) 1_{R_n < s < 1 + R_n} with R_n = 1/phi(1/n).
FlatnessPoint flatness_sequence(const RateFunction& phi, std::size_t n);

struct HbEnergyPoint {
  double t = 0.0;
  double value = 0.0;        // F(u(t)) from the simulated modes
  double lower_bound = 0.0;  // 1/2 e^{-alpha/2} sum_{s_j > 4t^2/alpha^2} w_j u0_j^2 / s_j
};

// Runs the heavy-ball scheme on every mode (mu_j = 1/s_j, x0 = u0_j) with step
// h and reports the energy at the requested times (rounded to the step grid).
std::vector<HbEnergyPoint> hb_energy(const SpectralProfile& p, double alpha, const std::vector<double>& times,
                                     double h, Exec exec = Exec::parallel);

double hb_lower_bound(const SpectralProfile& p, double alpha, double t);

struct EnergyRow {
  double t, F_numeric, F_lower_bound, g_target, bias;
};
void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyRow>& rows);

}  // namespace decaylab
