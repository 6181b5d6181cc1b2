#pragma once

// Thermodynamic state functions for the structural pressure family
//
//   p(rho,theta) = theta^{5/2} P(rho/theta^{3/2}) + (a/3) theta^4
//   e(rho,theta) = (3/2) theta^{5/2}/rho P(rho/theta^{3/2}) + a theta^4/rho
//   s(rho,theta) = S(rho/theta^{3/2}) + (4/3) a theta^3/rho
//
// with P(Z) = lin*Z + poly*Z^{5/3}, which gives S(Z) = -lin*ln(Z) + s_norm
// in closed form. All partial derivatives are closed-form; finite
// differences appear only as test oracles.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace limitlab {

// ---------------------------------------------------------------------------
// Pressure law P and its entropy integral S

template <typename Scalar = double>
struct PLawT {
  Scalar lin = Scalar(1);           // coefficient of Z
  Scalar poly = Scalar(1.5);        // coefficient of Z^{5/3}; P_inf = poly

  Scalar value(Scalar z) const {
    using std::cbrt;
    const Scalar z13 = cbrt(z);
    return lin * z + poly * z * z13 * z13;  // lin*Z + poly*Z^{5/3}
  }
  Scalar deriv(Scalar z) const {
    using std::cbrt;
    const Scalar z13 = cbrt(z);
    return lin + Scalar(5) / Scalar(3) * poly * z13 * z13;
  }
  // S(Z) up to the additive constant fixed by the caller.
  Scalar entropy(Scalar z) const {
    using std::log;
    return -lin * log(z);
  }
  Scalar entropy_deriv(Scalar z) const { return -lin / z; }
  // (5/3 P(Z) - P'(Z) Z)/Z, constant for this family.
  Scalar structural_ratio() const { return Scalar(2) / Scalar(3) * lin; }
};

using PLaw = PLawT<double>;

template <typename Scalar = double>
struct ThermoParamsT {
  Scalar a = Scalar(1);             // radiation-pressure constant
  Scalar rho_bar = Scalar(1);       // reference density
  Scalar theta_bar = Scalar(1);     // reference temperature
  PLawT<Scalar> p_law{};
  Scalar s_norm = Scalar(0);        // fixes S(1)

  void validate() const {
    if (!(a > Scalar(0))) throw std::invalid_argument("ThermoParams: a must be > 0");
    if (!(rho_bar > Scalar(0))) throw std::invalid_argument("ThermoParams: rho_bar must be > 0");
    if (!(theta_bar > Scalar(0))) throw std::invalid_argument("ThermoParams: theta_bar must be > 0");
    if (!(p_law.lin > Scalar(0)) || !(p_law.poly > Scalar(0)))
      throw std::invalid_argument("ThermoParams: pressure law coefficients must be > 0");
  }
};

using ThermoParams = ThermoParamsT<double>;

namespace detail {
template <typename Scalar>
void require_state(Scalar rho, Scalar theta) {
  if (!(rho > Scalar(0)) || !(theta > Scalar(0)))
    throw std::domain_error("state functions require rho > 0 and theta > 0");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// State functions and closed-form partials

template <typename Scalar>
Scalar pressure(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return t32 * theta * par.p_law.value(z) +
         par.a / Scalar(3) * theta * theta * theta * theta;
}

template <typename Scalar>
Scalar pressure_rho(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar z = rho / (theta * sqrt(theta));
  return theta * par.p_law.deriv(z);
}

template <typename Scalar>
Scalar pressure_theta(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return Scalar(2.5) * sqrt(theta) * theta * par.p_law.value(z) -
         Scalar(1.5) * rho * par.p_law.deriv(z) +
         Scalar(4) / Scalar(3) * par.a * theta * theta * theta;
}

template <typename Scalar>
Scalar internal_energy(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return Scalar(1.5) * t32 * theta * par.p_law.value(z) / rho +
         par.a * theta * theta * theta * theta / rho;
}

template <typename Scalar>
Scalar energy_theta(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return Scalar(3.75) * sqrt(theta) * theta * par.p_law.value(z) / rho -
         Scalar(2.25) * par.p_law.deriv(z) +
         Scalar(4) * par.a * theta * theta * theta / rho;
}

template <typename Scalar>
Scalar energy_rho(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return Scalar(1.5) * theta * par.p_law.deriv(z) / rho -
         Scalar(1.5) * t32 * theta * par.p_law.value(z) / (rho * rho) -
         par.a * theta * theta * theta * theta / (rho * rho);
}

template <typename Scalar>
Scalar entropy(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar z = rho / (theta * sqrt(theta));
  return par.p_law.entropy(z) + par.s_norm +
         Scalar(4) / Scalar(3) * par.a * theta * theta * theta / rho;
}

template <typename Scalar>
Scalar entropy_theta(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return -Scalar(1.5) * par.p_law.entropy_deriv(z) * z / theta +
         Scalar(4) * par.a * theta * theta / rho;
}

template <typename Scalar>
Scalar entropy_rho(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  using std::sqrt;
  detail::require_state(rho, theta);
  const Scalar t32 = theta * sqrt(theta);
  const Scalar z = rho / t32;
  return par.p_law.entropy_deriv(z) / t32 -
         Scalar(4) / Scalar(3) * par.a * theta * theta * theta / (rho * rho);
}

// First integral of the hydrostatic relation at constant temperature:
// Pi(rho) with Pi'(rho) = pressure_rho(rho, theta_bar)/rho. Closed form for
// the structural family.
template <typename Scalar>
Scalar first_integral(Scalar rho, const ThermoParamsT<Scalar>& par) {
  using std::cbrt, std::log;
  detail::require_state(rho, par.theta_bar);
  const Scalar r13 = cbrt(rho);
  return par.p_law.lin * par.theta_bar * log(rho) +
         Scalar(2.5) * par.p_law.poly * r13 * r13;
}

template <typename Scalar>
Scalar first_integral_deriv(Scalar rho, const ThermoParamsT<Scalar>& par) {
  return pressure_rho(rho, par.theta_bar, par) / rho;
}

// Squared sound speed c_s^2 = dp/drho + theta (dp/dtheta)^2 / (rho^2 de/dtheta).
template <typename Scalar>
Scalar sound_speed_sq(Scalar rho, Scalar theta, const ThermoParamsT<Scalar>& par) {
  const Scalar pt = pressure_theta(rho, theta, par);
  return pressure_rho(rho, theta, par) +
         theta * pt * pt / (rho * rho * energy_theta(rho, theta, par));
}

// ---------------------------------------------------------------------------
// Transport coefficients

struct TransportLaw {
  double mu0 = 1.0;     // mu(theta)    = mu0    * (1 + theta)
  double eta0 = 1.0;    // eta(theta)   = eta0   * (1 + theta)
  double kappa0 = 1.0;  // kappa(theta) = kappa0 * (1 + theta^3)
  // Sandwich-bound constants; defaults make the bounds tight.
  double mu_lo = 1.0, mu_hi = 1.0;
  double eta_hi = 1.0;
  double kappa_lo = 1.0, kappa_hi = 1.0;

  void validate() const {
    if (!(mu0 > 0) || !(eta0 >= 0) || !(kappa0 > 0))
      throw std::invalid_argument("TransportLaw: need mu0 > 0, eta0 >= 0, kappa0 > 0");
  }
};

struct TransportCoeffs {
  double mu;
  double eta;
  double kappa;
};

inline TransportCoeffs transport(double theta, const TransportLaw& law) {
  if (!(theta >= 0)) throw std::domain_error("transport: theta must be >= 0");
  return {law.mu0 * (1.0 + theta), law.eta0 * (1.0 + theta),
          law.kappa0 * (1.0 + theta * theta * theta)};
}

struct FluidModel {
  ThermoParams thermo;
  TransportLaw transp;
};

// ---------------------------------------------------------------------------
// Linearization at the reference state

struct LinearizedCoeffs {
  double alpha;  // thermal expansion
  double c_p;    // specific heat at constant pressure
  double A;      // acoustic combination constants:
  double B;      //   B rb ds/dtheta = dp/dtheta,  A + B d(rho s)/drho = dp/drho
  double omega;  // acoustic wave-speed-squared factor
};

inline LinearizedCoeffs linearized_coeffs(const ThermoParams& par) {
  par.validate();
  const double rb = par.rho_bar, tb = par.theta_bar;
  const double pr = pressure_rho(rb, tb, par);
  const double pt = pressure_theta(rb, tb, par);
  const double et = energy_theta(rb, tb, par);
  const double st = entropy_theta(rb, tb, par);
  const double sr = entropy_rho(rb, tb, par);
  const double s0 = entropy(rb, tb, par);

  LinearizedCoeffs c{};
  c.alpha = pt / (rb * pr);
  c.c_p = et + c.alpha * tb / rb * pt;
  c.B = pt / (rb * st);
  c.A = pr - c.B * (s0 + rb * sr);  // d(rho s)/drho = s + rho ds/drho
  c.omega = pr + pt * pt / (rb * rb * st);
  return c;
}

// Relative ballistic free energy
//   E(rho,theta | rho_tilde) = H(rho,theta) - (rho - rho_tilde) dH/drho(rho_tilde, tb)
//                              - H(rho_tilde, tb)
// with H(rho,theta) = rho (e - tb s); nonnegative, zero at the static state.
template <typename Scalar>
Scalar ballistic_free_energy(Scalar rho, Scalar theta, Scalar rho_tilde,
                             const ThermoParamsT<Scalar>& par) {
  detail::require_state(rho, theta);
  detail::require_state(rho_tilde, par.theta_bar);
  const Scalar tb = par.theta_bar;
  auto H = [&](Scalar r, Scalar t) {
    return r * (internal_energy(r, t, par) - tb * entropy(r, t, par));
  };
  // dH/drho at (rho_tilde, tb), closed form.
  const Scalar dH =
      internal_energy(rho_tilde, tb, par) + rho_tilde * energy_rho(rho_tilde, tb, par) -
      tb * (entropy(rho_tilde, tb, par) + rho_tilde * entropy_rho(rho_tilde, tb, par));
  return H(rho, theta) - (rho - rho_tilde) * dH - H(rho_tilde, tb);
}

// ---------------------------------------------------------------------------
// Essential / residual decomposition

// Smooth cutoff chi(rho,theta): tensor product of 1D C^inf transitions,
// identically 1 on the essential box, compactly supported inside the box
// scaled by transition_factor.
struct EssResWindow {
  double rho_lo, rho_hi;
  double theta_lo, theta_hi;
  double transition_factor = 2.0;  // support edges at [lo/f, hi*f]

  static EssResWindow around(double rho_bar, double theta_bar, double factor = 2.0) {
    return {0.5 * rho_bar, 2.0 * rho_bar, 0.5 * theta_bar, 2.0 * theta_bar, factor};
  }

  double chi(double rho, double theta) const;
  bool in_essential_box(double rho, double theta) const {
    return rho >= rho_lo && rho <= rho_hi && theta >= theta_lo && theta <= theta_hi;
  }
};

namespace detail {
inline double smooth01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
inline double window1d(double x, double support_lo, double box_lo, double box_hi,
                       double support_hi) {
  if (x <= support_lo || x >= support_hi) return 0.0;
  if (x < box_lo) return smooth01((x - support_lo) / (box_lo - support_lo));
  if (x > box_hi) return 1.0 - smooth01((x - box_hi) / (support_hi - box_hi));
  return 1.0;
}
}  // namespace detail

inline double EssResWindow::chi(double rho, double theta) const {
  const double f = transition_factor;
  return detail::window1d(rho, rho_lo / f, rho_lo, rho_hi, rho_hi * f) *
         detail::window1d(theta, theta_lo / f, theta_lo, theta_hi, theta_hi * f);
}

// Pointwise partition h = ess + res with ess = chi(rho,theta) h.
inline std::pair<Eigen::ArrayXd, Eigen::ArrayXd> ess_res_split(
    const Eigen::ArrayXd& rho, const Eigen::ArrayXd& theta, const Eigen::ArrayXd& h,
    const EssResWindow& window) {
  if (rho.size() != theta.size() || rho.size() != h.size())
    throw std::invalid_argument("ess_res_split: fields must share one grid");
  Eigen::ArrayXd ess(h.size()), res(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double c = window.chi(rho[i], theta[i]);
    ess[i] = c * h[i];
    res[i] = h[i] - ess[i];
  }
  return {std::move(ess), std::move(res)};
}

// Sampled supremum of the structural ratio (5/3 P - P'Z)/Z; the family keeps
// it constant but the report records the computed value rather than a claim.
template <typename Scalar>
Scalar structural_ratio_supremum(const ThermoParamsT<Scalar>& par, int samples = 64) {
  using std::exp, std::log;
  Scalar sup = Scalar(0);
  for (int i = 0; i < samples; ++i) {
    const Scalar z = exp(Scalar(-6) + Scalar(12) * Scalar(i) / Scalar(samples - 1));
    const Scalar ratio =
        (Scalar(5) / Scalar(3) * par.p_law.value(z) - par.p_law.deriv(z) * z) / z;
    if (ratio > sup) sup = ratio;
  }
  return sup;
}

}  // namespace limitlab
