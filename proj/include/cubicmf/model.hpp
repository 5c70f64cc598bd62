#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cubicmf {

/// Couplings of the one-component cubic mean-field model,
///   U(m) = (K/3) m^3 + (J/2) m^2 + h m.
struct OneComponentParams {
    double K = 0.0;  // cubic coupling
    double J = 0.0;  // binary coupling
    double h = 0.0;  // uniform bias
};

/// Couplings of the two-component model. Component 1 has relative size
/// alpha, component 2 has 1 - alpha. Only the four canonical cubic values
/// are stored; the mixed entries are symmetrized, K112 = K121 = K211 and
/// K122 = K212 = K221, which reproduces the multiplicities 3 of the
/// energy's mixed terms.
struct TwoComponentParams {
    double K111 = 0.0, K112 = 0.0, K122 = 0.0, K222 = 0.0;
    double J11 = 0.0, J12 = 0.0, J22 = 0.0;
    double h1 = 0.0, h2 = 0.0;
    double alpha = 0.5;  // relative size of component 1
};

/// Average opinions of the two subsystems.
struct MagnetizationPair {
    double m1 = 0.0;
    double m2 = 0.0;
};

/// Symmetric 2x2 matrix of second partials.
struct SymMatrix2 {
    double m11 = 0.0, m12 = 0.0, m22 = 0.0;

    double det() const { return m11 * m22 - m12 * m12; }
    bool negative_definite() const { return m11 < 0.0 && det() > 0.0; }
};

namespace detail {

inline void require_unit_interval(double m, const char* who) {
    if (!(std::fabs(m) <= 1.0))
        throw std::domain_error(std::string(who) + ": magnetization outside [-1,1]");
}

inline void require_open_unit_interval(double m, const char* who) {
    if (!(std::fabs(m) < 1.0))
        throw std::domain_error(std::string(who) + ": magnetization outside (-1,1)");
}

// x log x with the limit convention 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

inline void validate(const OneComponentParams& p) {
    if (!(std::isfinite(p.K) && std::isfinite(p.J) && std::isfinite(p.h)))
        throw std::invalid_argument("OneComponentParams: couplings must be finite");
}

inline void validate(const TwoComponentParams& p) {
    const bool finite = std::isfinite(p.K111) && std::isfinite(p.K112) &&
                        std::isfinite(p.K122) && std::isfinite(p.K222) &&
                        std::isfinite(p.J11) && std::isfinite(p.J12) &&
                        std::isfinite(p.J22) && std::isfinite(p.h1) &&
                        std::isfinite(p.h2);
    if (!finite)
        throw std::invalid_argument("TwoComponentParams: couplings must be finite");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
        throw std::invalid_argument("TwoComponentParams: alpha must be in [0,1]");
}

/// Entropy contribution
///   I(m) = (1-m)/2 log((1-m)/2) + (1+m)/2 log((1+m)/2),
/// with 0 log 0 = 0 at the endpoints. Ranges over [-log 2, 0].
inline double entropy_term(double m) {
    detail::require_unit_interval(m, "entropy_term");
    return detail::xlogx(0.5 * (1.0 - m)) + detail::xlogx(0.5 * (1.0 + m));
}

/// Energy contribution U(m) = (K/3) m^3 + (J/2) m^2 + h m.
inline double energy_one(const OneComponentParams& p, double m) {
    detail::require_unit_interval(m, "energy_one");
    return (p.K / 3.0) * m * m * m + (p.J / 2.0) * m * m + p.h * m;
}

/// Variational functional phi(m) = U(m) - I(m); the equilibrium average
/// opinion is its global maximizer over [-1,1].
inline double phi_one(const OneComponentParams& p, double m) {
    return energy_one(p, m) - entropy_term(m);
}

/// Effective field K m^2 + J m + h; the stationarity condition reads
/// m = tanh(mean_field_one(p, m)).
inline double mean_field_one(const OneComponentParams& p, double m) {
    return p.K * m * m + p.J * m + p.h;
}

/// phi'(m) = K m^2 + J m + h - arctanh(m). Sign changes bracket
/// stationary points.
inline double grad_phi_one(const OneComponentParams& p, double m) {
    detail::require_open_unit_interval(m, "grad_phi_one");
    return mean_field_one(p, m) - std::atanh(m);
}

/// phi''(m) = 2 K m + J - 1/(1-m^2); negative at maxima.
inline double second_deriv_phi_one(const OneComponentParams& p, double m) {
    detail::require_open_unit_interval(m, "second_deriv_phi_one");
    return 2.0 * p.K * m + p.J - 1.0 / (1.0 - m * m);
}

/// Two-component energy
///   U(m1,m2) = (1/3)[K111 a1^3 m1^3 + 3 K112 a1^2 a2 m1^2 m2
///                    + 3 K122 a1 a2^2 m1 m2^2 + K222 a2^3 m2^3]
///            + (1/2)[J11 a1^2 m1^2 + 2 J12 a1 a2 m1 m2 + J22 a2^2 m2^2]
///            + h1 a1 m1 + h2 a2 m2,
/// with a1 = alpha, a2 = 1 - alpha.
inline double energy_two(const TwoComponentParams& p, MagnetizationPair m) {
    detail::require_unit_interval(m.m1, "energy_two");
    detail::require_unit_interval(m.m2, "energy_two");
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    const double cubic = p.K111 * a1 * a1 * a1 * m.m1 * m.m1 * m.m1 +
                         3.0 * p.K112 * a1 * a1 * a2 * m.m1 * m.m1 * m.m2 +
                         3.0 * p.K122 * a1 * a2 * a2 * m.m1 * m.m2 * m.m2 +
                         p.K222 * a2 * a2 * a2 * m.m2 * m.m2 * m.m2;
    const double quad = p.J11 * a1 * a1 * m.m1 * m.m1 +
                        2.0 * p.J12 * a1 * a2 * m.m1 * m.m2 +
                        p.J22 * a2 * a2 * m.m2 * m.m2;
    return cubic / 3.0 + quad / 2.0 + p.h1 * a1 * m.m1 + p.h2 * a2 * m.m2;
}

/// Phi(m1,m2) = U(m1,m2) - a1 I(m1) - a2 I(m2).
inline double phi_two(const TwoComponentParams& p, MagnetizationPair m) {
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    return energy_two(p, m) - a1 * entropy_term(m.m1) - a2 * entropy_term(m.m2);
}

/// Effective fields (A1, A2) of the two-component stationarity condition
/// m_l = tanh(A_l), with the symmetrized cubic tensor:
///   A_l = h_l + sum_p a_p J_lp m_p + sum_{p,q} a_p a_q K_lpq m_p m_q.
inline std::array<double, 2> mean_field_two(const TwoComponentParams& p,
                                            MagnetizationPair m) {
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    const double A1 = p.h1 + p.J11 * a1 * m.m1 + p.J12 * a2 * m.m2 +
                      p.K111 * a1 * a1 * m.m1 * m.m1 +
                      2.0 * p.K112 * a1 * a2 * m.m1 * m.m2 +
                      p.K122 * a2 * a2 * m.m2 * m.m2;
    const double A2 = p.h2 + p.J12 * a1 * m.m1 + p.J22 * a2 * m.m2 +
                      p.K112 * a1 * a1 * m.m1 * m.m1 +
                      2.0 * p.K122 * a1 * a2 * m.m1 * m.m2 +
                      p.K222 * a2 * a2 * m.m2 * m.m2;
    return {A1, A2};
}

/// Gradient of Phi: component l is a_l (A_l - arctanh(m_l)).
inline std::array<double, 2> grad_phi_two(const TwoComponentParams& p,
                                          MagnetizationPair m) {
    detail::require_open_unit_interval(m.m1, "grad_phi_two");
    detail::require_open_unit_interval(m.m2, "grad_phi_two");
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    const auto A = mean_field_two(p, m);
    return {a1 * (A[0] - std::atanh(m.m1)), a2 * (A[1] - std::atanh(m.m2))};
}

/// Jacobian entries dA_l/dm_r = a_r [J_lr + 2 sum_q a_q K_lrq m_q],
/// row-major (dA1/dm1, dA1/dm2, dA2/dm1, dA2/dm2).
inline std::array<double, 4> mean_field_jacobian_two(const TwoComponentParams& p,
                                                     MagnetizationPair m) {
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    const double dA1dm1 = a1 * (p.J11 + 2.0 * (p.K111 * a1 * m.m1 + p.K112 * a2 * m.m2));
    const double dA1dm2 = a2 * (p.J12 + 2.0 * (p.K112 * a1 * m.m1 + p.K122 * a2 * m.m2));
    const double dA2dm1 = a1 * (p.J12 + 2.0 * (p.K112 * a1 * m.m1 + p.K122 * a2 * m.m2));
    const double dA2dm2 = a2 * (p.J22 + 2.0 * (p.K122 * a1 * m.m1 + p.K222 * a2 * m.m2));
    return {dA1dm1, dA1dm2, dA2dm1, dA2dm2};
}

/// Matrix of second partials of Phi; symmetric by construction.
inline SymMatrix2 hessian_phi_two(const TwoComponentParams& p, MagnetizationPair m) {
    detail::require_open_unit_interval(m.m1, "hessian_phi_two");
    detail::require_open_unit_interval(m.m2, "hessian_phi_two");
    const double a1 = p.alpha, a2 = 1.0 - p.alpha;
    const auto dA = mean_field_jacobian_two(p, m);
    SymMatrix2 H;
    H.m11 = a1 * (dA[0] - 1.0 / (1.0 - m.m1 * m.m1));
    H.m12 = a1 * dA[1];  // equals a2 * dA[2]
    H.m22 = a2 * (dA[3] - 1.0 / (1.0 - m.m2 * m.m2));
    return H;
}

/// Bias that makes m_star a fixed point of the isolated subsystem:
///   h = arctanh(m*) - K m*^2 - J m*.
inline double bias_from_internal_equilibrium(double m_star, double K_diag, double J_diag) {
    detail::require_open_unit_interval(m_star, "bias_from_internal_equilibrium");
    return std::atanh(m_star) - K_diag * m_star * m_star - J_diag * m_star;
}

/// Combined order parameter, alpha m1 + (1-alpha) m2.
inline double total_magnetization(double alpha, MagnetizationPair m) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::domain_error("total_magnetization: alpha outside [0,1]");
    detail::require_unit_interval(m.m1, "total_magnetization");
    detail::require_unit_interval(m.m2, "total_magnetization");
    return alpha * m.m1 + (1.0 - alpha) * m.m2;
}

/// One-component restriction of the parameters of a single component,
/// used when the other component's relative size is zero.
inline OneComponentParams isolated_component(const TwoComponentParams& p, int component) {
    if (component == 1) return {p.K111, p.J11, p.h1};
    if (component == 2) return {p.K222, p.J22, p.h2};
    throw std::invalid_argument("isolated_component: component must be 1 or 2");
}

/// Named access to parameter fields, for sweeps and the CLI.
/// Returns nullptr for unknown names.
inline double* param_ref(OneComponentParams& p, const std::string& name) {
    if (name == "K") return &p.K;
    if (name == "J") return &p.J;
    if (name == "h") return &p.h;
    return nullptr;
}

inline double* param_ref(TwoComponentParams& p, const std::string& name) {
    if (name == "K111") return &p.K111;
    if (name == "K112") return &p.K112;
    if (name == "K122") return &p.K122;
    if (name == "K222") return &p.K222;
    if (name == "J11") return &p.J11;
    if (name == "J12") return &p.J12;
    if (name == "J22") return &p.J22;
    if (name == "h1") return &p.h1;
    if (name == "h2") return &p.h2;
    if (name == "alpha") return &p.alpha;
    return nullptr;
}

}  // namespace cubicmf
