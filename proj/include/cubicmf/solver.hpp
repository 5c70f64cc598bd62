#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cubicmf/model.hpp"

namespace cubicmf {

struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double fp_tol = 1e-12;          // convergence tolerance on successive iterates
    int max_iter = 100000;          // fixed-point iteration budget per start
    double damping = 1.0;           // halved on detected oscillation, floor 0.125
    int n_starts = 21;              // starts per dimension for the 2D multi-start
    double dedup_tol = 1e-8;        // root-identity tolerance
    double grid_resolution = 1e-4;  // bracketing grid step for the 1D root scan
};

inline void validate(const SolverConfig& c) {
    if (!(c.fp_tol > 0.0)) throw std::invalid_argument("SolverConfig: fp_tol must be > 0");
    if (!(c.dedup_tol > c.fp_tol))
        throw std::invalid_argument("SolverConfig: dedup_tol must exceed fp_tol");
    if (!(c.damping > 0.0 && c.damping <= 1.0))
        throw std::invalid_argument("SolverConfig: damping must be in (0,1]");
    if (c.n_starts < 3) throw std::invalid_argument("SolverConfig: n_starts must be >= 3");
    if (c.max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(c.grid_resolution > 0.0))
        throw std::invalid_argument("SolverConfig: grid_resolution must be > 0");
}

enum class Stability { GlobalMax, LocalMax, Unstable };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::GlobalMax: return "global";
        case Stability::LocalMax: return "local";
        default: return "unstable";
    }
}

template <class Loc>
struct StationaryPoint {
    Loc location{};
    double phi = 0.0;
    Stability stability = Stability::Unstable;
    double residual = 0.0;  // of the consistency equation m = tanh(...)
};

/// All stationary points of the functional, deduplicated and sorted
/// (ascending in 1D, lexicographically in 2D).
template <class Loc>
struct SolutionSet {
    std::vector<StationaryPoint<Loc>> points;
    bool coexistence = false;  // two or more global maximizers tie
    int failed_starts = 0;     // multi-start iterations that did not converge

    std::vector<StationaryPoint<Loc>> global() const {
        std::vector<StationaryPoint<Loc>> g;
        for (const auto& pt : points)
            if (pt.stability == Stability::GlobalMax) g.push_back(pt);
        return g;
    }
};

template <class Loc>
struct FixedPointResult {
    Loc point{};
    bool converged = false;
    int iterations = 0;
    double last_step = 0.0;
    double damping = 1.0;  // damping in effect at exit
};

namespace detail {

constexpr double kGlobalTieTol = 1e-10;
constexpr double kResidualTarget = 1e-10;
constexpr double kDampingFloor = 0.125;

inline double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

// Consistency-equation residual, max over weight-bearing components.
inline double residual_one(const OneComponentParams& p, double m) {
    return std::fabs(m - std::tanh(mean_field_one(p, m)));
}

inline double residual_two(const TwoComponentParams& p, MagnetizationPair m) {
    const auto A = mean_field_two(p, m);
    double r = 0.0;
    if (p.alpha > 0.0) r = std::max(r, std::fabs(m.m1 - std::tanh(A[0])));
    if (p.alpha < 1.0) r = std::max(r, std::fabs(m.m2 - std::tanh(A[1])));
    return r;
}

// Newton refinement of f(m) = m - tanh(K m^2 + J m + h). Returns true on
// success and leaves the improved root in m; m is untouched on failure.
inline bool newton_polish_one(const OneComponentParams& p, double& m, int max_steps = 50) {
    double x = m;
    for (int i = 0; i < max_steps; ++i) {
        const double arg = mean_field_one(p, x);
        const double f = x - std::tanh(arg);
        const double fp = 1.0 - sech2(arg) * (2.0 * p.K * x + p.J);
        if (std::fabs(fp) < 1e-14) return false;
        const double next = x - f / fp;
        if (!(std::fabs(next) < 1.0)) return false;
        if (std::fabs(next - x) < 1e-15) {
            x = next;
            break;
        }
        x = next;
    }
    if (residual_one(p, x) <= kResidualTarget) {
        m = x;
        return true;
    }
    return false;
}

// Newton on F(m) = m - tanh(A(m)); this form stays regular as alpha
// approaches 0 or 1, unlike the gradient of Phi.
inline bool newton_polish_two(const TwoComponentParams& p, MagnetizationPair& m,
                              int max_steps = 50) {
    MagnetizationPair x = m;
    for (int i = 0; i < max_steps; ++i) {
        const auto A = mean_field_two(p, x);
        const double F1 = x.m1 - std::tanh(A[0]);
        const double F2 = x.m2 - std::tanh(A[1]);
        const auto dA = mean_field_jacobian_two(p, x);
        const double s1 = sech2(A[0]), s2 = sech2(A[1]);
        const double j11 = 1.0 - s1 * dA[0], j12 = -s1 * dA[1];
        const double j21 = -s2 * dA[2], j22 = 1.0 - s2 * dA[3];
        const double det = j11 * j22 - j12 * j21;
        if (std::fabs(det) < 1e-14) return false;
        const double d1 = (F1 * j22 - F2 * j12) / det;
        const double d2 = (F2 * j11 - F1 * j21) / det;
        const MagnetizationPair next{x.m1 - d1, x.m2 - d2};
        if (!(std::fabs(next.m1) < 1.0 && std::fabs(next.m2) < 1.0)) return false;
        const double moved = std::max(std::fabs(d1), std::fabs(d2));
        x = next;
        if (moved < 1e-15) break;
    }
    if (residual_two(p, x) <= kResidualTarget) {
        m = x;
        return true;
    }
    return false;
}

}  // namespace detail

namespace detail {

// Oscillation detector for damped fixed-point loops. The tanh map develops
// period-2 cycles at strong coupling; those show up either as step sizes
// that fail to shrink on three consecutive iterations or as a near-return
// to the point two iterations back.
struct OscillationGuard {
    double prev_step = std::numeric_limits<double>::infinity();
    int not_shrinking = 0;

    bool detect(double step, double return2_dist) {
        bool osc = false;
        if (return2_dist < 0.01 * step) {
            osc = true;  // m_{t+1} ~ m_{t-1}: clean 2-cycle
        } else if (step >= prev_step) {
            if (++not_shrinking >= 3) osc = true;
        } else {
            not_shrinking = 0;
        }
        prev_step = step;
        if (osc) not_shrinking = 0;
        return osc;
    }
};

}  // namespace detail

/// Damped fixed-point iteration m <- (1-lambda) m + lambda tanh(K m^2 + J m + h).
/// The damping is halved (down to 0.125) whenever oscillation is detected.
inline FixedPointResult<double> fixed_point_iterate(const OneComponentParams& p,
                                                    double start,
                                                    const SolverConfig& config = {}) {
    validate(p);
    validate(config);
    detail::require_open_unit_interval(start, "fixed_point_iterate");
    FixedPointResult<double> r;
    r.point = start;
    r.damping = config.damping;
    detail::OscillationGuard guard;
    double prev2 = start;
    for (int it = 0; it < config.max_iter; ++it) {
        const double target = std::tanh(mean_field_one(p, r.point));
        const double next = (1.0 - r.damping) * r.point + r.damping * target;
        const double step = std::fabs(next - r.point);
        const double ret2 = std::fabs(next - prev2);
        prev2 = r.point;
        r.point = next;
        r.iterations = it + 1;
        r.last_step = step;
        if (step < config.fp_tol) {
            r.converged = true;
            return r;
        }
        if (guard.detect(step, ret2))
            r.damping = std::max(r.damping / 2.0, detail::kDampingFloor);
    }
    return r;
}

/// Componentwise damped iteration of the two-component consistency map.
inline FixedPointResult<MagnetizationPair> fixed_point_iterate(
    const TwoComponentParams& p, MagnetizationPair start, const SolverConfig& config = {}) {
    validate(p);
    validate(config);
    detail::require_open_unit_interval(start.m1, "fixed_point_iterate");
    detail::require_open_unit_interval(start.m2, "fixed_point_iterate");
    FixedPointResult<MagnetizationPair> r;
    r.point = start;
    r.damping = config.damping;
    detail::OscillationGuard guard;
    MagnetizationPair prev2 = start;
    for (int it = 0; it < config.max_iter; ++it) {
        const auto A = mean_field_two(p, r.point);
        const MagnetizationPair next{
            (1.0 - r.damping) * r.point.m1 + r.damping * std::tanh(A[0]),
            (1.0 - r.damping) * r.point.m2 + r.damping * std::tanh(A[1])};
        const double step = std::max(std::fabs(next.m1 - r.point.m1),
                                     std::fabs(next.m2 - r.point.m2));
        const double ret2 = std::max(std::fabs(next.m1 - prev2.m1),
                                     std::fabs(next.m2 - prev2.m2));
        prev2 = r.point;
        r.point = next;
        r.iterations = it + 1;
        r.last_step = step;
        if (step < config.fp_tol) {
            r.converged = true;
            return r;
        }
        if (guard.detect(step, ret2))
            r.damping = std::max(r.damping / 2.0, detail::kDampingFloor);
    }
    return r;
}

/// Marks every point whose phi lies within tie_tol of the best as the
/// global solution and returns that sublist; sets the coexistence flag
/// when two or more tie.
template <class Loc>
std::vector<StationaryPoint<Loc>> select_global(SolutionSet<Loc>& s,
                                                double tie_tol = detail::kGlobalTieTol) {
    if (s.points.empty()) throw solver_error("select_global: empty solution set");
    double best = s.points.front().phi;
    for (const auto& pt : s.points) best = std::max(best, pt.phi);
    int n_global = 0;
    for (auto& pt : s.points) {
        if (pt.phi >= best - tie_tol) {
            pt.stability = Stability::GlobalMax;
            ++n_global;
        } else if (pt.stability == Stability::GlobalMax) {
            pt.stability = Stability::LocalMax;
        }
    }
    s.coexistence = n_global > 1;
    return s.global();
}

/// Exhaustive 1D solve: scans g(m) = m - tanh(K m^2 + J m + h) on a uniform
/// grid over (-1+1e-9, 1-1e-9), bisects every sign change, polishes with
/// Newton, classifies by the sign of phi'' and marks the global maximizers.
/// The scan is exhaustive because g has at most one inflection point, so at
/// most three roots exist and they are well separated away from spinodals.
inline SolutionSet<double> find_all_stationary_one(const OneComponentParams& p,
                                                   const SolverConfig& config = {}) {
    validate(p);
    validate(config);
    constexpr double eps = 1e-9;
    const double lo = -1.0 + eps, hi = 1.0 - eps;
    const auto g = [&](double m) { return m - std::tanh(mean_field_one(p, m)); };

    std::vector<double> roots;
    const long n_cells = std::lround(std::ceil((hi - lo) / config.grid_resolution));
    double x_prev = lo, g_prev = g(lo);
    if (g_prev == 0.0) roots.push_back(x_prev);
    for (long i = 1; i <= n_cells; ++i) {
        const double x = (i == n_cells) ? hi : lo + static_cast<double>(i) * config.grid_resolution;
        const double gx = g(x);
        if (gx == 0.0) {
            roots.push_back(x);
        } else if (g_prev != 0.0 && (g_prev < 0.0) != (gx < 0.0)) {
            double a = x_prev, b = x, ga = g_prev;
            while (b - a > config.fp_tol) {
                const double mid = 0.5 * (a + b);
                const double gm = g(mid);
                if (gm == 0.0) {
                    a = b = mid;
                    break;
                }
                if ((ga < 0.0) == (gm < 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x_prev = x;
        g_prev = gx;
    }
    if (roots.empty())
        throw solver_error(
            "find_all_stationary_one: no sign change on the scan grid (the grid "
            "is too coarse, or every root lies within 1e-9 of the boundary)");

    std::sort(roots.begin(), roots.end());
    SolutionSet<double> out;
    for (double m : roots) {
        if (!out.points.empty() &&
            std::fabs(m - out.points.back().location) <= config.dedup_tol)
            continue;
        detail::newton_polish_one(p, m);
        StationaryPoint<double> pt;
        pt.location = m;
        pt.phi = phi_one(p, m);
        pt.residual = detail::residual_one(p, m);
        pt.stability = second_deriv_phi_one(p, m) < 0.0 ? Stability::LocalMax
                                                        : Stability::Unstable;
        out.points.push_back(pt);
    }
    select_global(out);
    return out;
}

namespace detail {

// Damped fixed-point solve for one 2D start, with Newton handoff: once the
// step drops below 1e-6 the root is finished by Newton, which also rides out
// critical slowing near spinodals. A 2-cycle that persists at floor damping
// encloses its fixed point, so the cycle midpoint is handed to Newton; when
// even that fails the start is reported non-convergent right away rather
// than after max_iter identical cycles.
inline bool multistart_solve_two(const TwoComponentParams& p, MagnetizationPair start,
                                 const SolverConfig& config, MagnetizationPair& out) {
    MagnetizationPair m = start;
    double lambda = config.damping;
    OscillationGuard guard;
    MagnetizationPair prev2 = start;
    for (int it = 0; it < config.max_iter; ++it) {
        const auto A = mean_field_two(p, m);
        const MagnetizationPair next{(1.0 - lambda) * m.m1 + lambda * std::tanh(A[0]),
                                     (1.0 - lambda) * m.m2 + lambda * std::tanh(A[1])};
        const double step =
            std::max(std::fabs(next.m1 - m.m1), std::fabs(next.m2 - m.m2));
        const double ret2 =
            std::max(std::fabs(next.m1 - prev2.m1), std::fabs(next.m2 - prev2.m2));
        if (step < config.fp_tol) {
            m = next;
            MagnetizationPair polished = m;
            out = newton_polish_two(p, polished) ? polished : m;
            return residual_two(p, out) <= kResidualTarget;
        }
        if (step < 1e-6) {
            MagnetizationPair polished = next;
            if (newton_polish_two(p, polished) &&
                std::max(std::fabs(polished.m1 - next.m1),
                         std::fabs(polished.m2 - next.m2)) < 1e-3) {
                out = polished;
                return true;
            }
        }
        if (guard.detect(step, ret2)) {
            if (lambda <= kDampingFloor) {
                MagnetizationPair mid{0.5 * (m.m1 + next.m1), 0.5 * (m.m2 + next.m2)};
                if (newton_polish_two(p, mid)) {
                    out = mid;
                    return true;
                }
                return false;
            }
            lambda = std::max(lambda / 2.0, kDampingFloor);
        }
        prev2 = m;
        m = next;
    }
    return false;
}

}  // namespace detail

/// Multi-start 2D solve: damped fixed-point iteration from an
/// n_starts x n_starts grid, Newton polish, deduplication and Hessian
/// classification. Exhaustiveness is best-effort (saddles of Phi repel the
/// consistency map); the test suite cross-checks global maxima against
/// dense grid evaluation of Phi.
///
/// At alpha = 0 or 1 the vanished component's stationarity condition
/// carries zero weight; the solve is delegated to the surviving component
/// and the vanished component's magnetization is reported as tanh of its
/// bias (zero interaction weight).
inline SolutionSet<MagnetizationPair> find_all_stationary_two(
    const TwoComponentParams& p, const SolverConfig& config = {}) {
    validate(p);
    validate(config);

    SolutionSet<MagnetizationPair> out;
    if (p.alpha == 0.0 || p.alpha == 1.0) {
        const int survivor = p.alpha == 1.0 ? 1 : 2;
        const auto sub = find_all_stationary_one(isolated_component(p, survivor), config);
        const double vanished_m = std::tanh(survivor == 1 ? p.h2 : p.h1);
        for (const auto& pt : sub.points) {
            StationaryPoint<MagnetizationPair> q;
            q.location = survivor == 1 ? MagnetizationPair{pt.location, vanished_m}
                                       : MagnetizationPair{vanished_m, pt.location};
            q.phi = phi_two(p, q.location);
            q.residual = pt.residual;
            q.stability = pt.stability;
            out.points.push_back(q);
        }
        out.coexistence = sub.coexistence;
        select_global(out);
        return out;
    }

    const int n = config.n_starts;
    const double span = 1.0 - 1e-3;
    std::vector<MagnetizationPair> found;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const MagnetizationPair start{-span + 2.0 * span * i / (n - 1),
                                          -span + 2.0 * span * j / (n - 1)};
            MagnetizationPair root;
            if (detail::multistart_solve_two(p, start, config, root))
                found.push_back(root);
            else
                ++out.failed_starts;
        }
    }
    if (found.empty())
        throw solver_error("find_all_stationary_two: no start converged");
    // Completion pass: plain Newton from the same grid. Its basins do not
    // depend on the damping path and it reaches the saddles the consistency
    // map repels, so the root set stays damping-invariant.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            MagnetizationPair root{-span + 2.0 * span * i / (n - 1),
                                   -span + 2.0 * span * j / (n - 1)};
            if (detail::newton_polish_two(p, root)) found.push_back(root);
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.m1 != b.m1 ? a.m1 < b.m1 : a.m2 < b.m2;
    });
    for (const auto& m : found) {
        bool duplicate = false;
        for (const auto& kept : out.points) {
            if (std::fabs(m.m1 - kept.location.m1) <= config.dedup_tol &&
                std::fabs(m.m2 - kept.location.m2) <= config.dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        StationaryPoint<MagnetizationPair> pt;
        pt.location = m;
        pt.phi = phi_two(p, m);
        pt.residual = detail::residual_two(p, m);
        pt.stability = hessian_phi_two(p, m).negative_definite() ? Stability::LocalMax
                                                                 : Stability::Unstable;
        out.points.push_back(pt);
    }
    select_global(out);
    return out;
}

/// Overloads so generic sweep code can solve either model.
inline SolutionSet<double> solve_all(const OneComponentParams& p,
                                     const SolverConfig& config = {}) {
    return find_all_stationary_one(p, config);
}

inline SolutionSet<MagnetizationPair> solve_all(const TwoComponentParams& p,
                                                const SolverConfig& config = {}) {
    return find_all_stationary_two(p, config);
}

/// Variational free energy p = sup phi, evaluated at the solved global
/// maximizer.
inline double variational_p(const OneComponentParams& p, const SolverConfig& config = {}) {
    const auto s = find_all_stationary_one(p, config);
    return s.global().front().phi;
}

inline double variational_p(const TwoComponentParams& p, const SolverConfig& config = {}) {
    const auto s = find_all_stationary_two(p, config);
    return s.global().front().phi;
}

}  // namespace cubicmf
