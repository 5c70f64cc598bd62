#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cubicmf/model.hpp"
#include "cubicmf/parallel.hpp"
#include "cubicmf/solver.hpp"

namespace cubicmf {

/// One-parameter sweep: the named fields in `vary` are tied together and set
/// to the same value at each of `steps` grid points over [from, to].
template <class Params>
struct SweepSpec {
    Params base;
    std::vector<std::string> vary;
    double from = 0.0;
    double to = 1.0;
    int steps = 2;
};

struct SweepRow {
    double param = 0.0;
    double m_total = 0.0, m1 = 0.0, m2 = 0.0;
    double phi = 0.0;
    int n_roots = 0;
    bool coexistence = false;
    std::vector<double> tied_m_total;  // m_total of the non-primary tied globals
    bool solver_ok = true;             // false: solve failed, numeric fields are NaN
};

/// Coarse bracket from adjacent sweep rows whose order parameter differs by
/// more than the jump threshold.
struct JumpBracket {
    double x_lo = 0.0, x_hi = 0.0;
    double m_lo = 0.0, m_hi = 0.0;
};

/// A refined first-order transition.
struct JumpEvent {
    double location = 0.0;
    double width = 0.0;
    double m_left = 0.0, m_right = 0.0;
    double delta = 0.0;
};

namespace detail {

template <class Params>
Params with_vary(const Params& base, const std::vector<std::string>& vary, double value) {
    Params p = base;
    for (const auto& name : vary) {
        double* field = param_ref(p, name);
        if (!field) throw std::invalid_argument("unknown parameter name: " + name);
        *field = value;
    }
    return p;
}

inline double total_m(const OneComponentParams&, double loc) { return loc; }
inline double total_m(const TwoComponentParams& p, const MagnetizationPair& loc) {
    return total_magnetization(p.alpha, loc);
}

inline double comp1(double loc) { return loc; }
inline double comp2(double loc) { return loc; }
inline double comp1(const MagnetizationPair& loc) { return loc.m1; }
inline double comp2(const MagnetizationPair& loc) { return loc.m2; }

inline double loc_dist(double a, double b) { return std::fabs(a - b); }
inline double loc_dist(const MagnetizationPair& a, const MagnetizationPair& b) {
    return std::max(std::fabs(a.m1 - b.m1), std::fabs(a.m2 - b.m2));
}

inline double phi_at(const OneComponentParams& p, double m) { return phi_one(p, m); }
inline double phi_at(const TwoComponentParams& p, const MagnetizationPair& m) {
    return phi_two(p, m);
}

inline bool continue_root(const OneComponentParams& p, double& m) {
    return newton_polish_one(p, m);
}
inline bool continue_root(const TwoComponentParams& p, MagnetizationPair& m) {
    return newton_polish_two(p, m);
}

// Distance from one solved point to its nearest distinct neighbour, used to
// scale the branch-tracking loss criterion. Falls back to the domain width
// when the set has a single point.
template <class Loc>
double nearest_gap(const SolutionSet<Loc>& s, const Loc& loc) {
    double gap = 2.0;
    for (const auto& pt : s.points) {
        const double d = loc_dist(pt.location, loc);
        if (d > 1e-12) gap = std::min(gap, d);
    }
    return gap;
}

template <class Params, class Loc>
Loc track_branch(const Params& p, const Loc& prev, double gap_limit) {
    Loc next = prev;
    if (!continue_root(p, next) || loc_dist(next, prev) > gap_limit)
        throw solver_error(
            "refine_transition: branch tracking lost a root (bracket too wide)");
    return next;
}

}  // namespace detail

template <class Params>
void validate(const SweepSpec<Params>& spec) {
    if (!(spec.from < spec.to)) throw std::invalid_argument("SweepSpec: from must be < to");
    if (spec.steps < 2) throw std::invalid_argument("SweepSpec: steps must be >= 2");
    if (spec.vary.empty()) throw std::invalid_argument("SweepSpec: vary must name a parameter");
    Params probe = spec.base;
    for (const auto& name : spec.vary)
        if (!param_ref(probe, name))
            throw std::invalid_argument("SweepSpec: unknown parameter name: " + name);
}

/// Solves the model at every grid point and reports the selected global
/// solution per row. At coexistence the primary value is the branch reached
/// from the lower parameter side (nearest to the previous row's primary);
/// the other tied values are recorded alongside. Solver failures invalidate
/// single rows without aborting the sweep.
template <class Params>
std::vector<SweepRow> sweep_1d(const SweepSpec<Params>& spec,
                               const SolverConfig& config = {}, unsigned threads = 1) {
    validate(spec);
    validate(config);
    using Set = decltype(solve_all(spec.base, config));
    const int n = spec.steps;
    std::vector<std::optional<Set>> sets(n);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
        xs[i] = spec.from + (spec.to - spec.from) * i / (n - 1);

    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        try {
            sets[i] = solve_all(detail::with_vary(spec.base, spec.vary, xs[i]), config);
        } catch (const solver_error&) {
            sets[i].reset();
        }
    });

    std::vector<SweepRow> rows(n);
    using Loc = decltype(sets[0]->points.front().location);
    std::optional<Loc> prev;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < n; ++i) {
        SweepRow& row = rows[i];
        row.param = xs[i];
        if (!sets[i]) {
            row.solver_ok = false;
            row.m_total = row.m1 = row.m2 = row.phi = nan;
            continue;
        }
        const Params p = detail::with_vary(spec.base, spec.vary, xs[i]);
        const auto globals = sets[i]->global();
        std::size_t pick = 0;
        if (prev) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < globals.size(); ++k) {
                const double d = detail::loc_dist(globals[k].location, *prev);
                if (d < best) {
                    best = d;
                    pick = k;
                }
            }
        }
        const auto& primary = globals[pick];
        prev = primary.location;
        row.m_total = detail::total_m(p, primary.location);
        row.m1 = detail::comp1(primary.location);
        row.m2 = detail::comp2(primary.location);
        row.phi = primary.phi;
        row.n_roots = static_cast<int>(sets[i]->points.size());
        row.coexistence = sets[i]->coexistence;
        for (std::size_t k = 0; k < globals.size(); ++k)
            if (k != pick) row.tied_m_total.push_back(detail::total_m(p, globals[k].location));
    }
    return rows;
}

/// Flags every adjacent pair of valid rows whose order parameter differs by
/// more than jump_threshold. Brackets are returned in sweep order and never
/// merged.
inline std::vector<JumpBracket> detect_jumps(const std::vector<SweepRow>& rows,
                                             double jump_threshold = 0.1) {
    std::vector<JumpBracket> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i - 1].solver_ok || !rows[i].solver_ok) continue;
        if (std::fabs(rows[i].m_total - rows[i - 1].m_total) > jump_threshold)
            out.push_back({rows[i - 1].param, rows[i].param, rows[i - 1].m_total,
                           rows[i].m_total});
    }
    return out;
}

/// Locates the free-energy branch crossing inside a coarse bracket by
/// bisection on the sign of phi(branch A) - phi(branch B). Each branch is
/// continued through the bracket by Newton steps from its previous location;
/// tracking that moves further than 5x the branch's initial nearest-root gap
/// aborts with a diagnostic (the bracket was too wide).
template <class Params>
JumpEvent refine_transition(const Params& base, const std::vector<std::string>& vary,
                            double x_lo, double x_hi, double transition_tol = 1e-8,
                            const SolverConfig& config = {}) {
    if (!(x_lo < x_hi)) throw std::invalid_argument("refine_transition: empty bracket");
    if (!(transition_tol > 0.0))
        throw std::invalid_argument("refine_transition: transition_tol must be > 0");

    const auto set_lo = solve_all(detail::with_vary(base, vary, x_lo), config);
    const auto set_hi = solve_all(detail::with_vary(base, vary, x_hi), config);
    auto A = set_lo.global().front().location;
    auto B = set_hi.global().front().location;
    const double limit_a = 5.0 * detail::nearest_gap(set_lo, A);
    const double limit_b = 5.0 * detail::nearest_gap(set_hi, B);
    {
        // Same branch at both ends means there is nothing to refine. The
        // probe must agree in both directions: one-way tracking can slide
        // off a branch that dies inside the bracket and land on the other
        // one. A probe that fails outright proves the branches distinct.
        bool same_branch = false;
        try {
            const Params ph = detail::with_vary(base, vary, x_hi);
            const Params pl = detail::with_vary(base, vary, x_lo);
            same_branch =
                detail::loc_dist(detail::track_branch(ph, A, limit_a), B) <=
                    config.dedup_tol &&
                detail::loc_dist(detail::track_branch(pl, B, limit_b), A) <=
                    config.dedup_tol;
        } catch (const solver_error&) {
        }
        if (same_branch)
            throw solver_error("refine_transition: no change of global branch in bracket");
    }

    double lo = x_lo, hi = x_hi;
    for (int it = 0; it < 200 && hi - lo > transition_tol; ++it) {
        const double t = 0.5 * (lo + hi);
        const Params pt_ = detail::with_vary(base, vary, t);
        const auto At = detail::track_branch(pt_, A, limit_a);
        const auto Bt = detail::track_branch(pt_, B, limit_b);
        // distinct competing branches never coincide inside the bracket; a
        // collapse means one side slid off a vanished branch (spinodal inside
        // the bracket)
        if (detail::loc_dist(At, Bt) <= config.dedup_tol)
            throw solver_error(
                "refine_transition: branches merged during tracking (bracket too wide)");
        if (detail::phi_at(pt_, At) >= detail::phi_at(pt_, Bt)) {
            lo = t;
            A = At;
        } else {
            hi = t;
            B = Bt;
        }
    }

    JumpEvent ev;
    ev.location = 0.5 * (lo + hi);
    ev.width = hi - lo;
    const Params pc = detail::with_vary(base, vary, ev.location);
    const auto A_end = detail::track_branch(pc, A, limit_a);
    const auto B_end = detail::track_branch(pc, B, limit_b);
    if (detail::loc_dist(A_end, B_end) <= config.dedup_tol)
        throw solver_error(
            "refine_transition: branches merged during tracking (bracket too wide)");
    ev.m_left = detail::total_m(pc, A_end);
    ev.m_right = detail::total_m(pc, B_end);
    ev.delta = std::fabs(ev.m_right - ev.m_left);
    return ev;
}

struct CriticalCoupling {
    double value = 0.0;
    double width = 0.0;
};

/// Positive cubic coupling at which phi(0) = phi(m+) for the symmetric
/// one-component model (h = 0, J < 1). K is eliminated through the
/// stationarity condition, leaving a single bisection in m for the root of
///   psi(m) = (m/3) arctanh(m) + (J/6) m^2 - I(m) - log 2,
/// after which K_c = (arctanh(m) - J m) / m^2. Returns nullopt for J >= 1,
/// where the zero-opinion state is no maximum and the crossing is absent.
inline std::optional<CriticalCoupling> critical_K_symmetric(double J,
                                                            const SolverConfig& config = {}) {
    validate(config);
    if (!std::isfinite(J)) throw std::invalid_argument("critical_K_symmetric: J must be finite");
    if (J >= 1.0) return std::nullopt;

    const auto psi = [&](double m) {
        return (m / 3.0) * std::atanh(m) + (J / 6.0) * m * m - entropy_term(m) -
               std::numbers::ln2;
    };
    // psi < 0 just right of the origin; scan for the sign change.
    double a = 0.0, b = 0.0;
    double prev_m = 1e-6, prev_psi = psi(prev_m);
    for (double m = 1e-3; m < 1.0; m += 1e-3) {
        const double v = psi(m);
        if (prev_psi < 0.0 && v >= 0.0) {
            a = prev_m;
            b = m;
            break;
        }
        prev_m = m;
        prev_psi = v;
    }
    if (b == 0.0) return std::nullopt;

    while (b - a > 1e-13) {
        const double mid = 0.5 * (a + b);
        (psi(mid) < 0.0 ? a : b) = mid;
    }
    const auto k_of = [&](double m) { return (std::atanh(m) - J * m) / (m * m); };
    CriticalCoupling out;
    out.value = k_of(0.5 * (a + b));
    out.width = std::fabs(k_of(b) - k_of(a));
    return out;
}

struct AxisSpec {
    std::vector<std::string> vary;
    double from = 0.0;
    double to = 1.0;
    int steps = 2;
};

template <class Params>
struct PhaseDiagramSpec {
    Params base;
    AxisSpec x, y;
    int grid_cap = 512;  // maximum steps per axis
};

struct DiagramCell {
    double x = 0.0, y = 0.0;
    double m_total = 0.0, phi = 0.0;
    bool jump = false;  // set on the right-hand cell of a flagged pair
    bool valid = true;
};

struct RowTransition {
    double y = 0.0;
    JumpEvent event;
};

struct PhaseDiagramResult {
    int nx = 0, ny = 0;
    std::vector<DiagramCell> cells;  // row-major, index = iy * nx + ix
    std::vector<RowTransition> transitions;
    int refine_failures = 0;

    const DiagramCell& at(int ix, int iy) const { return cells[iy * nx + ix]; }
};

/// Per-cell global solution over a 2D parameter grid, plus transition points
/// refined from the jumps along each row (x direction only). Rows are
/// independent and computed in parallel; failed cells are marked invalid and
/// failed refinements counted, neither aborts the diagram.
template <class Params>
PhaseDiagramResult phase_diagram_2d(const PhaseDiagramSpec<Params>& spec,
                                    const SolverConfig& config = {}, unsigned threads = 1,
                                    double jump_threshold = 0.1,
                                    double transition_tol = 1e-8) {
    validate(config);
    for (const auto& xn : spec.x.vary)
        for (const auto& yn : spec.y.vary)
            if (xn == yn)
                throw std::invalid_argument("phase_diagram_2d: axes share parameter " + xn);
    if (spec.x.steps < 2 || spec.y.steps < 2)
        throw std::invalid_argument("phase_diagram_2d: each axis needs >= 2 steps");
    if (!(spec.x.from < spec.x.to) || !(spec.y.from < spec.y.to))
        throw std::invalid_argument("phase_diagram_2d: axis ranges need from < to");
    if (spec.x.steps > spec.grid_cap || spec.y.steps > spec.grid_cap)
        throw std::invalid_argument("phase_diagram_2d: grid cap exceeded");

    PhaseDiagramResult out;
    out.nx = spec.x.steps;
    out.ny = spec.y.steps;
    out.cells.resize(static_cast<std::size_t>(out.nx) * out.ny);
    std::vector<std::vector<RowTransition>> row_transitions(out.ny);
    std::vector<int> row_failures(out.ny, 0);

    parallel_for(static_cast<std::size_t>(out.ny), threads, [&](std::size_t iy) {
        const double y = spec.y.from + (spec.y.to - spec.y.from) * iy / (out.ny - 1);
        const Params row_base = detail::with_vary(spec.base, spec.y.vary, y);
        SweepSpec<Params> row_spec{row_base, spec.x.vary, spec.x.from, spec.x.to,
                                   spec.x.steps};
        const auto rows = sweep_1d(row_spec, config, 1);
        for (int ix = 0; ix < out.nx; ++ix) {
            DiagramCell& cell = out.cells[iy * out.nx + ix];
            cell.x = rows[ix].param;
            cell.y = y;
            cell.valid = rows[ix].solver_ok;
            cell.m_total = rows[ix].m_total;
            cell.phi = rows[ix].phi;
            if (ix > 0 && rows[ix].solver_ok && rows[ix - 1].solver_ok &&
                std::fabs(rows[ix].m_total - rows[ix - 1].m_total) > jump_threshold)
                cell.jump = true;
        }
        for (const auto& bracket : detect_jumps(rows, jump_threshold)) {
            try {
                row_transitions[iy].push_back(
                    {y, refine_transition(row_base, spec.x.vary, bracket.x_lo,
                                          bracket.x_hi, transition_tol, config)});
            } catch (const solver_error&) {
                ++row_failures[iy];
            }
        }
    });

    for (int iy = 0; iy < out.ny; ++iy) {
        out.refine_failures += row_failures[iy];
        for (auto& t : row_transitions[iy]) out.transitions.push_back(std::move(t));
    }
    return out;
}

struct CriticalAlphaPoint {
    double coupling = 0.0;
    std::optional<double> alpha_star;  // empty when no jump exists along alpha
    double width = 0.0;
};

/// For each coupling value, sweeps alpha over [0,1], detects the first jump
/// of the combined order parameter and refines it. Couplings without a jump
/// are recorded with an empty alpha_star.
inline std::vector<CriticalAlphaPoint> critical_alpha_curve(
    const TwoComponentParams& base, const std::vector<std::string>& coupling_vary,
    double from, double to, int coupling_steps, const SolverConfig& config = {},
    int alpha_steps = 101, double jump_threshold = 0.1, double transition_tol = 1e-8,
    unsigned threads = 1) {
    if (coupling_steps < 1)
        throw std::invalid_argument("critical_alpha_curve: coupling_steps must be >= 1");
    std::vector<CriticalAlphaPoint> out(coupling_steps);
    parallel_for(static_cast<std::size_t>(coupling_steps), threads, [&](std::size_t i) {
        const double c = coupling_steps == 1
                             ? from
                             : from + (to - from) * i / (coupling_steps - 1);
        const TwoComponentParams p = detail::with_vary(base, coupling_vary, c);
        SweepSpec<TwoComponentParams> spec{p, {"alpha"}, 0.0, 1.0, alpha_steps};
        const auto rows = sweep_1d(spec, config, 1);
        const auto brackets = detect_jumps(rows, jump_threshold);
        CriticalAlphaPoint pt;
        pt.coupling = c;
        if (!brackets.empty()) {
            const auto ev = refine_transition(p, {"alpha"}, brackets.front().x_lo,
                                              brackets.front().x_hi, transition_tol, config);
            pt.alpha_star = ev.location;
            pt.width = ev.width;
        }
        out[i] = pt;
    });
    return out;
}

}  // namespace cubicmf
