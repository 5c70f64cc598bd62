#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cubicmf/transitions.hpp"
#include "oracles.hpp"

using namespace cubicmf;

namespace {

// Branch-crossing couplings, frozen from an extended-precision bisection of
// (m/3) arctanh(m) + (J/6) m^2 - I(m) = log 2 with K eliminated through the
// stationarity condition.
constexpr double kKc0 = 2.0162543581005688;
constexpr double kKc025 = 1.6157643845370414;
constexpr double kKc05 = 1.1999065921108158;
constexpr double kKc075 = 0.74889693325910766;

std::vector<SweepRow> k_sweep(double J, int steps = 801) {
    SweepSpec<OneComponentParams> spec{{0.0, J, 0.0}, {"K"}, -4.0, 4.0, steps};
    return sweep_1d(spec, {}, 2);
}

}  // namespace

TEST_CASE("sweep_1d: symmetric one-component sweep is zero below the transition") {
    const auto rows = k_sweep(0.0);
    CHECK(rows.size() == 801);
    for (const auto& row : rows) {
        CHECK(row.solver_ok);
        if (std::fabs(row.param) < 2.0) CHECK(std::fabs(row.m_total) < 1e-9);
        if (row.param < -2.1) CHECK(row.m_total < -0.9);
        if (row.param > 2.1) CHECK(row.m_total > 0.9);
        CHECK(row.m1 == row.m_total);
        CHECK(row.m2 == row.m_total);
    }

    const auto jumps = detect_jumps(rows);
    REQUIRE(jumps.size() == 2);
    CHECK(jumps[0].x_lo <= -kKc0);
    CHECK(jumps[0].x_hi >= -kKc0);
    CHECK(jumps[1].x_lo <= kKc0);
    CHECK(jumps[1].x_hi >= kKc0);

    const OneComponentParams base{0, 0, 0};
    const auto right = refine_transition(base, {"K"}, jumps[1].x_lo, jumps[1].x_hi);
    CHECK(right.location == doctest::Approx(kKc0).epsilon(1e-8));
    CHECK(std::fabs(right.location - 2.016295) < 5e-5);
    CHECK(right.width <= 1e-8);
    CHECK(std::fabs(right.m_left) < 1e-6);
    CHECK(right.m_right == doctest::Approx(0.94805920690752557).epsilon(1e-6));
    CHECK(right.delta > 0.9);

    const auto left = refine_transition(base, {"K"}, jumps[0].x_lo, jumps[0].x_hi);
    CHECK(left.location == doctest::Approx(-kKc0).epsilon(1e-8));
    CHECK(std::fabs(left.location + 2.016295) < 5e-5);
}

TEST_CASE("sweep_1d: J=0.5 has two jumps separated by a zero plateau") {
    const auto rows = k_sweep(0.5);
    const auto jumps = detect_jumps(rows);
    REQUIRE(jumps.size() == 2);

    const OneComponentParams base{0, 0.5, 0};
    const auto lo = refine_transition(base, {"K"}, jumps[0].x_lo, jumps[0].x_hi);
    const auto hi = refine_transition(base, {"K"}, jumps[1].x_lo, jumps[1].x_hi);
    CHECK(lo.location == doctest::Approx(-kKc05).epsilon(1e-8));
    CHECK(hi.location == doctest::Approx(kKc05).epsilon(1e-8));
    for (const auto& row : rows)
        if (row.param > lo.location + 0.02 && row.param < hi.location - 0.02)
            CHECK(std::fabs(row.m_total) < 1e-9);
}

TEST_CASE("sweep_1d: J=1.2 collapses to a single jump through zero coupling") {
    const auto rows = k_sweep(1.2);
    const auto jumps = detect_jumps(rows);
    REQUIRE(jumps.size() == 1);

    const auto ev =
        refine_transition(OneComponentParams{0, 1.2, 0}, {"K"}, jumps[0].x_lo, jumps[0].x_hi);
    CHECK(std::fabs(ev.location) <= 1e-8);
    CHECK(ev.m_left == doctest::Approx(-0.65856966040575405).epsilon(1e-5));
    CHECK(ev.m_right == doctest::Approx(0.65856966040575405).epsilon(1e-5));
    // no zero plateau: order parameter is nonzero away from the jump
    for (const auto& row : rows)
        if (std::fabs(row.param) > 0.05) CHECK(std::fabs(row.m_total) > 0.5);
}

TEST_CASE("biased sweeps: two separated jumps at small bias, one at large bias") {
    const auto count_jumps = [](double h) {
        SweepSpec<OneComponentParams> spec{{0.0, 0.0, h}, {"K"}, -4.0, 4.0, 801};
        return detect_jumps(sweep_1d(spec, {}, 2)).size();
    };
    CHECK(count_jumps(0.05) == 2);
    CHECK(count_jumps(0.2) == 2);
    CHECK(count_jumps(0.5) == 1);
}

TEST_CASE("detect_jumps ignores constant sweeps") {
    std::vector<SweepRow> rows(10);
    for (int i = 0; i < 10; ++i) {
        rows[i].param = i;
        rows[i].m_total = 0.42;
    }
    CHECK(detect_jumps(rows).empty());
}

TEST_CASE("m_total is locally Lipschitz away from refined jumps") {
    const auto rows = k_sweep(0.0);
    const double grid_step = 8.0 / 800;
    const double exclusion = 10.0 * grid_step;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const bool near_jump = std::fabs(std::fabs(rows[i].param) - kKc0) < exclusion ||
                               std::fabs(std::fabs(rows[i - 1].param) - kKc0) < exclusion;
        if (!near_jump) CHECK(std::fabs(rows[i].m_total - rows[i - 1].m_total) < 0.1);
    }
}

TEST_CASE("competing branches tie in free energy at refined jump locations") {
    for (double J : {0.0, 0.5}) {
        const auto rows = k_sweep(J);
        for (const auto& bracket : detect_jumps(rows)) {
            const OneComponentParams base{0, J, 0};
            const auto ev =
                refine_transition(base, {"K"}, bracket.x_lo, bracket.x_hi);
            const auto set = find_all_stationary_one({ev.location, J, 0});
            std::vector<double> phis;
            for (const auto& pt : set.points) phis.push_back(pt.phi);
            std::sort(phis.rbegin(), phis.rend());
            REQUIRE(phis.size() >= 2);
            CHECK(std::fabs(phis[0] - phis[1]) <= 1e-8);
        }
    }
}

TEST_CASE("refine_transition pins a symmetry-forced crossing at zero bias") {
    // K = 0, J = 1.2: sweeping h through 0 swaps the two tied branches
    const OneComponentParams base{0, 1.2, 0};
    const auto ev = refine_transition(base, {"h"}, -0.01, 0.01);
    CHECK(std::fabs(ev.location) <= 1e-8);
    CHECK(ev.delta > 1.0);
}

TEST_CASE("refine_transition rejects brackets without a branch change") {
    const OneComponentParams base{0, 0, 0.3};
    CHECK_THROWS_AS(refine_transition(base, {"K"}, 0.1, 0.2), solver_error);
}

TEST_CASE("refine_transition handles a branch that dies at the far bracket end") {
    // at (K=-1, J=0.5) only the zero root exists, so one-way tracking of the
    // negative branch slides onto it; the crossing must still be found
    const OneComponentParams base{0, 0.5, 0};
    const auto ev = refine_transition(base, {"K"}, -1.25, -1.0);
    CHECK(ev.location == doctest::Approx(-kKc05).epsilon(1e-8));
    CHECK(ev.m_left == doctest::Approx(-0.87627737765309756).epsilon(1e-6));
    CHECK(std::fabs(ev.m_right) < 1e-8);
}

TEST_CASE("refine_transition diagnoses brackets wider than the metastable window") {
    // at J = 0.75 the positive branch exists only for K >= ~0.676 while the
    // crossing sits at ~0.749; a bracket reaching below the spinodal cannot
    // track that branch and must fail loudly instead of returning garbage
    const OneComponentParams base{0, 0.75, 0};
    CHECK_THROWS_AS(refine_transition(base, {"K"}, 0.4, 0.9), solver_error);
}

TEST_CASE("critical_K_symmetric reference values and monotonicity") {
    const auto k0 = critical_K_symmetric(0.0);
    REQUIRE(k0.has_value());
    CHECK(k0->value == doctest::Approx(kKc0).epsilon(1e-10));
    CHECK(std::fabs(k0->value - 2.016295) < 5e-5);
    CHECK(k0->width <= 1e-6);

    const auto k25 = critical_K_symmetric(0.25);
    const auto k50 = critical_K_symmetric(0.5);
    const auto k75 = critical_K_symmetric(0.75);
    REQUIRE(k25.has_value());
    REQUIRE(k50.has_value());
    REQUIRE(k75.has_value());
    CHECK(k25->value == doctest::Approx(kKc025).epsilon(1e-10));
    CHECK(k50->value == doctest::Approx(kKc05).epsilon(1e-10));
    CHECK(k75->value == doctest::Approx(kKc075).epsilon(1e-10));
    CHECK(k0->value > k25->value);
    CHECK(k25->value > k50->value);
    CHECK(k50->value > k75->value);

    CHECK(!critical_K_symmetric(1.0).has_value());
    CHECK(!critical_K_symmetric(1.3).has_value());
}

TEST_CASE("critical_K_symmetric agrees with the general refinement machinery") {
    // independent route: sweep + branch-crossing bisection
    const auto rows = k_sweep(0.25, 1601);
    const auto jumps = detect_jumps(rows);
    REQUIRE(jumps.size() == 2);
    const auto ev = refine_transition(OneComponentParams{0, 0.25, 0}, {"K"},
                                      jumps[1].x_lo, jumps[1].x_hi);
    CHECK(ev.location == doctest::Approx(critical_K_symmetric(0.25)->value).epsilon(1e-8));
}

TEST_CASE("phase diagram: equal couplings give alpha-independent columns") {
    PhaseDiagramSpec<TwoComponentParams> spec;
    spec.base = {};  // all couplings zero; cubics supplied by the x axis
    spec.x = {{"K111", "K112", "K122", "K222"}, -3.0, 3.0, 41};
    spec.y = {{"alpha"}, 0.1, 0.9, 5};
    const auto d = phase_diagram_2d(spec, {}, 2);
    REQUIRE(d.nx == 41);
    REQUIRE(d.ny == 5);

    for (int ix = 0; ix < d.nx; ++ix)
        for (int iy = 1; iy < d.ny; ++iy)
            CHECK(std::fabs(d.at(ix, iy).m_total - d.at(ix, 0).m_total) < 1e-8);

    // every row crosses the transition near +/- K_c
    int rows_with_two = 0;
    for (int iy = 0; iy < d.ny; ++iy) {
        std::vector<double> locs;
        for (const auto& t : d.transitions)
            if (t.y == d.at(0, iy).y) locs.push_back(t.event.location);
        if (locs.size() == 2) {
            ++rows_with_two;
            std::sort(locs.begin(), locs.end());
            CHECK(locs[0] == doctest::Approx(-kKc0).epsilon(1e-7));
            CHECK(locs[1] == doctest::Approx(kKc0).epsilon(1e-7));
        }
    }
    CHECK(rows_with_two == d.ny);
}

TEST_CASE("phase diagram spin-flip symmetry") {
    TwoComponentParams base;
    base.K111 = 1.0;
    base.K222 = 0.8;
    base.J11 = 0.3;
    base.J12 = 0.1;
    base.J22 = 0.2;
    base.h1 = 0.2;
    base.h2 = -0.1;

    PhaseDiagramSpec<TwoComponentParams> a;
    a.base = base;
    a.x = {{"K112", "K122"}, 0.5, 2.5, 17};
    a.y = {{"alpha"}, 0.1, 0.9, 5};

    TwoComponentParams flipped = base;
    flipped.K111 = -base.K111;
    flipped.K222 = -base.K222;
    flipped.h1 = -base.h1;
    flipped.h2 = -base.h2;
    PhaseDiagramSpec<TwoComponentParams> b;
    b.base = flipped;
    b.x = {{"K112", "K122"}, -2.5, -0.5, 17};
    b.y = a.y;

    const auto da = phase_diagram_2d(a, {}, 2);
    const auto db = phase_diagram_2d(b, {}, 2);
    for (int iy = 0; iy < da.ny; ++iy)
        for (int ix = 0; ix < da.nx; ++ix)
            CHECK(std::fabs(da.at(ix, iy).m_total + db.at(da.nx - 1 - ix, iy).m_total) <
                  1e-8);
}

TEST_CASE("phase diagram validates axes") {
    PhaseDiagramSpec<TwoComponentParams> spec;
    spec.x = {{"alpha"}, 0, 1, 5};
    spec.y = {{"alpha"}, 0, 1, 5};
    CHECK_THROWS_AS(phase_diagram_2d(spec), std::invalid_argument);

    spec.x = {{"K112"}, 0, 1, 1024};
    spec.y = {{"alpha"}, 0, 1, 5};
    CHECK_THROWS_AS(phase_diagram_2d(spec), std::invalid_argument);

    spec.x = {{"K112"}, 0, 1, 9};
    spec.y = {{"alpha"}, 0.5, 0.5, 5};
    CHECK_THROWS_AS(phase_diagram_2d(spec), std::invalid_argument);
}

TEST_CASE("coexistence rows record the tied order-parameter values") {
    const auto rows = k_sweep(1.2);
    bool saw_tie = false;
    for (const auto& row : rows) {
        if (row.param == 0.0) {
            saw_tie = true;
            CHECK(row.coexistence);
            REQUIRE(row.tied_m_total.size() == 1);
            // primary continues the branch from the lower parameter side
            CHECK(row.m_total == doctest::Approx(-0.65856966040575405).epsilon(1e-8));
            CHECK(row.tied_m_total[0] ==
                  doctest::Approx(0.65856966040575405).epsilon(1e-8));
        } else {
            CHECK(!row.coexistence);
        }
    }
    CHECK(saw_tie);
}

TEST_CASE("sweep rows are independent of the thread count") {
    SweepSpec<OneComponentParams> spec{{0.0, 0.5, 0.1}, {"K"}, -3.0, 3.0, 101};
    const auto serial = sweep_1d(spec, {}, 1);
    const auto parallel = sweep_1d(spec, {}, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].m_total == parallel[i].m_total);
        CHECK(serial[i].phi == parallel[i].phi);
        CHECK(serial[i].n_roots == parallel[i].n_roots);
    }
}

TEST_CASE("strong cross coupling: the polarized phase is entered and left along alpha") {
    TwoComponentParams p;
    p.K111 = p.K222 = 1.0;
    p.K112 = p.K122 = 3.5;
    p.h1 = bias_from_internal_equilibrium(0.5, 1.0, 0.0);
    p.h2 = bias_from_internal_equilibrium(-0.5, 1.0, 0.0);
    SweepSpec<TwoComponentParams> spec{p, {"alpha"}, 0.0, 1.0, 101};
    const auto rows = sweep_1d(spec, {}, 2);
    const auto jumps = detect_jumps(rows);
    REQUIRE(jumps.size() == 2);
    CHECK(jumps[0].m_hi > jumps[0].m_lo + 0.5);  // up into the polarized phase
    CHECK(jumps[1].m_hi < jumps[1].m_lo - 0.1);  // back down toward the AI anchor
    CHECK(rows.front().m_total == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(rows.back().m_total == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("critical_alpha_curve finds the transition in the cross-coupled regime") {
    TwoComponentParams base;
    base.K111 = base.K222 = 1.0;
    const auto curve =
        critical_alpha_curve(base, {"K112", "K122"}, 3.0, 3.0, 1, {}, 101, 0.1, 1e-8, 2);
    REQUIRE(curve.size() == 1);
    REQUIRE(curve[0].alpha_star.has_value());
    CHECK(*curve[0].alpha_star == doctest::Approx(0.209).epsilon(5e-3));
    CHECK(curve[0].width <= 1e-8);
}

TEST_CASE("critical_alpha_curve is empty for equal couplings") {
    TwoComponentParams base;
    base.K111 = base.K112 = base.K122 = base.K222 = 2.1;
    const auto curve = critical_alpha_curve(base, {"K111", "K112", "K122", "K222"},
                                            1.5, 3.0, 4, {}, 51);
    REQUIRE(curve.size() == 4);
    for (const auto& pt : curve) CHECK(!pt.alpha_star.has_value());
}

TEST_CASE("sweep spec validation") {
    SweepSpec<OneComponentParams> bad{{0, 0, 0}, {"Q"}, 0, 1, 10};
    CHECK_THROWS_AS(sweep_1d(bad), std::invalid_argument);
    SweepSpec<OneComponentParams> rev{{0, 0, 0}, {"K"}, 1, 0, 10};
    CHECK_THROWS_AS(sweep_1d(rev), std::invalid_argument);
}
