#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "cubicmf/model.hpp"
#include "oracles.hpp"

using namespace cubicmf;

TEST_CASE("entropy_term reference values") {
    CHECK(entropy_term(0.0) == doctest::Approx(-std::numbers::ln2).epsilon(1e-14));
    CHECK(entropy_term(1.0) == 0.0);
    CHECK(entropy_term(-1.0) == 0.0);
    // frozen from an extended-precision evaluation of the defining formula
    CHECK(entropy_term(0.5) == doctest::Approx(-0.56233514461880835).epsilon(1e-14));
    CHECK_THROWS_AS(entropy_term(1.0000001), std::domain_error);
    CHECK_THROWS_AS(entropy_term(-1.5), std::domain_error);
}

TEST_CASE("entropy_term is even and ranges over [-log2, 0]") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double m = oracle::uniform(rng, -1.0, 1.0);
        CHECK(entropy_term(m) == doctest::Approx(entropy_term(-m)).epsilon(1e-15));
        CHECK(entropy_term(m) <= 0.0);
        CHECK(entropy_term(m) >= -std::numbers::ln2 - 1e-15);
    }
}

TEST_CASE("energy_one reference values") {
    CHECK(energy_one({3.0, 2.0, 1.0}, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(energy_one({-2.3, 0.7, 4.1}, 0.0) == 0.0);
    CHECK(energy_one({2.016295, 0.0, 0.0}, 0.5) ==
          doctest::Approx(0.084012291666666667).epsilon(1e-14));
}

TEST_CASE("phi_one reference values and positive branch above log 2") {
    CHECK(phi_one({0, 0, 0}, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    CHECK(phi_one({0, 0, 0}, 1.0) == 0.0);

    // above K_c the positive branch dominates; locate it by grid scan
    const auto [m_star, phi_star] = oracle::grid_max_phi1(2.1, 0.0, 0.0);
    CHECK(phi_star > std::numbers::ln2);
    CHECK(phi_one({2.1, 0, 0}, m_star) == doctest::Approx(phi_star).epsilon(1e-12));
}

TEST_CASE("spin-flip symmetry of phi_one") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 500; ++i) {
        const OneComponentParams p{oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3),
                                   oracle::uniform(rng, -2, 2)};
        const OneComponentParams q{-p.K, p.J, -p.h};
        const double m = oracle::uniform(rng, -1.0, 1.0);
        CHECK(phi_one(p, m) == doctest::Approx(phi_one(q, -m)).epsilon(1e-13));
    }
}

TEST_CASE("grad_phi_one reference values") {
    CHECK(grad_phi_one({0, 0, 0}, 0.0) == 0.0);
    CHECK(std::fabs(grad_phi_one({0, 0, 0.5}, std::tanh(0.5))) < 1e-14);
    CHECK_THROWS_AS(grad_phi_one({0, 0, 0}, 1.0), std::domain_error);
}

TEST_CASE("grad_phi_one matches central finite differences") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const OneComponentParams p{oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3),
                                   oracle::uniform(rng, -2, 2)};
        const double m = oracle::uniform(rng, -0.99, 0.99);
        const double fd =
            oracle::central_diff([&](double x) { return phi_one(p, x); }, m);
        CHECK(oracle::close_rel(grad_phi_one(p, m), fd, 1e-6));
    }
}

TEST_CASE("second_deriv_phi_one reference values and finite differences") {
    CHECK(second_deriv_phi_one({0, 0, 0}, 0.0) == doctest::Approx(-1.0));
    CHECK(second_deriv_phi_one({0, 1.2, 0}, 0.0) == doctest::Approx(0.2).epsilon(1e-13));

    std::mt19937_64 rng(14);
    for (int i = 0; i < 1000; ++i) {
        const OneComponentParams p{oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3),
                                   oracle::uniform(rng, -2, 2)};
        const double m = oracle::uniform(rng, -0.99, 0.99);
        const double fd =
            oracle::central_diff([&](double x) { return grad_phi_one(p, x); }, m);
        CHECK(oracle::close_rel(second_deriv_phi_one(p, m), fd, 1e-6));
    }
}

TEST_CASE("energy_two reference values") {
    TwoComponentParams p;
    p.alpha = 0.37;
    CHECK(energy_two(p, {0.0, 0.0}) == 0.0);

    // equal couplings at m1 = m2 = 1 collapse to the one-component value
    TwoComponentParams eq;
    eq.K111 = eq.K112 = eq.K122 = eq.K222 = 3.0;
    eq.J11 = eq.J12 = eq.J22 = 2.0;
    eq.h1 = eq.h2 = 1.0;
    eq.alpha = 0.5;
    CHECK(energy_two(eq, {1.0, 1.0}) == doctest::Approx(3.0).epsilon(1e-14));

    TwoComponentParams k111;
    k111.K111 = 1.0;
    k111.alpha = 0.5;
    CHECK(energy_two(k111, {1.0, -0.3}) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("phi_two reference values and alpha=0 reduction") {
    TwoComponentParams zero;
    zero.alpha = 0.5;
    CHECK(phi_two(zero, {0.0, 0.0}) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));

    std::mt19937_64 rng(15);
    for (int i = 0; i < 200; ++i) {
        TwoComponentParams p;
        p.K111 = oracle::uniform(rng, -2, 2);
        p.K112 = oracle::uniform(rng, -2, 2);
        p.K122 = oracle::uniform(rng, -2, 2);
        p.K222 = oracle::uniform(rng, -2, 2);
        p.J11 = oracle::uniform(rng, -2, 2);
        p.J12 = oracle::uniform(rng, -2, 2);
        p.J22 = oracle::uniform(rng, -2, 2);
        p.h1 = oracle::uniform(rng, -1, 1);
        p.h2 = oracle::uniform(rng, -1, 1);
        p.alpha = 0.0;
        const double m1 = oracle::uniform(rng, -1, 1);
        const double m2 = oracle::uniform(rng, -1, 1);
        // with alpha = 0 every component-1 term carries weight zero
        CHECK(phi_two(p, {m1, m2}) ==
              doctest::Approx(phi_one({p.K222, p.J22, p.h2}, m2)).epsilon(1e-13));
    }
}

TEST_CASE("phi_two collapses onto phi_one for equal couplings") {
    std::mt19937_64 rng(16);
    for (int i = 0; i < 500; ++i) {
        const double K = oracle::uniform(rng, -3, 3);
        const double J = oracle::uniform(rng, -3, 3);
        const double h = oracle::uniform(rng, -2, 2);
        TwoComponentParams p;
        p.K111 = p.K112 = p.K122 = p.K222 = K;
        p.J11 = p.J12 = p.J22 = J;
        p.h1 = p.h2 = h;
        p.alpha = oracle::uniform(rng, 0, 1);
        const double m = oracle::uniform(rng, -1, 1);
        CHECK(std::fabs(phi_two(p, {m, m}) - phi_one({K, J, h}, m)) < 1e-12);
    }
}

namespace {

cubicmf::TwoComponentParams random_two(std::mt19937_64& rng) {
    TwoComponentParams p;
    p.K111 = oracle::uniform(rng, -3, 3);
    p.K112 = oracle::uniform(rng, -3, 3);
    p.K122 = oracle::uniform(rng, -3, 3);
    p.K222 = oracle::uniform(rng, -3, 3);
    p.J11 = oracle::uniform(rng, -3, 3);
    p.J12 = oracle::uniform(rng, -3, 3);
    p.J22 = oracle::uniform(rng, -3, 3);
    p.h1 = oracle::uniform(rng, -2, 2);
    p.h2 = oracle::uniform(rng, -2, 2);
    p.alpha = oracle::uniform(rng, 0, 1);
    return p;
}

}  // namespace

TEST_CASE("grad_phi_two reference values") {
    TwoComponentParams zero;
    zero.alpha = 0.5;
    const auto g = grad_phi_two(zero, {0.0, 0.0});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);

    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        TwoComponentParams p = random_two(rng);
        p.alpha = 1.0;
        const auto grad = grad_phi_two(p, {oracle::uniform(rng, -0.9, 0.9),
                                           oracle::uniform(rng, -0.9, 0.9)});
        CHECK(grad[1] == 0.0);  // alpha2 = 0 prefactor
    }
}

TEST_CASE("grad_phi_two matches central finite differences") {
    std::mt19937_64 rng(18);
    for (int i = 0; i < 1000; ++i) {
        const TwoComponentParams p = random_two(rng);
        const double m1 = oracle::uniform(rng, -0.99, 0.99);
        const double m2 = oracle::uniform(rng, -0.99, 0.99);
        const auto g = grad_phi_two(p, {m1, m2});
        const double fd1 = oracle::central_diff(
            [&](double x) { return phi_two(p, {x, m2}); }, m1);
        const double fd2 = oracle::central_diff(
            [&](double x) { return phi_two(p, {m1, x}); }, m2);
        CHECK(oracle::close_rel(g[0], fd1, 1e-6));
        CHECK(oracle::close_rel(g[1], fd2, 1e-6));
    }
}

TEST_CASE("hessian_phi_two reference value and finite differences") {
    TwoComponentParams zero;
    zero.alpha = 0.5;
    const auto H = hessian_phi_two(zero, {0.0, 0.0});
    CHECK(H.m11 == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(H.m22 == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(H.m12 == 0.0);

    std::mt19937_64 rng(19);
    for (int i = 0; i < 1000; ++i) {
        const TwoComponentParams p = random_two(rng);
        const double m1 = oracle::uniform(rng, -0.99, 0.99);
        const double m2 = oracle::uniform(rng, -0.99, 0.99);
        const auto h = hessian_phi_two(p, {m1, m2});
        const double fd11 = oracle::central_diff(
            [&](double x) { return grad_phi_two(p, {x, m2})[0]; }, m1);
        const double fd12 = oracle::central_diff(
            [&](double x) { return grad_phi_two(p, {m1, x})[0]; }, m2);
        const double fd21 = oracle::central_diff(
            [&](double x) { return grad_phi_two(p, {x, m2})[1]; }, m1);
        const double fd22 = oracle::central_diff(
            [&](double x) { return grad_phi_two(p, {m1, x})[1]; }, m2);
        CHECK(oracle::close_rel(h.m11, fd11, 1e-5));
        CHECK(oracle::close_rel(h.m12, fd12, 1e-5));
        CHECK(oracle::close_rel(h.m12, fd21, 1e-5));  // mixed partials agree
        CHECK(oracle::close_rel(h.m22, fd22, 1e-5));
    }
}

TEST_CASE("bias_from_internal_equilibrium reference values") {
    CHECK(bias_from_internal_equilibrium(0.0, 1.7, -0.4) == 0.0);
    CHECK(bias_from_internal_equilibrium(0.5, 0.0, 0.0) ==
          doctest::Approx(0.54930614433405485).epsilon(1e-14));
    CHECK(bias_from_internal_equilibrium(0.5, 1.0, 1.0) ==
          doctest::Approx(-0.20069385566594515).epsilon(1e-13));
    CHECK_THROWS_AS(bias_from_internal_equilibrium(1.0, 0, 0), std::domain_error);
}

TEST_CASE("bias from internal equilibrium pins the fixed point") {
    std::mt19937_64 rng(20);
    for (int i = 0; i < 500; ++i) {
        const double m_star = oracle::uniform(rng, -0.95, 0.95);
        const double K = oracle::uniform(rng, -3, 3);
        const double J = oracle::uniform(rng, -3, 3);
        const double h = bias_from_internal_equilibrium(m_star, K, J);
        const double res = m_star - std::tanh(K * m_star * m_star + J * m_star + h);
        CHECK(std::fabs(res) < 1e-12);
    }
}

TEST_CASE("total_magnetization") {
    CHECK(total_magnetization(0.5, {1.0, -1.0}) == 0.0);
    CHECK(total_magnetization(0.0, {0.9, 0.2}) == doctest::Approx(0.2));
    CHECK(total_magnetization(0.25, {0.8, -0.4}) == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK_THROWS_AS(total_magnetization(1.5, {0, 0}), std::domain_error);
}

TEST_CASE("parameter validation and named field access") {
    OneComponentParams bad{std::nan(""), 0, 0};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    TwoComponentParams bad2;
    bad2.alpha = 1.5;
    CHECK_THROWS_AS(validate(bad2), std::invalid_argument);

    OneComponentParams p;
    CHECK(param_ref(p, "K") == &p.K);
    CHECK(param_ref(p, "nope") == nullptr);
    TwoComponentParams q;
    CHECK(param_ref(q, "K112") == &q.K112);
    CHECK(param_ref(q, "alpha") == &q.alpha);
    CHECK(param_ref(q, "K") == nullptr);
}
