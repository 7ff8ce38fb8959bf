#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcgp/errors.hpp"
#include "pcgp/physics.hpp"
#include "pcgp/rng.hpp"

using namespace pcgp;

namespace {

ScalarField fill(int n, double (*f)(double, double)) {
    ScalarField u = ScalarField::unit_square(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) u.at(i, j) = f(u.x_of(j), u.y_of(i));
    return u;
}

ScalarField random_field(int n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    ScalarField u = ScalarField::unit_square(n);
    for (double& v : u.values) v = scale * rng.normal();
    return u;
}

ScalarField lognormal_diffusivity(int n, std::uint64_t seed) {
    ScalarField d = random_field(n, seed, 0.5);
    for (double& v : d.values) v = std::exp(v);
    return d;
}

} // namespace

TEST_CASE("sobel gradient of constant and linear fields") {
    const ScalarField c = fill(12, [](double, double) { return 3.5; });
    const GradientField gc = sobel_gradient(c);
    for (double v : gc.gx.values) CHECK(v == 0.0);
    for (double v : gc.gy.values) CHECK(v == 0.0);

    const ScalarField ux = fill(12, [](double x, double) { return x; });
    const GradientField gx = sobel_gradient(ux);
    for (double v : gx.gx.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : gx.gy.values) CHECK(std::abs(v) <= 1e-12);

    const ScalarField mix = fill(12, [](double x, double y) { return 2.0 * x - 3.0 * y + 0.25; });
    const GradientField gm = sobel_gradient(mix);
    for (double v : gm.gx.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
    for (double v : gm.gy.values) CHECK(v == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("sobel gradient of x^2 matches central differences on the interior") {
    const int n = 16;
    const ScalarField u = fill(n, [](double x, double) { return x * x; });
    const GradientField g = sobel_gradient(u);
    const double h = u.h;
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            const double central = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * h);
            CHECK(g.gx.at(i, j) == doctest::Approx(central).epsilon(1e-10));
            CHECK(g.gx.at(i, j) == doctest::Approx(2.0 * u.x_of(j)).epsilon(1e-10));
        }
}

TEST_CASE("sobel gradient is linear") {
    const ScalarField u = random_field(9, 5);
    const ScalarField v = random_field(9, 6);
    const double a = 1.7;
    ScalarField w = u;
    for (int k = 0; k < w.size(); ++k) w.values[k] = a * u.values[k] + v.values[k];
    const GradientField gw = sobel_gradient(w);
    const GradientField gu = sobel_gradient(u);
    const GradientField gv = sobel_gradient(v);
    for (int k = 0; k < w.size(); ++k) {
        CHECK(std::abs(gw.gx.values[k] - (a * gu.gx.values[k] + gv.gx.values[k])) <= 1e-12 * 100);
        CHECK(std::abs(gw.gy.values[k] - (a * gu.gy.values[k] + gv.gy.values[k])) <= 1e-12 * 100);
    }
}

TEST_CASE("sobel adjoint pairs with the forward operator") {
    const ScalarField u = random_field(8, 31);
    const ScalarField wx = random_field(8, 32);
    const ScalarField wy = random_field(8, 33);
    const GradientField g = sobel_gradient(u);
    double forward_ip = 0.0;
    for (int k = 0; k < u.size(); ++k)
        forward_ip += g.gx.values[k] * wx.values[k] + g.gy.values[k] * wy.values[k];
    const ScalarField adj = sobel_adjoint(wx, wy);
    double adjoint_ip = 0.0;
    for (int k = 0; k < u.size(); ++k) adjoint_ip += u.values[k] * adj.values[k];
    CHECK(forward_ip == doctest::Approx(adjoint_ip).epsilon(1e-12));
}

TEST_CASE("diffusion_vloss closed-form cases") {
    const int n = 16;
    const ScalarField ones = fill(n, [](double, double) { return 1.0; });
    ScalarField d = ones;
    for (double& v : d.values) v = 2.3;
    CHECK(diffusion_vloss(d, ones) == doctest::Approx(1.0).epsilon(1e-14));

    const ScalarField ramp = fill(n, [](double x, double) { return 1.0 - x; });
    const ScalarField unit_d = fill(n, [](double, double) { return 1.0; });
    CHECK(diffusion_vloss(unit_d, ramp) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("diffusion_vloss rejects bad inputs") {
    const ScalarField u = ScalarField::unit_square(5);
    ScalarField d = ScalarField::unit_square(5, 1.0);
    d.at(2, 2) = 0.0;
    CHECK_THROWS_AS(diffusion_vloss(d, u), InputError);
    const ScalarField other = ScalarField::unit_square(6, 1.0);
    CHECK_THROWS_AS(diffusion_vloss(other, u), InputError);
}

TEST_CASE("diffusion_vloss is invariant under y-reflection") {
    const int n = 10;
    const ScalarField D = lognormal_diffusivity(n, 71);
    const ScalarField u = random_field(n, 72, 0.3);
    ScalarField Dr = D, ur = u;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Dr.at(i, j) = D.at(n - 1 - i, j);
            ur.at(i, j) = u.at(n - 1 - i, j);
        }
    CHECK(diffusion_vloss(D, u) == doctest::Approx(diffusion_vloss(Dr, ur)).epsilon(1e-13));
}

TEST_CASE("diffusion_vloss gradient matches finite differences") {
    const int n = 6;
    const ScalarField D = lognormal_diffusivity(n, 81);
    ScalarField u = random_field(n, 82, 0.4);
    const ScalarField grad = diffusion_vloss_grad_u(D, u);
    const double h = 1e-6;
    for (int k = 0; k < u.size(); k += 3) {
        const double keep = u.values[k];
        u.values[k] = keep + h;
        const double up = diffusion_vloss(D, u);
        u.values[k] = keep - h;
        const double dn = diffusion_vloss(D, u);
        u.values[k] = keep;
        const double fd = (up - dn) / (2.0 * h);
        CHECK(grad.values[k] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("poisson_vloss closed-form cases") {
    const ScalarField zero = ScalarField::unit_square(8);
    const ScalarField g = random_field(8, 91);
    CHECK(poisson_vloss(zero, g) == 0.0);

    const ScalarField c = ScalarField::unit_square(8, 4.2);
    const ScalarField g0 = ScalarField::unit_square(8);
    CHECK(poisson_vloss(c, g0) == 0.0);
}

TEST_CASE("poisson_vloss approximates the continuous functional") {
    // u = sin(pi x) sin(pi y), g = 2 pi^2 u: value -pi^2/4 in the continuum.
    const int n = 64;
    ScalarField u = ScalarField::unit_square(n);
    ScalarField g = ScalarField::unit_square(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = std::sin(M_PI * u.x_of(j)) * std::sin(M_PI * u.y_of(i));
            u.at(i, j) = s;
            g.at(i, j) = 2.0 * M_PI * M_PI * s;
        }

    // Simpson quadrature of the exact integrand on a fine grid.
    const int q = 201;
    const double hq = 1.0 / (q - 1);
    auto simpson_w = [&](int k) {
        if (k == 0 || k == q - 1) return 1.0;
        return (k % 2 == 1) ? 4.0 : 2.0;
    };
    double quad = 0.0;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            const double x = j * hq, y = i * hq;
            const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
            const double cx = std::cos(M_PI * x), cy = std::cos(M_PI * y);
            const double gx = M_PI * cx * sy, gy = M_PI * sx * cy;
            const double val = 0.5 * (gx * gx + gy * gy) - (sx * sy) * (2.0 * M_PI * M_PI * sx * sy);
            quad += simpson_w(i) * simpson_w(j) * val;
        }
    quad *= hq * hq / 9.0;
    CHECK(quad == doctest::Approx(-M_PI * M_PI / 4.0).epsilon(1e-6));
    CHECK(poisson_vloss(u, g) == doctest::Approx(quad).epsilon(0.05));
}

TEST_CASE("solve_diffusion is exact for constant diffusivity") {
    const ScalarField D = ScalarField::unit_square(16, 1.0);
    const ScalarField u = solve_diffusion(D);
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nx; ++j)
            CHECK(std::abs(u.at(i, j) - (1.0 - u.x_of(j))) < 1e-8);
}

TEST_CASE("solve_diffusion inherits y-reflection symmetry") {
    const int n = 12;
    ScalarField D = lognormal_diffusivity(n, 101);
    for (int i = 0; i < n / 2; ++i)
        for (int j = 0; j < n; ++j) D.at(n - 1 - i, j) = D.at(i, j);
    const ScalarField u = solve_diffusion(D);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(u.at(i, j) - u.at(n - 1 - i, j)) <= 1e-10);
}

TEST_CASE("solve_diffusion residual, maximum principle, energy minimality") {
    for (std::uint64_t seed : {201ull, 202ull, 203ull}) {
        const ScalarField D = lognormal_diffusivity(14, seed);
        const ScalarField u = solve_diffusion(D);
        CHECK(diffusion_residual(D, u) < 1e-10);
        for (double v : u.values) {
            CHECK(v >= -1e-10);
            CHECK(v <= 1.0 + 1e-10);
        }
        const double base = diffusion_vloss(D, u);
        Rng rng(seed + 999);
        for (int t = 0; t < 20; ++t) {
            ScalarField pert = u;
            for (double& v : pert.values) v += 0.05 * rng.normal();
            CHECK(diffusion_vloss(D, pert) >= base);
        }
    }
}

TEST_CASE("solver output beats noisy copies on the variational loss") {
    int wins = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const ScalarField D = lognormal_diffusivity(16, 300 + static_cast<std::uint64_t>(t));
        const ScalarField u = solve_diffusion(D);
        ScalarField noisy = u;
        Rng rng(900 + static_cast<std::uint64_t>(t));
        for (double& v : noisy.values) v += 0.05 * rng.normal();
        if (diffusion_vloss(D, u) < diffusion_vloss(D, noisy)) ++wins;
    }
    CHECK(wins >= 19);
}
