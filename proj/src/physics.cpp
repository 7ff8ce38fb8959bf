#include "pcgp/physics.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "pcgp/errors.hpp"

namespace pcgp {

namespace {

// Enumerates the stencil of gx(i,j) (and, via transposed roles, gy) as
// (i2, j2, coef) triples. Forward and adjoint share this enumeration so the
// adjoint is exact by construction.
template <typename Fn>
void gx_stencil(const ScalarField& u, int i, int j, Fn&& add) {
    const int nx = u.nx, ny = u.ny;
    const double h = u.h;
    if (j == 0) {
        add(i, 1, 1.0 / h);
        add(i, 0, -1.0 / h);
    } else if (j == nx - 1) {
        add(i, nx - 1, 1.0 / h);
        add(i, nx - 2, -1.0 / h);
    } else if (i == 0 || i == ny - 1) {
        add(i, j + 1, 0.5 / h);
        add(i, j - 1, -0.5 / h);
    } else {
        const double s = 1.0 / (8.0 * h);
        for (int di = -1; di <= 1; ++di) {
            const double w = (di == 0) ? 2.0 : 1.0;
            add(i + di, j + 1, w * s);
            add(i + di, j - 1, -w * s);
        }
    }
}

template <typename Fn>
void gy_stencil(const ScalarField& u, int i, int j, Fn&& add) {
    const int nx = u.nx, ny = u.ny;
    const double h = u.h;
    if (i == 0) {
        add(1, j, 1.0 / h);
        add(0, j, -1.0 / h);
    } else if (i == ny - 1) {
        add(ny - 1, j, 1.0 / h);
        add(ny - 2, j, -1.0 / h);
    } else if (j == 0 || j == nx - 1) {
        add(i + 1, j, 0.5 / h);
        add(i - 1, j, -0.5 / h);
    } else {
        const double s = 1.0 / (8.0 * h);
        for (int dj = -1; dj <= 1; ++dj) {
            const double w = (dj == 0) ? 2.0 : 1.0;
            add(i + 1, j + dj, w * s);
            add(i - 1, j + dj, -w * s);
        }
    }
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* who) {
    if (!a.same_shape(b))
        throw InputError(std::string(who) + ": field shapes differ");
}

} // namespace

GradientField sobel_gradient(const ScalarField& u) {
    u.check_shape();
    GradientField g{ScalarField(u.nx, u.ny, u.h), ScalarField(u.nx, u.ny, u.h)};
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nx; ++j) {
            double sx = 0.0, sy = 0.0;
            gx_stencil(u, i, j, [&](int i2, int j2, double c) { sx += c * u.at(i2, j2); });
            gy_stencil(u, i, j, [&](int i2, int j2, double c) { sy += c * u.at(i2, j2); });
            g.gx.at(i, j) = sx;
            g.gy.at(i, j) = sy;
        }
    return g;
}

ScalarField sobel_adjoint(const ScalarField& wx, const ScalarField& wy) {
    require_same_shape(wx, wy, "sobel_adjoint");
    ScalarField out(wx.nx, wx.ny, wx.h);
    for (int i = 0; i < wx.ny; ++i)
        for (int j = 0; j < wx.nx; ++j) {
            const double ax = wx.at(i, j);
            const double ay = wy.at(i, j);
            gx_stencil(wx, i, j, [&](int i2, int j2, double c) { out.at(i2, j2) += c * ax; });
            gy_stencil(wy, i, j, [&](int i2, int j2, double c) { out.at(i2, j2) += c * ay; });
        }
    return out;
}

double diffusion_vloss(const ScalarField& D, const ScalarField& u) {
    require_same_shape(D, u, "diffusion_vloss");
    for (double d : D.values)
        if (!(d > 0.0)) throw InputError("diffusion_vloss: D must be positive");

    const GradientField g = sobel_gradient(u);
    double energy = 0.0;
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nx; ++j) {
            const double gx = g.gx.at(i, j), gy = g.gy.at(i, j);
            energy += 0.5 * D.at(i, j) * (gx * gx + gy * gy);
        }
    energy /= static_cast<double>(u.nx) * u.ny;

    double left = 0.0, right = 0.0;
    for (int i = 0; i < u.ny; ++i) {
        const double dl = u.at(i, 0) - 1.0;
        const double dr = u.at(i, u.nx - 1);
        left += dl * dl;
        right += dr * dr;
    }
    return energy + (left + right) / u.ny;
}

ScalarField diffusion_vloss_grad_u(const ScalarField& D, const ScalarField& u) {
    require_same_shape(D, u, "diffusion_vloss_grad_u");
    const GradientField g = sobel_gradient(u);
    const double inv_nodes = 1.0 / (static_cast<double>(u.nx) * u.ny);
    ScalarField wx(u.nx, u.ny, u.h), wy(u.nx, u.ny, u.h);
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nx; ++j) {
            wx.at(i, j) = inv_nodes * D.at(i, j) * g.gx.at(i, j);
            wy.at(i, j) = inv_nodes * D.at(i, j) * g.gy.at(i, j);
        }
    ScalarField grad = sobel_adjoint(wx, wy);
    for (int i = 0; i < u.ny; ++i) {
        grad.at(i, 0) += 2.0 * (u.at(i, 0) - 1.0) / u.ny;
        grad.at(i, u.nx - 1) += 2.0 * u.at(i, u.nx - 1) / u.ny;
    }
    return grad;
}

double poisson_vloss(const ScalarField& u, const ScalarField& g) {
    require_same_shape(u, g, "poisson_vloss");
    const GradientField grad = sobel_gradient(u);
    double acc = 0.0;
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nx; ++j) {
            const double gx = grad.gx.at(i, j), gy = grad.gy.at(i, j);
            acc += 0.5 * (gx * gx + gy * gy) - u.at(i, j) * g.at(i, j);
        }
    return acc / (static_cast<double>(u.nx) * u.ny);
}

ScalarField solve_diffusion(const ScalarField& D) {
    D.check_shape();
    D.check_finite("solve_diffusion: D");
    for (double d : D.values)
        if (!(d > 0.0)) throw InputError("solve_diffusion: D must be positive");

    const int nx = D.nx, ny = D.ny;
    const int ncols = nx - 2; // unknown columns j = 1..nx-2
    const int n = ncols * ny;
    auto idx = [&](int i, int j) { return i * ncols + (j - 1); };

    // Face conductances: harmonic-mean diffusivity, halved for the east/west
    // faces of half-height cells in the Neumann boundary rows.
    auto t_horiz = [&](int i, int jl) {
        const double w = (i == 0 || i == ny - 1) ? 0.5 : 1.0;
        return w * harmonic(D.at(i, jl), D.at(i, jl + 1));
    };
    auto t_vert = [&](int il, int j) { return harmonic(D.at(il, j), D.at(il + 1, j)); };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    for (int i = 0; i < ny; ++i)
        for (int j = 1; j <= nx - 2; ++j) {
            const int row = idx(i, j);
            double diag = 0.0;
            // west
            {
                const double t = t_horiz(i, j - 1);
                diag += t;
                if (j - 1 == 0)
                    rhs[row] += t * 1.0;
                else
                    trip.emplace_back(row, idx(i, j - 1), -t);
            }
            // east
            {
                const double t = t_horiz(i, j);
                diag += t;
                if (j + 1 == nx - 1)
                    rhs[row] += t * 0.0;
                else
                    trip.emplace_back(row, idx(i, j + 1), -t);
            }
            // south (zero-flux face when i == 0)
            if (i > 0) {
                const double t = t_vert(i - 1, j);
                diag += t;
                trip.emplace_back(row, idx(i - 1, j), -t);
            }
            // north
            if (i < ny - 1) {
                const double t = t_vert(i, j);
                diag += t;
                trip.emplace_back(row, idx(i + 1, j), -t);
            }
            trip.emplace_back(row, row, diag);
        }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
        throw NumericalError("solve_diffusion: factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
        throw NumericalError("solve_diffusion: solve failed");

    ScalarField u(nx, ny, D.h);
    for (int i = 0; i < ny; ++i) {
        u.at(i, 0) = 1.0;
        u.at(i, nx - 1) = 0.0;
        for (int j = 1; j <= nx - 2; ++j) u.at(i, j) = x[idx(i, j)];
    }
    return u;
}

double diffusion_residual(const ScalarField& D, const ScalarField& u) {
    require_same_shape(D, u, "diffusion_residual");
    const int nx = D.nx, ny = D.ny;
    auto t_horiz = [&](int i, int jl) {
        const double w = (i == 0 || i == ny - 1) ? 0.5 : 1.0;
        return w * harmonic(D.at(i, jl), D.at(i, jl + 1));
    };
    auto t_vert = [&](int il, int j) { return harmonic(D.at(il, j), D.at(il + 1, j)); };

    double umax = 1.0;
    for (double v : u.values) umax = std::max(umax, std::abs(v));

    double worst = 0.0;
    for (int i = 0; i < ny; ++i)
        for (int j = 1; j <= nx - 2; ++j) {
            double flux = 0.0, tsum = 0.0;
            const double uc = u.at(i, j);
            auto face = [&](double t, double un) {
                flux += t * (un - uc);
                tsum += t;
            };
            face(t_horiz(i, j - 1), u.at(i, j - 1));
            face(t_horiz(i, j), u.at(i, j + 1));
            if (i > 0) face(t_vert(i - 1, j), u.at(i - 1, j));
            if (i < ny - 1) face(t_vert(i, j), u.at(i + 1, j));
            worst = std::max(worst, std::abs(flux) / (tsum * umax));
        }
    return worst;
}

} // namespace pcgp
