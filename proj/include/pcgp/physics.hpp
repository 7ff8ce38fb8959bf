#ifndef PCGP_PHYSICS_HPP
#define PCGP_PHYSICS_HPP

#include "pcgp/field.hpp"

namespace pcgp {

/// Numerical gradient of a grid field. Interior points use the 3x3 Sobel
/// stencils scaled by 1/(8h); points on the grid edge fall back to
/// first-order one-sided differences along the edge-normal direction and
/// plain central differences tangentially. Exact for globally linear
/// fields, boundaries included.
GradientField sobel_gradient(const ScalarField& u);

/// Adjoint of sobel_gradient as a linear operator: returns G_x^T wx + G_y^T wy.
/// Satisfies <grad(u), (wx,wy)> == <u, adjoint(wx,wy)> to rounding.
ScalarField sobel_adjoint(const ScalarField& wx, const ScalarField& wy);

/// Discrete variational energy of the diffusion problem with Dirichlet
/// penalties: mean over nodes of 0.5*D*|grad u|^2, plus mean over rows of
/// (u(i,0)-1)^2 and of u(i,nx-1)^2.
double diffusion_vloss(const ScalarField& D, const ScalarField& u);

/// d(diffusion_vloss)/du as a field, using the Sobel adjoint.
ScalarField diffusion_vloss_grad_u(const ScalarField& D, const ScalarField& u);

/// Variational Poisson energy: mean over nodes of 0.5*|grad u|^2 - u*g.
/// No boundary penalty terms; callers add their own if needed.
double poisson_vloss(const ScalarField& u, const ScalarField& g);

/// Steady diffusion solve div(D grad u) = 0 on the unit square with
/// u=1 at x=0, u=0 at x=1 and zero flux at y=0, y=1. Conservative
/// five-point finite volumes with harmonic-mean face diffusivities and a
/// direct sparse factorization. Exact for D == const (u = 1-x).
ScalarField solve_diffusion(const ScalarField& D);

/// Max relative flux imbalance of u under the discrete operator used by
/// solve_diffusion; a residual oracle for generated data.
double diffusion_residual(const ScalarField& D, const ScalarField& u);

} // namespace pcgp

#endif
