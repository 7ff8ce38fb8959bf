#ifndef PCGP_OBJECTIVE_HPP
#define PCGP_OBJECTIVE_HPP

#include <Eigen/Core>
#include <vector>

#include "pcgp/gp.hpp"
#include "pcgp/net.hpp"

namespace pcgp {

/// Loss hyperparameters plus the grid geometry needed to reshape predicted
/// fields for the physics term.
struct ObjectiveConfig {
    double beta = 1.0;
    double gamma = 1.0;
    double sigma2 = 1e-4;
    double jitter = 1e-8;
    double kernel_l = 2.0;
    KernelForm form = KernelForm::norm;
    int grid_nx = 0;
    int grid_ny = 0;
    double grid_h = 0.0;
};

/// One training batch. Columns are records: X holds the (clean) input
/// fields, Y the target fields. `corruption` is additive noise for the
/// autoencoder pass only; leave empty for none.
struct BatchInputs {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    std::vector<int> known;
    std::vector<int> unknown;
    Eigen::MatrixXd corruption;
};

/// Value of the hybrid objective, split by term.
///   total = data_quad + n_entries * data_logdet
///         + beta * physics + gamma * recon
/// physics is the mean variational loss over the unknown half's GP
/// predictions; recon the mean squared reconstruction error over the batch.
struct ObjectiveParts {
    double data_quad = 0.0;
    double data_logdet = 0.0; ///< log det of the full-batch Gram (once)
    double physics = 0.0;
    double recon = 0.0;
    double total = 0.0;
    Eigen::MatrixXd yhat; ///< entries x |unknown| predictions (diagnostic)
};

/// Forward evaluation of the hybrid objective.
ObjectiveParts hybrid_loss(const NetworkParams& params, const BatchInputs& batch,
                           const ObjectiveConfig& cfg);

/// Forward plus reverse-mode gradients with respect to every network
/// parameter, covering the Gram/Cholesky path, the batch-split inference
/// path, the physics term and the reconstruction term. `grads` must be
/// shape-congruent with `params`; it is zeroed first.
ObjectiveParts hybrid_loss_grad(const NetworkParams& params, const BatchInputs& batch,
                                const ObjectiveConfig& cfg, GradientSet& grads);

} // namespace pcgp

#endif
