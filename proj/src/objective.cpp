#include "pcgp/objective.hpp"

#include <cmath>
#include <string>

#include "pcgp/errors.hpp"
#include "pcgp/physics.hpp"

namespace pcgp {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* stage) {
    if (!M.allFinite())
        throw NumericalError(std::string("hybrid loss: non-finite values in ") + stage);
}

void validate(const NetworkParams& params, const BatchInputs& batch,
              const ObjectiveConfig& cfg) {
    const int s = static_cast<int>(batch.X.cols());
    if (s < 2) throw InputError("hybrid loss: batch needs at least 2 records");
    if (batch.Y.cols() != s) throw InputError("hybrid loss: X/Y record counts differ");
    if (batch.X.rows() != params.input_dim())
        throw InputError("hybrid loss: input dim does not match network");
    if (batch.Y.rows() != static_cast<Eigen::Index>(cfg.grid_nx) * cfg.grid_ny)
        throw InputError("hybrid loss: Y entries do not match grid");
    if (batch.corruption.size() != 0 &&
        (batch.corruption.rows() != batch.X.rows() || batch.corruption.cols() != s))
        throw InputError("hybrid loss: corruption shape mismatch");

    std::vector<char> seen(static_cast<std::size_t>(s), 0);
    for (int i : batch.known) {
        if (i < 0 || i >= s || seen[i]) throw InputError("hybrid loss: bad known index set");
        seen[i] = 1;
    }
    for (int i : batch.unknown) {
        if (i < 0 || i >= s || seen[i]) throw InputError("hybrid loss: bad unknown index set");
        seen[i] = 1;
    }
    for (char c : seen)
        if (!c) throw InputError("hybrid loss: known/unknown do not cover the batch");
    if (cfg.beta > 0.0 && (batch.known.empty() || batch.unknown.empty()))
        throw InputError("hybrid loss: physics term needs a nonempty split");
}

// d(loss)/dZ contribution of a kernel matrix whose (i,j) entry was built from
// feature columns (cols_a[i], cols_b[j]) of Z. `upstream` holds dloss/dK
// entrywise. Symmetric matrices pass the same index set twice; every entry
// was produced by its own kernel evaluation, so gradients flow entrywise.
void kernel_backward(const Eigen::MatrixXd& K, const Eigen::MatrixXd& upstream,
                     const Eigen::MatrixXd& Z, const std::vector<int>& cols_a,
                     const std::vector<int>& cols_b, double l, KernelForm form,
                     Eigen::MatrixXd& dZ) {
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            const int ca = cols_a[static_cast<std::size_t>(i)];
            const int cb = cols_b[static_cast<std::size_t>(j)];
            if (ca == cb) continue; // constant unit diagonal
            const double g = upstream(i, j);
            if (g == 0.0) continue;
            const Eigen::VectorXd d = Z.col(ca) - Z.col(cb);
            double coef;
            if (form == KernelForm::norm) {
                const double r = d.norm();
                if (r <= 0.0) continue; // kink of the distance kernel
                coef = -g * K(i, j) / (l * r);
            } else {
                coef = -2.0 * g * K(i, j) / l;
            }
            dZ.col(ca) += coef * d;
            dZ.col(cb) -= coef * d;
        }
}

ScalarField column_as_field(const Eigen::MatrixXd& M, int col, int nx, int ny, double h) {
    ScalarField f(nx, ny, h);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), f.size()) = M.col(col);
    return f;
}

ScalarField row_as_field(const Eigen::MatrixXd& M, int row, int nx, int ny, double h) {
    ScalarField f(nx, ny, h);
    Eigen::Map<Eigen::RowVectorXd>(f.values.data(), f.size()) = M.row(row);
    return f;
}

struct Workings {
    ForwardCache enc_cache;
    Eigen::MatrixXd Z;       // latent x s, clean encodings
    GramWorkspace ws_full;   // Gram over the whole batch
    Eigen::MatrixXd alpha;   // s x entries, (K+c I)^-1 Y^T
    GramWorkspace ws_known;  // Gram over the known half
    Eigen::MatrixXd W;       // nk x entries, known-half solves
    Eigen::MatrixXd C;       // nuk x nk cross-kernel
    Eigen::MatrixXd yhat_t;  // nuk x entries predictions
    ForwardCache dae_cache;
    Eigen::MatrixXd recon;   // output of the autoencoder pass
};

ObjectiveParts forward_pass(const NetworkParams& params, const BatchInputs& batch,
                            const ObjectiveConfig& cfg, Workings* wk, bool keep_caches) {
    validate(params, batch, cfg);
    ObjectiveParts parts;
    const int s = static_cast<int>(batch.X.cols());
    const int n_entries = static_cast<int>(batch.Y.rows());

    wk->Z = forward_range(params, 0, params.encoder_end, batch.X,
                          keep_caches ? &wk->enc_cache : nullptr);
    require_finite(wk->Z, "encoder output");

    wk->ws_full = gram_matrix(wk->Z, cfg.kernel_l, cfg.sigma2, cfg.jitter, cfg.form);
    wk->alpha = wk->ws_full.solve(batch.Y.transpose());
    require_finite(wk->alpha, "Gram solve");
    parts.data_quad = (batch.Y.transpose().cwiseProduct(wk->alpha)).sum();
    parts.data_logdet = wk->ws_full.log_det();

    if (cfg.beta > 0.0) {
        const int nk = static_cast<int>(batch.known.size());
        const int nuk = static_cast<int>(batch.unknown.size());
        Eigen::MatrixXd Zk(wk->Z.rows(), nk), Zuk(wk->Z.rows(), nuk);
        Eigen::MatrixXd Yk(n_entries, nk);
        for (int a = 0; a < nk; ++a) {
            Zk.col(a) = wk->Z.col(batch.known[a]);
            Yk.col(a) = batch.Y.col(batch.known[a]);
        }
        for (int a = 0; a < nuk; ++a) Zuk.col(a) = wk->Z.col(batch.unknown[a]);

        wk->ws_known = gram_matrix(Zk, cfg.kernel_l, cfg.sigma2, cfg.jitter, cfg.form);
        wk->W = wk->ws_known.solve(Yk.transpose());
        wk->C = kernel_cross(Zuk, Zk, cfg.kernel_l, cfg.form);
        wk->yhat_t = wk->C * wk->W;
        require_finite(wk->yhat_t, "batch-split inference");

        double acc = 0.0;
        for (int a = 0; a < nuk; ++a) {
            const ScalarField D =
                column_as_field(batch.X, batch.unknown[a], cfg.grid_nx, cfg.grid_ny, cfg.grid_h);
            const ScalarField u =
                row_as_field(wk->yhat_t, a, cfg.grid_nx, cfg.grid_ny, cfg.grid_h);
            acc += diffusion_vloss(D, u);
        }
        parts.physics = acc / nuk;
        parts.yhat = wk->yhat_t.transpose();
    }

    if (cfg.gamma > 0.0) {
        const Eigen::MatrixXd dae_in =
            (batch.corruption.size() != 0) ? (batch.X + batch.corruption).eval() : batch.X;
        wk->recon = forward_range(params, 0, params.layer_count(), dae_in,
                                  keep_caches ? &wk->dae_cache : nullptr);
        require_finite(wk->recon, "autoencoder output");
        parts.recon = (wk->recon - batch.X).squaredNorm() / s;
    }

    parts.total = parts.data_quad + n_entries * parts.data_logdet +
                  cfg.beta * parts.physics + cfg.gamma * parts.recon;
    if (!std::isfinite(parts.total))
        throw NumericalError("hybrid loss: non-finite total");
    return parts;
}

} // namespace

ObjectiveParts hybrid_loss(const NetworkParams& params, const BatchInputs& batch,
                           const ObjectiveConfig& cfg) {
    Workings wk;
    return forward_pass(params, batch, cfg, &wk, false);
}

ObjectiveParts hybrid_loss_grad(const NetworkParams& params, const BatchInputs& batch,
                                const ObjectiveConfig& cfg, GradientSet& grads) {
    Workings wk;
    const ObjectiveParts parts = forward_pass(params, batch, cfg, &wk, true);
    grads.setZero();

    const int s = static_cast<int>(batch.X.cols());
    const int n_entries = static_cast<int>(batch.Y.rows());
    Eigen::MatrixXd dZ = Eigen::MatrixXd::Zero(wk.Z.rows(), s);
    std::vector<int> all(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) all[static_cast<std::size_t>(i)] = i;

    // Data term: d(quad_i)/dA = -alpha_i alpha_i^T, d(logdet)/dA = A^-1.
    {
        Eigen::MatrixXd G = static_cast<double>(n_entries) * wk.ws_full.inverse();
        G.noalias() -= wk.alpha * wk.alpha.transpose();
        kernel_backward(wk.ws_full.K, G, wk.Z, all, all, cfg.kernel_l, cfg.form, dZ);
    }

    // Physics term through yhat = C * (A_k^-1 Yk^T).
    if (cfg.beta > 0.0) {
        const int nuk = static_cast<int>(batch.unknown.size());
        Eigen::MatrixXd d_yhat(nuk, n_entries);
        for (int a = 0; a < nuk; ++a) {
            const ScalarField D =
                column_as_field(batch.X, batch.unknown[a], cfg.grid_nx, cfg.grid_ny, cfg.grid_h);
            const ScalarField u =
                row_as_field(wk.yhat_t, a, cfg.grid_nx, cfg.grid_ny, cfg.grid_h);
            const ScalarField g = diffusion_vloss_grad_u(D, u);
            d_yhat.row(a) =
                (cfg.beta / nuk) *
                Eigen::Map<const Eigen::RowVectorXd>(g.values.data(), g.size());
        }
        const Eigen::MatrixXd dC = d_yhat * wk.W.transpose();
        const Eigen::MatrixXd dW = wk.C.transpose() * d_yhat;
        // W = A_k^-1 B  =>  dA_k = -(A_k^-1 dW) W^T
        const Eigen::MatrixXd dAk = -(wk.ws_known.solve(dW)) * wk.W.transpose();
        kernel_backward(wk.C, dC, wk.Z, batch.unknown, batch.known, cfg.kernel_l, cfg.form, dZ);
        kernel_backward(wk.ws_known.K, dAk, wk.Z, batch.known, batch.known, cfg.kernel_l,
                        cfg.form, dZ);
    }

    // Encoder backward for the clean pass.
    backward_range(params, 0, params.encoder_end, wk.enc_cache, dZ, grads);

    // Reconstruction term through the corrupted autoencoder pass.
    if (cfg.gamma > 0.0) {
        const Eigen::MatrixXd dR = (2.0 * cfg.gamma / s) * (wk.recon - batch.X);
        backward_range(params, 0, params.layer_count(), wk.dae_cache, dR, grads);
    }

    for (const auto& l : grads.layers)
        if (!l.W.allFinite() || !l.b.allFinite())
            throw NumericalError("hybrid loss: non-finite gradient");
    return parts;
}

} // namespace pcgp
