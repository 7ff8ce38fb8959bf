#ifndef PCGP_GP_HPP
#define PCGP_GP_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace pcgp {

/// Kernel variant. The default is the exponential-of-distance form
/// exp(-||a-b||/l); `squared_norm` switches to exp(-||a-b||^2/l).
enum class KernelForm : std::uint8_t { norm = 0, squared_norm = 1 };

/// Covariance between two feature vectors. Result in (0, 1].
double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double l,
                 KernelForm form = KernelForm::norm);

/// Kernel matrix between the columns of A and the columns of B.
Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             double l, KernelForm form = KernelForm::norm);

/// Kernel matrix, Cholesky factor and the noise/jitter applied to the
/// diagonal. Immutable once built; safe to share across threads.
struct GramWorkspace {
    Eigen::MatrixXd K;    ///< kernel matrix, unit diagonal
    double sigma2 = 0.0;  ///< noise variance added to the diagonal
    double jitter = 0.0;  ///< stabilizer actually used (may exceed the request)
    Eigen::MatrixXd chol; ///< lower Cholesky factor of K + (sigma2+jitter)*I

    int n() const { return static_cast<int>(K.rows()); }

    /// Solve (K + (sigma2+jitter) I) x = b via the stored factor.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;

    /// log det(K + (sigma2+jitter) I) from the factor diagonal.
    double log_det() const;

    /// Dense inverse of K + (sigma2+jitter) I via the stored factor.
    /// Needed only by gradient code (adjoint of log_det).
    Eigen::MatrixXd inverse() const;
};

/// Number of Cholesky factorizations performed so far in this process.
/// Lets tests assert that a factorization is shared rather than repeated.
std::uint64_t gram_factorization_count();

/// Gram matrix over the columns of X with jitter escalation: if the
/// factorization of K + (sigma2+jitter) I fails, jitter grows tenfold
/// (starting from 1e-8 when the request was 0) up to 1e-2, after which a
/// NumericalError reports the last jitter tried.
GramWorkspace gram_matrix(const Eigen::MatrixXd& X, double l, double sigma2,
                          double jitter, KernelForm form = KernelForm::norm);

/// y^T (K+s2 I)^-1 y + log det(K+s2 I); smaller is better.
double log_marginal_nll(const GramWorkspace& ws, const Eigen::VectorXd& y);

struct PosteriorResult {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov; ///< empty unless posterior_cov was asked for
};

/// Posterior mean at the columns of Xquery: K(X*,X) (K+s2 I)^-1 y,
/// evaluated with two triangular solves.
PosteriorResult posterior_mean(const GramWorkspace& ws, const Eigen::MatrixXd& Xtrain,
                               const Eigen::MatrixXd& Xquery, const Eigen::VectorXd& y,
                               double l, KernelForm form = KernelForm::norm);

/// Posterior covariance K(X*,X*) - K(X*,X) (K+s2 I)^-1 K(X,X*);
/// symmetrized, diagonal clipped at zero.
PosteriorResult posterior_cov(const GramWorkspace& ws, const Eigen::MatrixXd& Xtrain,
                              const Eigen::MatrixXd& Xquery, double l,
                              KernelForm form = KernelForm::norm);

} // namespace pcgp

#endif
