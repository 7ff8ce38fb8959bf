#include "pcgp/gp.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <string>

#include "pcgp/errors.hpp"

namespace pcgp {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

void check_vector(const Eigen::VectorXd& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw InputError(std::string("se_kernel: non-finite entry in ") + name);
}

} // namespace

std::uint64_t gram_factorization_count() { return g_factorizations.load(); }

double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double l,
                 KernelForm form) {
    if (a.size() != b.size())
        throw InputError("se_kernel: dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    if (!(l > 0.0))
        throw InputError("se_kernel: length scale must be positive");
    check_vector(a, "a");
    check_vector(b, "b");
    if (form == KernelForm::norm)
        return std::exp(-(a - b).norm() / l);
    return std::exp(-(a - b).squaredNorm() / l);
}

Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             double l, KernelForm form) {
    if (A.rows() != B.rows())
        throw InputError("kernel_cross: feature dimension mismatch");
    Eigen::MatrixXd K(A.cols(), B.cols());
    for (Eigen::Index i = 0; i < A.cols(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            const double d2 = (A.col(i) - B.col(j)).squaredNorm();
            K(i, j) = (form == KernelForm::norm) ? std::exp(-std::sqrt(d2) / l)
                                                 : std::exp(-d2 / l);
        }
    return K;
}

Eigen::VectorXd GramWorkspace::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = chol.triangularView<Eigen::Lower>().solve(b);
    chol.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd GramWorkspace::solve(const Eigen::MatrixXd& B) const {
    Eigen::MatrixXd X = chol.triangularView<Eigen::Lower>().solve(B);
    chol.triangularView<Eigen::Lower>().transpose().solveInPlace(X);
    return X;
}

double GramWorkspace::log_det() const {
    return 2.0 * chol.diagonal().array().log().sum();
}

Eigen::MatrixXd GramWorkspace::inverse() const {
    return solve(Eigen::MatrixXd::Identity(n(), n()));
}

GramWorkspace gram_matrix(const Eigen::MatrixXd& X, double l, double sigma2,
                          double jitter, KernelForm form) {
    if (X.cols() < 1)
        throw InputError("gram_matrix: need at least one point");
    if (sigma2 < 0.0 || jitter < 0.0)
        throw InputError("gram_matrix: sigma2 and jitter must be nonnegative");

    GramWorkspace ws;
    ws.K = kernel_cross(X, X, l, form);
    ws.sigma2 = sigma2;

    constexpr double kJitterStart = 1e-8;
    constexpr double kJitterCap = 1e-2;
    const int n = static_cast<int>(X.cols());

    double j = jitter;
    for (;;) {
        Eigen::MatrixXd A = ws.K;
        A.diagonal().array() += sigma2 + j;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        ++g_factorizations;
        if (llt.info() == Eigen::Success) {
            ws.jitter = j;
            ws.chol = llt.matrixL();
            return ws;
        }
        if (j >= kJitterCap)
            throw NumericalError("gram_matrix: Cholesky failed for n=" + std::to_string(n) +
                                 " at jitter " + std::to_string(j));
        j = (j == 0.0) ? kJitterStart : j * 10.0;
        if (j > kJitterCap) j = kJitterCap;
    }
}

double log_marginal_nll(const GramWorkspace& ws, const Eigen::VectorXd& y) {
    if (y.size() != ws.n())
        throw InputError("log_marginal_nll: y length " + std::to_string(y.size()) +
                         " != " + std::to_string(ws.n()));
    const Eigen::VectorXd half = ws.chol.triangularView<Eigen::Lower>().solve(y);
    return half.squaredNorm() + ws.log_det();
}

PosteriorResult posterior_mean(const GramWorkspace& ws, const Eigen::MatrixXd& Xtrain,
                               const Eigen::MatrixXd& Xquery, const Eigen::VectorXd& y,
                               double l, KernelForm form) {
    if (Xtrain.cols() != ws.n())
        throw InputError("posterior_mean: Xtrain does not match workspace size");
    if (y.size() != ws.n())
        throw InputError("posterior_mean: y length mismatch");
    PosteriorResult out;
    const Eigen::MatrixXd Kstar = kernel_cross(Xquery, Xtrain, l, form);
    out.mean = Kstar * ws.solve(y);
    return out;
}

PosteriorResult posterior_cov(const GramWorkspace& ws, const Eigen::MatrixXd& Xtrain,
                              const Eigen::MatrixXd& Xquery, double l, KernelForm form) {
    if (Xtrain.cols() != ws.n())
        throw InputError("posterior_cov: Xtrain does not match workspace size");
    PosteriorResult out;
    const Eigen::MatrixXd Kstar = kernel_cross(Xquery, Xtrain, l, form);
    const Eigen::MatrixXd Kqq = kernel_cross(Xquery, Xquery, l, form);
    // V = L^-1 K(X, X*): cov = Kqq - V^T V
    const Eigen::MatrixXd V = ws.chol.triangularView<Eigen::Lower>().solve(Kstar.transpose());
    Eigen::MatrixXd cov = Kqq - V.transpose() * V;
    cov = 0.5 * (cov + cov.transpose()).eval();
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        if (cov(i, i) < 0.0) cov(i, i) = 0.0;
    out.cov = std::move(cov);
    return out;
}

} // namespace pcgp
