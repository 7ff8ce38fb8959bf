#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "pcgp/errors.hpp"
#include "pcgp/gp.hpp"
#include "pcgp/rng.hpp"

using namespace pcgp;

namespace {

Eigen::MatrixXd random_points(int dim, int n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Eigen::MatrixXd X(dim, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < dim; ++r) X(r, c) = scale * rng.normal();
    return X;
}

std::vector<oracle::Vec> as_rows(const Eigen::MatrixXd& X) {
    std::vector<oracle::Vec> rows;
    for (int c = 0; c < X.cols(); ++c) {
        oracle::Vec v(static_cast<std::size_t>(X.rows()));
        for (int r = 0; r < X.rows(); ++r) v[static_cast<std::size_t>(r)] = X(r, c);
        rows.push_back(std::move(v));
    }
    return rows;
}

} // namespace

TEST_CASE("se_kernel basics") {
    Eigen::VectorXd a(3), b(3);
    a << 0.3, -1.2, 2.0;
    b = a;
    CHECK(se_kernel(a, b, 2.0) == 1.0);

    b << 0.3, -1.2, 4.0; // distance 2
    CHECK(se_kernel(a, b, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x(4), y(4);
        for (int i = 0; i < 4; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        const double k1 = se_kernel(x, y, 1.7);
        const double k2 = se_kernel(y, x, 1.7);
        CHECK(k1 == k2);
        CHECK(k1 > 0.0);
        CHECK(k1 <= 1.0);
    }
}

TEST_CASE("se_kernel input validation") {
    Eigen::VectorXd a(3), b(2);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS(se_kernel(a, b, 1.0), InputError);

    Eigen::VectorXd c(3);
    c << 1.0, std::nan(""), 0.0;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(se_kernel(c, d, 1.0), InputError);
    CHECK_THROWS_AS(se_kernel(d, d, 0.0), InputError);
}

TEST_CASE("squared kernel form") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(2), b(2);
    b << 2.0, 0.0;
    CHECK(se_kernel(a, b, 2.0, KernelForm::squared_norm) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("gram_matrix structure") {
    const Eigen::MatrixXd one = random_points(4, 1, 11);
    const GramWorkspace ws1 = gram_matrix(one, 2.0, 0.0, 0.0);
    CHECK(ws1.K(0, 0) == 1.0);

    const Eigen::MatrixXd X = random_points(4, 9, 12);
    const GramWorkspace ws = gram_matrix(X, 2.0, 1e-3, 1e-8);
    CHECK((ws.K - ws.K.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    for (int i = 0; i < 9; ++i) CHECK(ws.K(i, i) == 1.0);
}

TEST_CASE("gram cholesky reconstructs the dense matrix") {
    const Eigen::MatrixXd X = random_points(4, 8, 21);
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.01, 0.0);
    Eigen::MatrixXd A = ws.K;
    A.diagonal().array() += ws.sigma2 + ws.jitter;
    const Eigen::MatrixXd rebuilt = ws.chol * ws.chol.transpose();
    CHECK((rebuilt - A).cwiseAbs().maxCoeff() / A.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("jitter escalates on rank-deficient inputs") {
    Eigen::MatrixXd X(2, 3);
    X.col(0) << 1.0, 1.0;
    X.col(1) << 1.0, 1.0;
    X.col(2) << 1.0, 1.0;
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.0, 0.0);
    CHECK(ws.jitter > 0.0);
    CHECK(ws.jitter <= 1e-2);
}

TEST_CASE("log_marginal_nll closed cases") {
    Eigen::MatrixXd X(1, 1);
    X(0, 0) = 0.7;
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.0, 0.0);
    Eigen::VectorXd y0(1), y1(1);
    y0 << 0.0;
    y1 << 1.0;
    CHECK(log_marginal_nll(ws, y0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(log_marginal_nll(ws, y1) == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::VectorXd bad(2);
    CHECK_THROWS_AS(log_marginal_nll(ws, bad), InputError);
}

TEST_CASE("log_marginal_nll matches the dense-inverse oracle") {
    const Eigen::MatrixXd X = random_points(3, 6, 33);
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.05, 0.0);
    Rng rng(34);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) y[i] = rng.normal();

    const auto pts = as_rows(X);
    const oracle::Mat A = oracle::add_diag(oracle::kernel(pts, pts, 2.0), 0.05);
    const oracle::Mat Ainv = oracle::inverse(A);
    oracle::Vec yv(y.data(), y.data() + 6);
    const double quad = oracle::dot(yv, oracle::matvec(Ainv, yv));
    const double expected = quad + oracle::Lu(A).log_det();

    CHECK(log_marginal_nll(ws, y) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("posterior mean interpolates at zero noise") {
    const Eigen::MatrixXd X = random_points(4, 7, 41);
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.0, 0.0);
    Rng rng(42);
    Eigen::VectorXd y(7);
    for (int i = 0; i < 7; ++i) y[i] = rng.normal();
    const PosteriorResult post = posterior_mean(ws, X, X, y, 2.0);
    CHECK((post.mean - y).cwiseAbs().maxCoeff() <= 1e-8);

    const PosteriorResult zero = posterior_mean(ws, X, X, Eigen::VectorXd::Zero(7), 2.0);
    CHECK(zero.mean.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior mean matches the dense-inverse oracle") {
    const Eigen::MatrixXd Xt = random_points(4, 5, 51);
    const Eigen::MatrixXd Xq = random_points(4, 3, 52);
    const GramWorkspace ws = gram_matrix(Xt, 2.0, 0.01, 0.0);
    Rng rng(53);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y[i] = rng.normal();

    const auto pt = as_rows(Xt), pq = as_rows(Xq);
    const oracle::Mat Ainv =
        oracle::inverse(oracle::add_diag(oracle::kernel(pt, pt, 2.0), 0.01));
    const oracle::Mat Kq = oracle::kernel(pq, pt, 2.0);
    oracle::Vec yv(y.data(), y.data() + 5);
    const oracle::Vec w = oracle::matvec(Ainv, yv);
    const oracle::Vec expected = oracle::matvec(Kq, w);

    const PosteriorResult post = posterior_mean(ws, Xt, Xq, y, 2.0);
    for (int i = 0; i < 3; ++i)
        CHECK(post.mean[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-8));
}

TEST_CASE("posterior covariance limits") {
    const Eigen::MatrixXd X = random_points(4, 6, 61);
    const GramWorkspace ws = gram_matrix(X, 2.0, 0.0, 0.0);
    const PosteriorResult at_train = posterior_cov(ws, X, X, 2.0);
    CHECK(at_train.cov.diagonal().maxCoeff() < 1e-8);
    CHECK(at_train.cov.diagonal().minCoeff() >= 0.0);

    Eigen::MatrixXd far = random_points(4, 2, 62);
    far.array() += 100.0;
    const PosteriorResult remote = posterior_cov(ws, X, far, 2.0);
    CHECK(remote.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(remote.cov(1, 1) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("posterior covariance matches the dense-inverse oracle") {
    const Eigen::MatrixXd Xt = random_points(4, 5, 71);
    const Eigen::MatrixXd Xq = random_points(4, 3, 72);
    const GramWorkspace ws = gram_matrix(Xt, 2.0, 0.02, 0.0);

    const auto pt = as_rows(Xt), pq = as_rows(Xq);
    const oracle::Mat Ainv =
        oracle::inverse(oracle::add_diag(oracle::kernel(pt, pt, 2.0), 0.02));
    const oracle::Mat Kq = oracle::kernel(pq, pt, 2.0);
    const oracle::Mat Kqq = oracle::kernel(pq, pq, 2.0);

    const PosteriorResult post = posterior_cov(ws, Xt, Xq, 2.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double cross = 0.0;
            for (std::size_t a = 0; a < 5; ++a)
                for (std::size_t b = 0; b < 5; ++b)
                    cross += Kq[static_cast<std::size_t>(i)][a] * Ainv[a][b] *
                             Kq[static_cast<std::size_t>(j)][b];
            const double expected = Kqq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - cross;
            CHECK(post.cov(i, j) == doctest::Approx(expected).epsilon(1e-8));
        }
}

TEST_CASE("posterior mean is linear in y") {
    const Eigen::MatrixXd Xt = random_points(3, 6, 81);
    const Eigen::MatrixXd Xq = random_points(3, 4, 82);
    const GramWorkspace ws = gram_matrix(Xt, 2.0, 0.01, 0.0);
    Rng rng(83);
    for (int t = 0; t < 25; ++t) {
        Eigen::VectorXd y1(6), y2(6);
        for (int i = 0; i < 6; ++i) {
            y1[i] = rng.normal();
            y2[i] = rng.normal();
        }
        const double a = rng.normal();
        const Eigen::VectorXd lhs = posterior_mean(ws, Xt, Xq, a * y1 + y2, 2.0).mean;
        const Eigen::VectorXd rhs = a * posterior_mean(ws, Xt, Xq, y1, 2.0).mean +
                                    posterior_mean(ws, Xt, Xq, y2, 2.0).mean;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("quadratic form is positive semidefinite") {
    const Eigen::MatrixXd X = random_points(4, 8, 91);
    const GramWorkspace ws = gram_matrix(X, 2.0, 1e-4, 0.0);
    const double logdet = ws.log_det();
    Rng rng(92);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd y(8);
        for (int i = 0; i < 8; ++i) y[i] = rng.normal();
        CHECK(log_marginal_nll(ws, y) - logdet >= 0.0);
    }
}

TEST_CASE("cholesky path equals dense oracle across sizes") {
    Rng rng(101);
    for (int n = 2; n <= 16; ++n) {
        const Eigen::MatrixXd X = random_points(4, n, 1000 + static_cast<std::uint64_t>(n));
        const GramWorkspace ws = gram_matrix(X, 2.0, 0.01, 0.0);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = rng.normal();

        const auto pts = as_rows(X);
        const oracle::Mat A = oracle::add_diag(oracle::kernel(pts, pts, 2.0), 0.01);
        oracle::Vec yv(y.data(), y.data() + n);
        const double quad = oracle::dot(yv, oracle::matvec(oracle::inverse(A), yv));
        const double expected = quad + oracle::Lu(A).log_det();
        const double got = log_marginal_nll(ws, y);
        CHECK(std::abs(got - expected) / std::abs(expected) <= 1e-8);
    }
}
