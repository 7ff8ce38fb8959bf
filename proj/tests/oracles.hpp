// Test-only reference implementations, kept independent of the library's
// linear-algebra path: plain Gauss-style elimination over nested vectors,
// no Eigen, no Cholesky.
#ifndef PCGP_TESTS_ORACLES_HPP
#define PCGP_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

/// LU with partial pivoting. Doolittle storage in-place.
struct Lu {
    Mat a;
    std::vector<std::size_t> perm;
    int sign = 1;

    explicit Lu(Mat m) : a(std::move(m)) {
        const std::size_t n = a.size();
        perm.resize(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
            if (piv != k) {
                std::swap(a[piv], a[k]);
                std::swap(perm[piv], perm[k]);
                sign = -sign;
            }
            if (a[k][k] == 0.0) throw std::runtime_error("oracle LU: singular matrix");
            for (std::size_t i = k + 1; i < n; ++i) {
                a[i][k] /= a[k][k];
                for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= a[i][k] * a[k][j];
            }
        }
    }

    Vec solve(const Vec& b) const {
        const std::size_t n = a.size();
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= a[i][j] * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= a[i][j] * x[j];
            x[i] /= a[i][i];
        }
        return x;
    }

    double log_det() const {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::log(std::fabs(a[i][i]));
        return s; // SPD inputs: determinant positive
    }
};

inline Mat inverse(const Mat& m) {
    const Lu lu(m);
    const std::size_t n = m.size();
    Mat inv = zeros(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        Vec e(n, 0.0);
        e[c] = 1.0;
        const Vec col = lu.solve(e);
        for (std::size_t r = 0; r < n; ++r) inv[r][c] = col[r];
    }
    return inv;
}

inline Vec matvec(const Mat& m, const Vec& v) {
    Vec out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Kernel matrix built with the oracle's own arithmetic. Points are rows.
inline Mat kernel(const std::vector<Vec>& pa, const std::vector<Vec>& pb, double l,
                  bool squared = false) {
    Mat k = zeros(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < pa[i].size(); ++c) {
                const double d = pa[i][c] - pb[j][c];
                d2 += d * d;
            }
            k[i][j] = squared ? std::exp(-d2 / l) : std::exp(-std::sqrt(d2) / l);
        }
    return k;
}

inline Mat add_diag(Mat m, double v) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i][i] += v;
    return m;
}

} // namespace oracle

#endif
