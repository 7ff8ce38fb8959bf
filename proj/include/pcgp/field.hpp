#ifndef PCGP_FIELD_HPP
#define PCGP_FIELD_HPP

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "pcgp/errors.hpp"

namespace pcgp {

/// A function sampled on a uniform nx-by-ny grid over the unit square.
/// values are row-major: value(i, j) lives at (x = j*h, y = i*h), so j
/// indexes columns (x direction, nx of them) and i indexes rows (y
/// direction, ny of them).
struct ScalarField {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    std::vector<double> values;

    ScalarField() = default;

    ScalarField(int nx_, int ny_, double h_, double fill = 0.0)
        : nx(nx_), ny(ny_), h(h_), values(static_cast<std::size_t>(nx_) * ny_, fill) {
        check_shape();
    }

    /// Square grid on the unit square, h = 1/(n-1).
    static ScalarField unit_square(int n, double fill = 0.0) {
        return ScalarField(n, n, 1.0 / (n - 1), fill);
    }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nx + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nx + j]; }

    double x_of(int j) const { return j * h; }
    double y_of(int i) const { return i * h; }

    int size() const { return nx * ny; }

    bool same_shape(const ScalarField& o) const {
        return nx == o.nx && ny == o.ny && h == o.h;
    }

    Eigen::Map<const Eigen::VectorXd> as_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(values.data(), size());
    }

    /// Replaces the stored values from a flat row-major vector.
    void assign(const Eigen::VectorXd& v) {
        if (v.size() != size())
            throw InputError("ScalarField::assign: length " + std::to_string(v.size()) +
                             " != " + std::to_string(size()));
        Eigen::Map<Eigen::VectorXd>(values.data(), size()) = v;
    }

    void check_shape() const {
        if (nx < 3 || ny < 3)
            throw InputError("ScalarField: grid must be at least 3x3, got " +
                             std::to_string(nx) + "x" + std::to_string(ny));
        if (!(h > 0.0))
            throw InputError("ScalarField: spacing must be positive");
        if (values.size() != static_cast<std::size_t>(nx) * ny)
            throw InputError("ScalarField: values length != nx*ny");
    }

    void check_finite(const char* what) const {
        for (double v : values)
            if (!std::isfinite(v))
                throw InputError(std::string(what) + ": non-finite entry");
    }
};

/// Per-node partial derivatives of a ScalarField (units 1/length).
struct GradientField {
    ScalarField gx; // d/dx
    ScalarField gy; // d/dy
};

} // namespace pcgp

#endif
