#ifndef PCGP_DATAGEN_HPP
#define PCGP_DATAGEN_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pcgp/field.hpp"

namespace pcgp {

/// Truncated spectral basis of the exponential covariance
/// C(p,q) = exp(-|x_p - x_q|/corr_l) over the grid nodes.
struct KLBasis {
    int nx = 0, ny = 0;
    double h = 0.0;
    double corr_l = 0.0;
    Eigen::VectorXd eigenvalues;  ///< kept modes, nonincreasing, clipped at 0
    Eigen::MatrixXd eigenvectors; ///< (nx*ny) x kept, orthonormal columns
    int kept = 0;

    /// Fraction of total covariance trace carried by the kept modes.
    double retained_mass() const {
        return eigenvalues.sum() / (static_cast<double>(nx) * ny);
    }
};

KLBasis build_kl_basis(int nx, int ny, double corr_l, int modes);

/// Field r = sum_m sqrt(lambda_m) xi_m phi_m for given coefficients.
ScalarField grf_from_coeffs(const KLBasis& basis, const Eigen::VectorXd& xi);

/// Draws the xi coefficients i.i.d. standard normal from `seed`.
ScalarField sample_grf(const KLBasis& basis, std::uint64_t seed);

struct SampleRecord {
    ScalarField D; ///< diffusivity, strictly positive
    ScalarField u; ///< reference solution
};

struct Dataset {
    int nx = 0, ny = 0;
    double h = 0.0;
    double corr_l = 0.0;
    std::uint32_t kl_modes = 0;
    std::uint64_t seed = 0;
    std::vector<SampleRecord> records;

    int count() const { return static_cast<int>(records.size()); }

    /// Input fields as a matrix, one record per column.
    Eigen::MatrixXd inputs() const;
    /// Solution fields as a matrix, one record per column.
    Eigen::MatrixXd targets() const;
};

/// `count` pairs (D = exp(r), u = solve_diffusion(D)); record i draws its
/// coefficients from child stream substream(seed, i), so generation is a
/// pure function of the arguments.
Dataset generate_dataset(int nx, int ny, double corr_l, int modes, int count,
                         std::uint64_t seed);

/// Contiguous records [begin, begin+count) with the same metadata.
Dataset slice_dataset(const Dataset& ds, int begin, int count);

/// Dataset format "PCGPDS1": 8-byte magic, u32 nx, ny, count, f64 spacing,
/// f64 corr_l, u32 kl modes, u64 seed, then per record nx*ny f64 D followed
/// by nx*ny f64 u, row-major little-endian. Round trips bit-exactly.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

} // namespace pcgp

#endif
