#include "pcgp/datagen.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pcgp/errors.hpp"
#include "pcgp/io_util.hpp"
#include "pcgp/physics.hpp"
#include "pcgp/rng.hpp"

namespace pcgp {

namespace {
constexpr char kDatasetMagic[8] = {'P', 'C', 'G', 'P', 'D', 'S', '1', '\0'};
}

KLBasis build_kl_basis(int nx, int ny, double corr_l, int modes) {
    if (nx < 3 || ny < 3) throw InputError("build_kl_basis: grid must be at least 3x3");
    if (!(corr_l > 0.0)) throw InputError("build_kl_basis: correlation length must be positive");
    const int n = nx * ny;
    if (modes < 1 || modes > n)
        throw InputError("build_kl_basis: modes must be in [1, nx*ny]");

    const double h = 1.0 / (nx - 1);
    Eigen::MatrixXd C(n, n);
    for (int p = 0; p < n; ++p) {
        const double xp = (p % nx) * h, yp = (p / nx) * h;
        for (int q = 0; q < n; ++q) {
            const double xq = (q % nx) * h, yq = (q / nx) * h;
            C(p, q) = std::exp(-std::hypot(xp - xq, yp - yq) / corr_l);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success)
        throw NumericalError("build_kl_basis: eigendecomposition failed");

    // Eigen returns ascending order; keep the top `modes`, largest first.
    KLBasis basis;
    basis.nx = nx;
    basis.ny = ny;
    basis.h = h;
    basis.corr_l = corr_l;
    basis.kept = modes;
    basis.eigenvalues.resize(modes);
    basis.eigenvectors.resize(n, modes);
    for (int m = 0; m < modes; ++m) {
        const int src = n - 1 - m;
        basis.eigenvalues[m] = std::max(0.0, eig.eigenvalues()[src]);
        basis.eigenvectors.col(m) = eig.eigenvectors().col(src);
    }
    return basis;
}

ScalarField grf_from_coeffs(const KLBasis& basis, const Eigen::VectorXd& xi) {
    if (xi.size() != basis.kept)
        throw InputError("grf_from_coeffs: coefficient count " + std::to_string(xi.size()) +
                         " != " + std::to_string(basis.kept));
    const Eigen::VectorXd scaled = basis.eigenvalues.array().sqrt() * xi.array();
    ScalarField r(basis.nx, basis.ny, basis.h);
    Eigen::Map<Eigen::VectorXd>(r.values.data(), r.size()) = basis.eigenvectors * scaled;
    return r;
}

ScalarField sample_grf(const KLBasis& basis, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd xi(basis.kept);
    for (int m = 0; m < basis.kept; ++m) xi[m] = rng.normal();
    return grf_from_coeffs(basis, xi);
}

Eigen::MatrixXd Dataset::inputs() const {
    Eigen::MatrixXd X(nx * ny, count());
    for (int c = 0; c < count(); ++c)
        X.col(c) = Eigen::Map<const Eigen::VectorXd>(records[c].D.values.data(), nx * ny);
    return X;
}

Eigen::MatrixXd Dataset::targets() const {
    Eigen::MatrixXd Y(nx * ny, count());
    for (int c = 0; c < count(); ++c)
        Y.col(c) = Eigen::Map<const Eigen::VectorXd>(records[c].u.values.data(), nx * ny);
    return Y;
}

Dataset generate_dataset(int nx, int ny, double corr_l, int modes, int count,
                         std::uint64_t seed) {
    if (count < 1) throw InputError("generate_dataset: count must be >= 1");
    const KLBasis basis = build_kl_basis(nx, ny, corr_l, modes);

    Dataset ds;
    ds.nx = nx;
    ds.ny = ny;
    ds.h = basis.h;
    ds.corr_l = corr_l;
    ds.kl_modes = static_cast<std::uint32_t>(modes);
    ds.seed = seed;
    ds.records.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        ScalarField r = sample_grf(basis, substream(seed, static_cast<std::uint64_t>(i)));
        SampleRecord rec;
        rec.D = ScalarField(nx, ny, basis.h);
        for (int k = 0; k < r.size(); ++k) rec.D.values[k] = std::exp(r.values[k]);
        rec.u = solve_diffusion(rec.D);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Dataset slice_dataset(const Dataset& ds, int begin, int count) {
    if (begin < 0 || count < 1 || begin + count > ds.count())
        throw InputError("slice_dataset: range out of bounds");
    Dataset out = ds;
    out.records.assign(ds.records.begin() + begin, ds.records.begin() + begin + count);
    return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    if (ds.records.empty()) throw InputError("save_dataset: empty dataset");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    ByteWriter w(os);
    w.bytes(kDatasetMagic, 8);
    w.u32(static_cast<std::uint32_t>(ds.nx));
    w.u32(static_cast<std::uint32_t>(ds.ny));
    w.u32(static_cast<std::uint32_t>(ds.count()));
    w.f64(ds.h);
    w.f64(ds.corr_l);
    w.u32(ds.kl_modes);
    w.u64(ds.seed);
    for (const auto& rec : ds.records) {
        for (double v : rec.D.values) w.f64(v);
        for (double v : rec.u.values) w.f64(v);
    }
    if (!os.good()) throw NumericalError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NumericalError("cannot open: " + path);
    ByteReader r(is);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kDatasetMagic, 8) != 0)
        throw FormatError("bad magic in " + path, 0);

    Dataset ds;
    ds.nx = static_cast<int>(r.u32());
    ds.ny = static_cast<int>(r.u32());
    const std::uint32_t count = r.u32();
    ds.h = r.f64();
    ds.corr_l = r.f64();
    ds.kl_modes = r.u32();
    ds.seed = r.u64();
    if (ds.nx < 3 || ds.ny < 3 || ds.nx > 65536 || ds.ny > 65536)
        throw FormatError("implausible grid in " + path, 8);
    if (count == 0) throw FormatError("empty dataset in " + path, 16);

    const int n = ds.nx * ds.ny;
    ds.records.resize(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        auto& rec = ds.records[c];
        rec.D = ScalarField(ds.nx, ds.ny, ds.h);
        rec.u = ScalarField(ds.nx, ds.ny, ds.h);
        for (int k = 0; k < n; ++k) rec.D.values[k] = r.f64();
        for (int k = 0; k < n; ++k) rec.u.values[k] = r.f64();
    }
    return ds;
}

} // namespace pcgp
