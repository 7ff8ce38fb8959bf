#include "pcgp/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "pcgp/errors.hpp"
#include "pcgp/io_util.hpp"
#include "pcgp/rng.hpp"

namespace pcgp {

namespace {
constexpr char kNetMagic[8] = {'P', 'C', 'G', 'P', 'N', 'E', 'T', '1'};

void check_congruent(const NetworkParams& p, const GradientSet& g, const char* who) {
    if (g.layers.size() != p.layers.size())
        throw InputError(std::string(who) + ": layer count mismatch");
    for (std::size_t k = 0; k < p.layers.size(); ++k)
        if (g.layers[k].W.rows() != p.layers[k].W.rows() ||
            g.layers[k].W.cols() != p.layers[k].W.cols() ||
            g.layers[k].b.size() != p.layers[k].b.size())
            throw InputError(std::string(who) + ": shape mismatch at layer " + std::to_string(k));
}
} // namespace

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size()) + l.b.size();
    return n;
}

GradientSet GradientSet::zeros_like(const NetworkParams& p) {
    GradientSet g;
    g.layers.reserve(p.layers.size());
    for (const auto& l : p.layers)
        g.layers.push_back({Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                            Eigen::VectorXd::Zero(l.b.size())});
    return g;
}

void GradientSet::setZero() {
    for (auto& l : layers) {
        l.W.setZero();
        l.b.setZero();
    }
}

AdamState AdamState::zeros_like(const NetworkParams& p) {
    AdamState s;
    s.m = GradientSet::zeros_like(p);
    s.v = GradientSet::zeros_like(p);
    s.t = 0;
    return s;
}

NetworkParams init_network(const std::vector<int>& layer_dims, int encoder_end,
                           std::uint64_t seed) {
    const int n_layers = static_cast<int>(layer_dims.size()) - 1;
    if (layer_dims.size() < 3)
        throw InputError("init_network: need at least 3 layer dims");
    for (int d : layer_dims)
        if (d <= 0) throw InputError("init_network: layer dims must be positive");
    if (encoder_end <= 0 || encoder_end >= n_layers)
        throw InputError("init_network: encoder_end must lie strictly inside the stack");

    NetworkParams p;
    p.encoder_end = encoder_end;
    Rng rng(seed);
    for (int k = 0; k < n_layers; ++k) {
        const int fan_in = layer_dims[k];
        const int fan_out = layer_dims[k + 1];
        Layer l;
        l.W.resize(fan_out, fan_in);
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) l.W(r, c) = rng.uniform_symmetric(a);
        l.b = Eigen::VectorXd::Zero(fan_out);
        const bool output_layer = (k == encoder_end - 1) || (k == n_layers - 1);
        l.act = output_layer ? Activation::linear : Activation::tanh_act;
        p.layers.push_back(std::move(l));
    }
    return p;
}

Eigen::MatrixXd forward_range(const NetworkParams& p, int first, int last,
                              const Eigen::MatrixXd& X, ForwardCache* cache) {
    if (first < 0 || last > p.layer_count() || first >= last)
        throw InputError("forward_range: bad layer range");
    if (X.rows() != p.layers[first].W.cols())
        throw InputError("forward_range: input dim " + std::to_string(X.rows()) +
                         " != " + std::to_string(p.layers[first].W.cols()));
    Eigen::MatrixXd a = X;
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(a);
    }
    for (int k = first; k < last; ++k) {
        Eigen::MatrixXd z = (p.layers[k].W * a).colwise() + p.layers[k].b;
        a = (p.layers[k].act == Activation::tanh_act)
                ? Eigen::MatrixXd(z.array().tanh())
                : std::move(z);
        if (cache) cache->acts.push_back(a);
    }
    return a;
}

Eigen::MatrixXd backward_range(const NetworkParams& p, int first, int last,
                               const ForwardCache& cache, Eigen::MatrixXd d_out,
                               GradientSet& grads) {
    check_congruent(p, grads, "backward_range");
    if (cache.acts.size() != static_cast<std::size_t>(last - first) + 1)
        throw InputError("backward_range: cache does not match layer range");
    for (int k = last - 1; k >= first; --k) {
        const Eigen::MatrixXd& out = cache.acts[k - first + 1];
        const Eigen::MatrixXd& in = cache.acts[k - first];
        Eigen::MatrixXd d_pre =
            (p.layers[k].act == Activation::tanh_act)
                ? Eigen::MatrixXd((d_out.array() * (1.0 - out.array().square())).matrix())
                : std::move(d_out);
        grads.layers[k].W.noalias() += d_pre * in.transpose();
        grads.layers[k].b += d_pre.rowwise().sum();
        d_out = p.layers[k].W.transpose() * d_pre;
    }
    return d_out;
}

Eigen::VectorXd encode(const NetworkParams& p, const Eigen::VectorXd& x) {
    return forward_range(p, 0, p.encoder_end, x);
}

Eigen::MatrixXd encode_batch(const NetworkParams& p, const Eigen::MatrixXd& X) {
    return forward_range(p, 0, p.encoder_end, X);
}

Eigen::VectorXd decode(const NetworkParams& p, const Eigen::VectorXd& z) {
    return forward_range(p, p.encoder_end, p.layer_count(), z);
}

double deep_kernel(const NetworkParams& p, const Eigen::VectorXd& x1,
                   const Eigen::VectorXd& x2, double l, KernelForm form) {
    return se_kernel(encode(p, x1), encode(p, x2), l, form);
}

void adam_step(NetworkParams& p, const GradientSet& g, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    check_congruent(p, g, "adam_step");
    check_congruent(p, state.m, "adam_step (m)");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        {
            auto m = state.m.layers[k].W.array();
            auto v = state.v.layers[k].W.array();
            const auto grad = g.layers[k].W.array();
            m = beta1 * m + (1.0 - beta1) * grad;
            v = beta2 * v + (1.0 - beta2) * grad.square();
            p.layers[k].W.array() -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
        }
        {
            auto m = state.m.layers[k].b.array();
            auto v = state.v.layers[k].b.array();
            const auto grad = g.layers[k].b.array();
            m = beta1 * m + (1.0 - beta1) * grad;
            v = beta2 * v + (1.0 - beta2) * grad.square();
            p.layers[k].b.array() -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
        }
    }
}

void save_network(const NetworkParams& p, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    ByteWriter w(os);
    w.bytes(kNetMagic, 8);
    w.u32(static_cast<std::uint32_t>(p.layers.size()));
    for (const auto& l : p.layers) {
        w.u32(static_cast<std::uint32_t>(l.W.rows()));
        w.u32(static_cast<std::uint32_t>(l.W.cols()));
        w.u8(static_cast<std::uint8_t>(l.act));
        for (Eigen::Index r = 0; r < l.W.rows(); ++r)
            for (Eigen::Index c = 0; c < l.W.cols(); ++c) w.f64(l.W(r, c));
        for (Eigen::Index r = 0; r < l.b.size(); ++r) w.f64(l.b[r]);
    }
    w.u32(static_cast<std::uint32_t>(p.encoder_end));
    if (!os.good()) throw NumericalError("write failed: " + path);
}

NetworkParams load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NumericalError("cannot open: " + path);
    ByteReader r(is);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kNetMagic, 8) != 0)
        throw FormatError("bad magic in " + path, 0);
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 1024)
        throw FormatError("implausible layer count in " + path, r.offset() - 4);
    NetworkParams p;
    int prev_out = -1;
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        const std::uint8_t tag = r.u8();
        if (tag > 1) throw FormatError("unknown activation tag in " + path, r.offset() - 1);
        if (prev_out >= 0 && static_cast<int>(cols) != prev_out)
            throw FormatError("layer dimension chain broken in " + path, r.offset());
        Layer l;
        l.W.resize(rows, cols);
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j) l.W(i, j) = r.f64();
        l.b.resize(rows);
        for (std::uint32_t i = 0; i < rows; ++i) l.b[i] = r.f64();
        l.act = static_cast<Activation>(tag);
        p.layers.push_back(std::move(l));
        prev_out = static_cast<int>(rows);
    }
    const std::uint32_t enc = r.u32();
    if (enc == 0 || enc >= n_layers)
        throw FormatError("encoder_end out of range in " + path, r.offset() - 4);
    p.encoder_end = static_cast<int>(enc);
    return p;
}

} // namespace pcgp
