#ifndef PCGP_NET_HPP
#define PCGP_NET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pcgp/gp.hpp"

namespace pcgp {

enum class Activation : std::uint8_t { linear = 0, tanh_act = 1 };

struct Layer {
    Eigen::MatrixXd W; ///< out_dim x in_dim
    Eigen::VectorXd b; ///< out_dim
    Activation act = Activation::linear;
};

/// Dense encoder/decoder stack. Layers [0, encoder_end) form the encoder,
/// the rest the decoder. Immutable during forward/backward evaluation;
/// adam_step is the single mutation point.
struct NetworkParams {
    std::vector<Layer> layers;
    int encoder_end = 0;

    int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
    int latent_dim() const { return static_cast<int>(layers[encoder_end - 1].W.rows()); }
    int output_dim() const { return static_cast<int>(layers.back().W.rows()); }
    int layer_count() const { return static_cast<int>(layers.size()); }
    std::size_t parameter_count() const;
};

/// Gradients shaped like a NetworkParams.
struct GradientSet {
    struct LayerGrad {
        Eigen::MatrixXd W;
        Eigen::VectorXd b;
    };
    std::vector<LayerGrad> layers;

    static GradientSet zeros_like(const NetworkParams& p);
    void setZero();
};

/// Adam moment accumulators; t counts completed steps.
struct AdamState {
    GradientSet m, v;
    long t = 0;

    static AdamState zeros_like(const NetworkParams& p);
};

/// Glorot-uniform weights (scale sqrt(6/(fan_in+fan_out))), zero biases.
/// layer_dims lists unit counts per stage, so layer k maps dims[k] ->
/// dims[k+1]. Hidden activations are tanh; the encoder output layer and the
/// final decoder layer are linear. Deterministic per seed: weights are
/// filled layer by layer, row-major, from one Rng stream.
NetworkParams init_network(const std::vector<int>& layer_dims, int encoder_end,
                           std::uint64_t seed);

/// Activations of the layer range [first, last) for a batch of columns.
/// acts[0] is the input, acts[k+1] the output of layer first+k.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> acts;
};

Eigen::MatrixXd forward_range(const NetworkParams& p, int first, int last,
                              const Eigen::MatrixXd& X, ForwardCache* cache = nullptr);

/// Reverse pass through [first, last): accumulates parameter gradients into
/// `grads` and returns the gradient with respect to the range input.
Eigen::MatrixXd backward_range(const NetworkParams& p, int first, int last,
                               const ForwardCache& cache, Eigen::MatrixXd d_out,
                               GradientSet& grads);

Eigen::VectorXd encode(const NetworkParams& p, const Eigen::VectorXd& x);
Eigen::MatrixXd encode_batch(const NetworkParams& p, const Eigen::MatrixXd& X);
Eigen::VectorXd decode(const NetworkParams& p, const Eigen::VectorXd& z);

/// se_kernel on encoder features: k(f_E(x1), f_E(x2)).
double deep_kernel(const NetworkParams& p, const Eigen::VectorXd& x1,
                   const Eigen::VectorXd& x2, double l,
                   KernelForm form = KernelForm::norm);

/// Standard Adam update with bias correction; increments state.t.
void adam_step(NetworkParams& p, const GradientSet& g, AdamState& state, double lr,
               double beta1, double beta2, double eps);

/// Checkpoint format "PCGPNET1": magic, u32 layer count, then per layer
/// u32 rows, u32 cols, u8 activation tag, row-major f64 weights, f64 biases,
/// and finally u32 encoder_end. Round trips bit-exactly.
void save_network(const NetworkParams& p, const std::string& path);
NetworkParams load_network(const std::string& path);

} // namespace pcgp

#endif
