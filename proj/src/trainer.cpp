#include "pcgp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "pcgp/errors.hpp"
#include "pcgp/io_util.hpp"
#include "pcgp/rng.hpp"

namespace pcgp {

namespace {

// Stream tags for substream derivation from the run seed.
enum StreamTag : std::uint64_t {
    kStreamInit = 0,
    kStreamShuffle = 1,
    kStreamSplit = 2,
    kStreamCorrupt = 3,
    kStreamCond = 4,
};

ObjectiveConfig objective_config(const TrainConfig& cfg, int nx, int ny, double h) {
    ObjectiveConfig oc;
    oc.beta = cfg.beta;
    oc.gamma = cfg.gamma;
    oc.sigma2 = cfg.sigma2;
    oc.jitter = cfg.jitter;
    oc.kernel_l = cfg.kernel_l;
    oc.form = cfg.kernel_form();
    oc.grid_nx = nx;
    oc.grid_ny = ny;
    oc.grid_h = h;
    return oc;
}

double matrix_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
    return (pred - ref).squaredNorm() / (static_cast<double>(pred.rows()) * pred.cols());
}

} // namespace

std::vector<int> TrainConfig::layer_dims() const {
    std::vector<int> dims = encoder_dims;
    for (int k = static_cast<int>(encoder_dims.size()) - 2; k >= 0; --k)
        dims.push_back(encoder_dims[static_cast<std::size_t>(k)]);
    return dims;
}

void TrainConfig::validate() const {
    if (!(known_count > 0 && known_count < batch_size))
        throw InputError("TrainConfig: need 0 < known_count < batch_size");
    if (beta < 0.0 || gamma < 0.0 || sigma2 < 0.0 || jitter < 0.0)
        throw InputError("TrainConfig: weights and variances must be nonnegative");
    if (!(kernel_l > 0.0)) throw InputError("TrainConfig: kernel_l must be positive");
    if (epochs < 0) throw InputError("TrainConfig: epochs must be nonnegative");
    if (encoder_dims.size() < 2)
        throw InputError("TrainConfig: encoder needs at least input and latent dims");
    if (cond_limit < 1 || chunk < 1)
        throw InputError("TrainConfig: cond_limit and chunk must be positive");
    if (corruption_std < 0.0) throw InputError("TrainConfig: corruption_std must be >= 0");
}

BatchSplit split_batch(int s, int known_count, std::uint64_t seed) {
    if (!(known_count > 0 && known_count < s))
        throw InputError("split_batch: need 0 < known_count < s");
    std::vector<int> order(static_cast<std::size_t>(s));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    BatchSplit split;
    split.known.assign(order.begin(), order.begin() + known_count);
    split.unknown.assign(order.begin() + known_count, order.end());
    std::sort(split.known.begin(), split.known.end());
    std::sort(split.unknown.begin(), split.unknown.end());
    return split;
}

Batch make_batch(const Dataset& ds, const std::vector<int>& indices) {
    if (indices.empty()) throw InputError("make_batch: empty index list");
    const int n = ds.nx * ds.ny;
    Batch b;
    b.nx = ds.nx;
    b.ny = ds.ny;
    b.h = ds.h;
    b.X.resize(n, static_cast<Eigen::Index>(indices.size()));
    b.Y.resize(n, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const int r = indices[c];
        if (r < 0 || r >= ds.count()) throw InputError("make_batch: index out of range");
        b.X.col(static_cast<Eigen::Index>(c)) =
            Eigen::Map<const Eigen::VectorXd>(ds.records[r].D.values.data(), n);
        b.Y.col(static_cast<Eigen::Index>(c)) =
            Eigen::Map<const Eigen::VectorXd>(ds.records[r].u.values.data(), n);
    }
    return b;
}

Eigen::MatrixXd infer_unknown(const NetworkParams& params, const Eigen::MatrixXd& Xk,
                              const Eigen::MatrixXd& Yk, const Eigen::MatrixXd& Xuk,
                              const TrainConfig& cfg) {
    if (Yk.cols() != Xk.cols()) throw InputError("infer_unknown: Yk/Xk record counts differ");
    const Eigen::MatrixXd Zk = encode_batch(params, Xk);
    const Eigen::MatrixXd Zuk = encode_batch(params, Xuk);
    const GramWorkspace ws =
        gram_matrix(Zk, cfg.kernel_l, cfg.sigma2, cfg.jitter, cfg.kernel_form());
    const Eigen::MatrixXd W = ws.solve(Yk.transpose());
    const Eigen::MatrixXd C = kernel_cross(Zuk, Zk, cfg.kernel_l, cfg.kernel_form());
    return (C * W).transpose();
}

double batch_loss(const NetworkParams& params, const Batch& batch, const BatchSplit& split,
                  const TrainConfig& cfg, const Eigen::MatrixXd* corruption) {
    BatchInputs in;
    in.X = batch.X;
    in.Y = batch.Y;
    in.known = split.known;
    in.unknown = split.unknown;
    if (corruption) in.corruption = *corruption;
    return hybrid_loss(params, in, objective_config(cfg, batch.nx, batch.ny, batch.h)).total;
}

Predictor::Predictor(const NetworkParams& params, const Dataset& train_ds,
                     const TrainConfig& cfg)
    : params_(&params), cfg_(cfg) {
    if (train_ds.count() < 1) throw InputError("Predictor: empty training set");
    if (train_ds.nx * train_ds.ny != params.input_dim())
        throw InputError("Predictor: dataset grid does not match network input");

    const int n = train_ds.count();
    cond_.resize(static_cast<std::size_t>(n));
    std::iota(cond_.begin(), cond_.end(), 0);
    if (n > cfg.cond_limit) {
        Rng rng(substream(cfg.seed, kStreamCond));
        rng.shuffle(cond_);
        cond_.resize(static_cast<std::size_t>(cfg.cond_limit));
        std::sort(cond_.begin(), cond_.end());
    }

    const Batch kb = make_batch(train_ds, cond_);
    Zk_ = encode_batch(params, kb.X);
    ws_ = gram_matrix(Zk_, cfg.kernel_l, cfg.sigma2, cfg.jitter, cfg.kernel_form());
    W_ = ws_.solve(kb.Y.transpose());
}

Eigen::MatrixXd Predictor::predict(const Eigen::MatrixXd& Xq) const {
    const Eigen::Index entries = W_.cols();
    Eigen::MatrixXd out(entries, Xq.cols());
    for (Eigen::Index start = 0; start < Xq.cols(); start += cfg_.chunk) {
        const Eigen::Index len = std::min<Eigen::Index>(cfg_.chunk, Xq.cols() - start);
        const Eigen::MatrixXd Zq = encode_batch(*params_, Xq.middleCols(start, len));
        const Eigen::MatrixXd C = kernel_cross(Zq, Zk_, cfg_.kernel_l, cfg_.kernel_form());
        out.middleCols(start, len) = (C * W_).transpose();
    }
    return out;
}

Eigen::VectorXd Predictor::predict_variance(const Eigen::MatrixXd& Xq) const {
    Eigen::VectorXd var(Xq.cols());
    for (Eigen::Index start = 0; start < Xq.cols(); start += cfg_.chunk) {
        const Eigen::Index len = std::min<Eigen::Index>(cfg_.chunk, Xq.cols() - start);
        const Eigen::MatrixXd Zq = encode_batch(*params_, Xq.middleCols(start, len));
        const Eigen::MatrixXd C = kernel_cross(Zq, Zk_, cfg_.kernel_l, cfg_.kernel_form());
        const Eigen::MatrixXd half =
            ws_.chol.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(C.transpose()));
        for (Eigen::Index q = 0; q < len; ++q)
            var[start + q] = std::max(0.0, 1.0 - half.col(q).squaredNorm());
    }
    return var;
}

TrainResult train(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg) {
    cfg.validate();
    if (train_ds.count() < 1 || val_ds.count() < 1)
        throw InputError("train: datasets must be non-empty");
    if (train_ds.nx != val_ds.nx || train_ds.ny != val_ds.ny)
        throw InputError("train: train/val grids differ");
    const int input_dim = train_ds.nx * train_ds.ny;
    if (cfg.encoder_dims.front() != input_dim)
        throw InputError("train: encoder input dim " + std::to_string(cfg.encoder_dims.front()) +
                         " != grid size " + std::to_string(input_dim));

    NetworkParams params =
        init_network(cfg.layer_dims(), cfg.encoder_end(), substream(cfg.seed, kStreamInit));
    AdamState adam = AdamState::zeros_like(params);
    GradientSet grads = GradientSet::zeros_like(params);

    const Eigen::MatrixXd val_X = val_ds.inputs();
    const Eigen::MatrixXd val_Y = val_ds.targets();
    const ObjectiveConfig oc = objective_config(cfg, train_ds.nx, train_ds.ny, train_ds.h);

    TrainResult result;
    result.best.epoch = 0;
    result.best.val_mse = std::numeric_limits<double>::infinity();

    if (cfg.epochs == 0) {
        result.best.params = params;
        result.best.val_mse = matrix_mse(Predictor(params, train_ds, cfg).predict(val_X), val_Y);
        return result;
    }

    const int n_batches = train_ds.count() / cfg.batch_size;
    if (n_batches == 0)
        throw InputError("train: training set smaller than one batch");

    std::vector<int> order(static_cast<std::size_t>(train_ds.count()));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(substream(cfg.seed, kStreamShuffle, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            const std::vector<int> idx(order.begin() + static_cast<std::size_t>(b) * cfg.batch_size,
                                       order.begin() + static_cast<std::size_t>(b + 1) * cfg.batch_size);
            BatchInputs in;
            {
                const Batch batch = make_batch(train_ds, idx);
                in.X = batch.X;
                in.Y = batch.Y;
            }
            const BatchSplit split = split_batch(
                cfg.batch_size, cfg.known_count,
                substream(substream(cfg.seed, kStreamSplit, static_cast<std::uint64_t>(epoch)),
                          static_cast<std::uint64_t>(b)));
            in.known = split.known;
            in.unknown = split.unknown;
            if (cfg.gamma > 0.0 && cfg.corruption_std > 0.0) {
                Rng noise(substream(
                    substream(cfg.seed, kStreamCorrupt, static_cast<std::uint64_t>(epoch)),
                    static_cast<std::uint64_t>(b)));
                in.corruption.resize(input_dim, cfg.batch_size);
                for (Eigen::Index c = 0; c < in.corruption.cols(); ++c)
                    for (Eigen::Index r = 0; r < in.corruption.rows(); ++r)
                        in.corruption(r, c) = cfg.corruption_std * noise.normal();
            }

            ObjectiveParts parts;
            try {
                parts = hybrid_loss_grad(params, in, oc, grads);
            } catch (const NumericalError& e) {
                throw NumericalError("train: " + std::string(e.what()) + " at epoch " +
                                     std::to_string(epoch) + ", batch " + std::to_string(b));
            }
            loss_sum += parts.total;
            adam_step(params, grads, adam, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / n_batches;
        stats.val_mse = matrix_mse(Predictor(params, train_ds, cfg).predict(val_X), val_Y);
        result.history.push_back(stats);
        if (stats.val_mse < result.best.val_mse) {
            result.best.params = params;
            result.best.epoch = epoch;
            result.best.val_mse = stats.val_mse;
        }
    }
    return result;
}

Metrics evaluate(const Checkpoint& ckpt, const Dataset& train_ds, const Dataset& test_ds,
                 const TrainConfig& cfg, Eigen::MatrixXd* predictions_out) {
    if (test_ds.count() < 1) throw InputError("evaluate: empty test set");
    if (test_ds.nx != train_ds.nx || test_ds.ny != train_ds.ny)
        throw InputError("evaluate: train/test grids differ");

    const Predictor predictor(ckpt.params, train_ds, cfg);
    const Eigen::MatrixXd pred = predictor.predict(test_ds.inputs());
    const Eigen::MatrixXd ref = test_ds.targets();

    Metrics m;
    m.test_mse = (pred - ref).squaredNorm() / (static_cast<double>(pred.rows()) * pred.cols());

    const auto sample_stats = [](const Eigen::RowVectorXd& v) {
        const double mean = v.mean();
        const double var =
            (v.array() - mean).square().sum() / std::max<Eigen::Index>(1, v.size() - 1);
        return std::make_pair(mean, std::sqrt(var));
    };
    for (const auto& [pi, pj] : cfg.probes) {
        if (pi < 0 || pi >= test_ds.ny || pj < 0 || pj >= test_ds.nx)
            throw InputError("evaluate: probe point outside grid");
        const int entry = pi * test_ds.nx + pj;
        ProbeStats ps;
        ps.i = pi;
        ps.j = pj;
        std::tie(ps.pred_mean, ps.pred_std) = sample_stats(pred.row(entry));
        std::tie(ps.ref_mean, ps.ref_std) = sample_stats(ref.row(entry));
        m.probes.push_back(ps);
    }
    if (predictions_out) *predictions_out = pred;
    return m;
}

double ensemble_mean_baseline_mse(const Dataset& train_ds, const Dataset& test_ds) {
    const Eigen::VectorXd mean_field = train_ds.targets().rowwise().mean();
    const Eigen::MatrixXd ref = test_ds.targets();
    return (ref.colwise() - mean_field).squaredNorm() /
           (static_cast<double>(ref.rows()) * ref.cols());
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream os(path);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    for (const auto& row : history)
        os << row.epoch << ',' << fmt17(row.train_loss) << ',' << fmt17(row.val_mse) << '\n';
    if (!os.good()) throw NumericalError("write failed: " + path);
}

} // namespace pcgp
