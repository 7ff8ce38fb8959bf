#include "pcgp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pcgp/errors.hpp"
#include "pcgp/io_util.hpp"

namespace pcgp {

namespace {

std::vector<int> parse_int_list(const std::string& s, const char* key) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw InputError(std::string("config: bad integer '") + tok + "' in " + key);
        }
    }
    if (out.empty()) throw InputError(std::string("config: empty list for ") + key);
    return out;
}

std::vector<std::pair<int, int>> parse_probes(const std::string& s) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(s);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        const auto ints = parse_int_list(pair, "probes");
        if (ints.size() != 2) throw InputError("config: probes entries must be 'i,j' pairs");
        out.emplace_back(ints[0], ints[1]);
    }
    if (out.empty()) throw InputError("config: empty probes list");
    return out;
}

} // namespace

void apply_config(const std::map<std::string, std::string>& kv, TrainConfig& train,
                  DataConfig& data) {
    auto as_double = [](const std::string& k, const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw InputError("config: bad number '" + v + "' for " + k);
        }
    };
    auto as_int = [&](const std::string& k, const std::string& v) {
        const double d = as_double(k, v);
        if (d != std::floor(d)) throw InputError("config: " + k + " must be an integer");
        return static_cast<int>(d);
    };
    for (const auto& [k, v] : kv) {
        if (k == "beta") train.beta = as_double(k, v);
        else if (k == "gamma") train.gamma = as_double(k, v);
        else if (k == "sigma2") train.sigma2 = as_double(k, v);
        else if (k == "jitter") train.jitter = as_double(k, v);
        else if (k == "kernel_l") train.kernel_l = as_double(k, v);
        else if (k == "squared_kernel") train.squared_kernel = (v == "1" || v == "true");
        else if (k == "batch_size") train.batch_size = as_int(k, v);
        else if (k == "known_count") train.known_count = as_int(k, v);
        else if (k == "epochs") train.epochs = as_int(k, v);
        else if (k == "lr") train.lr = as_double(k, v);
        else if (k == "adam_beta1") train.adam_beta1 = as_double(k, v);
        else if (k == "adam_beta2") train.adam_beta2 = as_double(k, v);
        else if (k == "adam_eps") train.adam_eps = as_double(k, v);
        else if (k == "encoder_dims") train.encoder_dims = parse_int_list(v, "encoder_dims");
        else if (k == "corruption_std") train.corruption_std = as_double(k, v);
        else if (k == "seed") train.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (k == "cond_limit") train.cond_limit = as_int(k, v);
        else if (k == "chunk") train.chunk = as_int(k, v);
        else if (k == "probes") train.probes = parse_probes(v);
        else if (k == "hist_bins") train.hist_bins = as_int(k, v);
        else if (k == "nx") data.nx = as_int(k, v);
        else if (k == "ny") data.ny = as_int(k, v);
        else if (k == "grf_l") data.grf_l = as_double(k, v);
        else if (k == "kl_modes") data.kl_modes = as_int(k, v);
        else if (k == "count") data.count = as_int(k, v);
        else throw InputError("config: unknown key '" + k + "'");
    }
}

namespace {

struct Options {
    std::string config_path;
    TrainConfig train;
    DataConfig data;

    void load_config() {
        if (config_path.empty()) return;
        apply_config(read_kv_file(config_path), train, data);
    }
};

ScalarField matrix_col_as_field(const Eigen::MatrixXd& M, int col, int nx, int ny, double h) {
    ScalarField f(nx, ny, h);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), f.size()) = M.col(col);
    return f;
}

int cmd_generate(Options& opt, std::uint64_t seed, const std::string& out) {
    const Dataset ds = generate_dataset(opt.data.nx, opt.data.ny, opt.data.grf_l,
                                        opt.data.kl_modes, opt.data.count, seed);
    save_dataset(ds, out);
    const KLBasis basis =
        build_kl_basis(opt.data.nx, opt.data.ny, opt.data.grf_l, opt.data.kl_modes);
    std::cout << "wrote " << out << ": " << ds.count() << " records on " << ds.nx << "x"
              << ds.ny << " grid, corr_l=" << ds.corr_l << ", modes=" << ds.kl_modes
              << ", retained eigenvalue mass " << fmt17(basis.retained_mass()) << "\n";
    return 0;
}

int cmd_train(Options& opt, const std::string& data_path, const std::string& val_path,
              const std::string& out_dir) {
    const Dataset train_ds = load_dataset(data_path);
    const Dataset val_ds = load_dataset(val_path);
    std::filesystem::create_directories(out_dir);

    const TrainResult result = train(train_ds, val_ds, opt.train);
    for (const auto& row : result.history)
        std::cout << "epoch " << row.epoch << "  loss " << row.train_loss << "  val_mse "
                  << row.val_mse << "\n";

    save_network(result.best.params, out_dir + "/checkpoint.net");
    write_history_csv(out_dir + "/history.csv", result.history);
    std::cout << "best epoch " << result.best.epoch << " val_mse " << fmt17(result.best.val_mse)
              << "\n";
    return 0;
}

int cmd_eval(Options& opt, const std::string& ckpt_path, const std::string& train_path,
             const std::string& test_path, const std::string& out_dir, int instances) {
    const Dataset train_ds = load_dataset(train_path);
    const Dataset test_ds = load_dataset(test_path);
    Checkpoint ckpt;
    ckpt.params = load_network(ckpt_path);
    std::filesystem::create_directories(out_dir);

    Eigen::MatrixXd pred;
    const Metrics m = evaluate(ckpt, train_ds, test_ds, opt.train, &pred);
    const double baseline = ensemble_mean_baseline_mse(train_ds, test_ds);

    std::vector<std::pair<std::string, std::string>> metrics;
    metrics.emplace_back("test_mse", fmt17(m.test_mse));
    metrics.emplace_back("baseline_mean_mse", fmt17(baseline));
    metrics.emplace_back("test_records", std::to_string(test_ds.count()));
    for (std::size_t p = 0; p < m.probes.size(); ++p) {
        const auto& ps = m.probes[p];
        const std::string tag = "probe" + std::to_string(p);
        metrics.emplace_back(tag + "_i", std::to_string(ps.i));
        metrics.emplace_back(tag + "_j", std::to_string(ps.j));
        metrics.emplace_back(tag + "_pred_mean", fmt17(ps.pred_mean));
        metrics.emplace_back(tag + "_pred_std", fmt17(ps.pred_std));
        metrics.emplace_back(tag + "_ref_mean", fmt17(ps.ref_mean));
        metrics.emplace_back(tag + "_ref_std", fmt17(ps.ref_std));
    }
    write_kv_file(out_dir + "/metrics.txt", metrics);

    // Per-instance triptychs: prediction, truth, difference.
    const int n_inst = std::min(instances, test_ds.count());
    for (int r = 0; r < n_inst; ++r) {
        const ScalarField p = matrix_col_as_field(pred, r, test_ds.nx, test_ds.ny, test_ds.h);
        const ScalarField& t = test_ds.records[static_cast<std::size_t>(r)].u;
        ScalarField d = p;
        for (int k = 0; k < d.size(); ++k) d.values[k] = p.values[k] - t.values[k];
        const std::string stem = out_dir + "/instance_" + std::to_string(r);
        write_field_csv(stem + "_pred.csv", p);
        write_field_csv(stem + "_truth.csv", t);
        write_field_csv(stem + "_diff.csv", d);
        write_field_pgm(stem + "_pred.pgm", p);
        write_field_pgm(stem + "_truth.pgm", t);
        write_field_pgm(stem + "_diff.pgm", d);
    }

    // Probe histograms over the test ensemble: shared edges, two count rows.
    const Eigen::MatrixXd ref = test_ds.targets();
    for (std::size_t p = 0; p < m.probes.size(); ++p) {
        const int entry = m.probes[p].i * test_ds.nx + m.probes[p].j;
        const Eigen::RowVectorXd pv = pred.row(entry);
        const Eigen::RowVectorXd rv = ref.row(entry);
        double lo = std::min(pv.minCoeff(), rv.minCoeff());
        double hi = std::max(pv.maxCoeff(), rv.maxCoeff());
        if (hi <= lo) hi = lo + 1e-12;
        const int bins = opt.train.hist_bins;
        const double width = (hi - lo) / bins;
        std::vector<int> pc(static_cast<std::size_t>(bins), 0), rc(static_cast<std::size_t>(bins), 0);
        auto bucket = [&](double v) {
            return std::min(bins - 1, static_cast<int>((v - lo) / width));
        };
        for (Eigen::Index k = 0; k < pv.size(); ++k) ++pc[static_cast<std::size_t>(bucket(pv[k]))];
        for (Eigen::Index k = 0; k < rv.size(); ++k) ++rc[static_cast<std::size_t>(bucket(rv[k]))];

        std::ofstream os(out_dir + "/probe" + std::to_string(p) + "_hist.csv");
        if (!os) throw NumericalError("cannot write histogram CSV");
        for (int b = 0; b < bins; ++b)
            os << fmt17(lo + b * width) << ',' << fmt17(lo + (b + 1) * width) << ','
               << pc[static_cast<std::size_t>(b)] << ',' << rc[static_cast<std::size_t>(b)] << '\n';
    }

    std::cout << "test_mse " << fmt17(m.test_mse) << " (baseline " << fmt17(baseline) << ")\n";
    return 0;
}

int cmd_predict(Options& opt, const std::string& ckpt_path, const std::string& train_path,
                const std::string& input_csv, const std::string& record_ds, int record,
                const std::string& out, const std::string& variance_out) {
    const Dataset train_ds = load_dataset(train_path);
    Checkpoint ckpt;
    ckpt.params = load_network(ckpt_path);

    ScalarField D;
    if (!input_csv.empty()) {
        D = read_field_csv(input_csv, train_ds.h);
        if (D.nx != train_ds.nx || D.ny != train_ds.ny)
            throw InputError("predict: input grid does not match training dataset");
    } else {
        const Dataset src = record_ds.empty() ? train_ds : load_dataset(record_ds);
        if (record < 0 || record >= src.count())
            throw InputError("predict: record index out of range");
        D = src.records[static_cast<std::size_t>(record)].D;
    }

    const Predictor predictor(ckpt.params, train_ds, opt.train);
    Eigen::MatrixXd Xq(D.size(), 1);
    Xq.col(0) = Eigen::Map<const Eigen::VectorXd>(D.values.data(), D.size());
    const Eigen::MatrixXd pred = predictor.predict(Xq);

    const ScalarField out_field = matrix_col_as_field(pred, 0, D.nx, D.ny, D.h);
    write_field_csv(out, out_field);
    if (!variance_out.empty()) {
        const double var = predictor.predict_variance(Xq)[0];
        ScalarField vf(D.nx, D.ny, D.h, var);
        write_field_csv(variance_out, vf);
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"physics-constrained deep-kernel GP surrogate"};
    app.require_subcommand(1);

    Options opt;

    auto* gen = app.add_subcommand("generate", "sample diffusivity/solution pairs");
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--config", opt.config_path, "key=value config file");
    auto* g_nx = gen->add_option("--nx", opt.data.nx, "grid nodes in x");
    auto* g_ny = gen->add_option("--ny", opt.data.ny, "grid nodes in y");
    auto* g_l = gen->add_option("--l", opt.data.grf_l, "GRF correlation length");
    auto* g_kl = gen->add_option("--kl", opt.data.kl_modes, "KL truncation");
    auto* g_count = gen->add_option("--count", opt.data.count, "number of records");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output dataset path")->required();

    auto* tr = app.add_subcommand("train", "run the training loop");
    std::string tr_data, tr_val, tr_out;
    tr->add_option("--config", opt.config_path, "key=value config file");
    tr->add_option("--data", tr_data, "training dataset")->required();
    tr->add_option("--val", tr_val, "validation dataset")->required();
    tr->add_option("--out-dir", tr_out, "output directory")->required();
    auto* t_epochs = tr->add_option("--epochs", opt.train.epochs, "epochs");
    auto* t_beta = tr->add_option("--beta", opt.train.beta, "physics weight");
    auto* t_gamma = tr->add_option("--gamma", opt.train.gamma, "reconstruction weight");
    auto* t_seed = tr->add_option("--seed", opt.train.seed, "run seed");
    auto* t_lr = tr->add_option("--lr", opt.train.lr, "learning rate");
    auto* t_batch = tr->add_option("--batch", opt.train.batch_size, "batch size");
    auto* t_known = tr->add_option("--known", opt.train.known_count, "known half size");
    auto* t_sigma2 = tr->add_option("--sigma2", opt.train.sigma2, "noise variance");

    auto* ev = app.add_subcommand("eval", "metrics and plot data on a test set");
    std::string ev_ckpt, ev_train, ev_test, ev_out;
    int ev_instances = 3;
    ev->add_option("--config", opt.config_path, "key=value config file");
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    ev->add_option("--train", ev_train, "training dataset (conditioning set)")->required();
    ev->add_option("--test", ev_test, "test dataset")->required();
    ev->add_option("--out-dir", ev_out, "output directory")->required();
    ev->add_option("--instances", ev_instances, "triptych instances to export");
    auto* e_sigma2 = ev->add_option("--sigma2", opt.train.sigma2, "noise variance");
    auto* e_seed = ev->add_option("--seed", opt.train.seed, "run seed");

    auto* pr = app.add_subcommand("predict", "predict one field");
    std::string pr_ckpt, pr_train, pr_input, pr_ds, pr_out, pr_var;
    int pr_record = -1;
    pr->add_option("--config", opt.config_path, "key=value config file");
    pr->add_option("--checkpoint", pr_ckpt, "checkpoint file")->required();
    pr->add_option("--train", pr_train, "training dataset (conditioning set)")->required();
    pr->add_option("--input-csv", pr_input, "input diffusivity field as CSV");
    pr->add_option("--dataset", pr_ds, "dataset to take --record from (default --train)");
    pr->add_option("--record", pr_record, "record index instead of --input-csv");
    pr->add_option("--out", pr_out, "prediction CSV path")->required();
    pr->add_option("--variance", pr_var, "optional posterior variance CSV path");
    auto* p_sigma2 = pr->add_option("--sigma2", opt.train.sigma2, "noise variance");
    auto* p_seed = pr->add_option("--seed", opt.train.seed, "run seed");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        // Config file first, then re-assert any explicit flags on top.
        try {
            opt.load_config();
        } catch (const InputError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const FormatError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
        if (!opt.config_path.empty()) {
            // CLI11 wrote flag values before the config was read; reapply them.
            if (g_nx->count()) opt.data.nx = std::stoi(g_nx->results().front());
            if (g_ny->count()) opt.data.ny = std::stoi(g_ny->results().front());
            if (g_l->count()) opt.data.grf_l = std::stod(g_l->results().front());
            if (g_kl->count()) opt.data.kl_modes = std::stoi(g_kl->results().front());
            if (g_count->count()) opt.data.count = std::stoi(g_count->results().front());
            if (t_epochs->count()) opt.train.epochs = std::stoi(t_epochs->results().front());
            if (t_beta->count()) opt.train.beta = std::stod(t_beta->results().front());
            if (t_gamma->count()) opt.train.gamma = std::stod(t_gamma->results().front());
            if (t_seed->count()) opt.train.seed = std::stoull(t_seed->results().front());
            if (t_lr->count()) opt.train.lr = std::stod(t_lr->results().front());
            if (t_batch->count()) opt.train.batch_size = std::stoi(t_batch->results().front());
            if (t_known->count()) opt.train.known_count = std::stoi(t_known->results().front());
            if (t_sigma2->count()) opt.train.sigma2 = std::stod(t_sigma2->results().front());
            if (e_sigma2->count()) opt.train.sigma2 = std::stod(e_sigma2->results().front());
            if (e_seed->count()) opt.train.seed = std::stoull(e_seed->results().front());
            if (p_sigma2->count()) opt.train.sigma2 = std::stod(p_sigma2->results().front());
            if (p_seed->count()) opt.train.seed = std::stoull(p_seed->results().front());
        }

        if (gen->parsed()) return cmd_generate(opt, gen_seed, gen_out);
        if (tr->parsed()) return cmd_train(opt, tr_data, tr_val, tr_out);
        if (ev->parsed()) return cmd_eval(opt, ev_ckpt, ev_train, ev_test, ev_out, ev_instances);
        if (pr->parsed())
            return cmd_predict(opt, pr_ckpt, pr_train, pr_input, pr_ds, pr_record, pr_out, pr_var);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace pcgp
