#ifndef PCGP_CLI_HPP
#define PCGP_CLI_HPP

#include <map>
#include <string>
#include <vector>

#include "pcgp/trainer.hpp"

namespace pcgp {

/// Datagen knobs handled by the command line next to the TrainConfig.
struct DataConfig {
    int nx = 16, ny = 16;
    double grf_l = 0.2;
    int kl_modes = 64;
    int count = 256;
};

/// Applies a parsed key=value config file on top of defaults. Throws
/// InputError on unknown keys or unparseable values.
void apply_config(const std::map<std::string, std::string>& kv, TrainConfig& train,
                  DataConfig& data);

/// Full command dispatcher ("generate", "train", "eval", "predict").
/// Returns the process exit code: 0 success, 2 usage error, 1 runtime error.
int run_cli(const std::vector<std::string>& args);

} // namespace pcgp

#endif
