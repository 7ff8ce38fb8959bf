#include <clocale>
#include <vector>

#include "pcgp/cli.hpp"

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C"); // '.' decimal separator in every emitted file
    std::vector<std::string> args(argv + 1, argv + argc);
    return pcgp::run_cli(args);
}
