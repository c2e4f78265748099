#include <iostream>
#include <string>
#include <vector>

#include "supou_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return supou::cli::run_cli(args, std::cout, std::cerr);
}
