// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <fedqt/cli.hpp>

int main(int argc, char **argv) {
    return fedqt::cli::run_cli(argc, argv, std::cout, std::cerr);
}
