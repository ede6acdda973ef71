#include <iostream>

#include "rasddp/cli.hpp"

int main(int argc, char** argv) { return rasddp::cli::run_cli(argc, argv, std::cout, std::cerr); }
