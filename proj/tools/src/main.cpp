#include <iostream>

#include "roughop_cli/cli.hpp"

int main(int argc, char** argv) { return roughop::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
