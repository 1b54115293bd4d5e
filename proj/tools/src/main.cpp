#include <iostream>

#include "facloc_cli/cli.hpp"

int main(int argc, char** argv) { return facloc::cli::run(argc, argv, std::cout, std::cerr); }
