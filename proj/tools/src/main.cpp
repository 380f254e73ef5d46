#include "ragz_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ragz::cli::main(argc, argv, std::cerr); }
