#include "scl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return scl::cli_main(argc, argv, std::cout, std::cerr); }
