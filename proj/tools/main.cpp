#include <iostream>

#include "microem/cli.hpp"

int main(int argc, char** argv) { return microem::cli_main(argc, argv, std::cout, std::cerr); }
