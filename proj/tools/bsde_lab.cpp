#include <iostream>

#include "bsde/harness.hpp"

int main(int argc, char** argv) { return bsde::cli_main(argc, argv, std::cout, std::cerr); }
