#include <iostream>

#include "kdi/cli.hpp"

int main(int argc, char** argv) { return kdi::run_cli(argc, argv, std::cout, std::cerr); }
