#include <iostream>

#include "gpvol/cli.hpp"

int main(int argc, char** argv) { return gpvol::cli::run(argc, argv, std::cout, std::cerr); }
