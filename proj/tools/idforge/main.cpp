#include <iostream>

#include "idforge/cli.hpp"

int main(int argc, char** argv) { return idforge::cli::run(argc, argv, std::cout, std::cerr); }
