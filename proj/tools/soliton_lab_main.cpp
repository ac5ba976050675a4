#include <iostream>

#include "soliton_lab/cli.hpp"

int main(int argc, char** argv) { return soliton_lab::cli::run(argc, argv, std::cout, std::cerr); }
