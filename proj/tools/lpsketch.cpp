#include <iostream>

#include "lpsketch/cli.hpp"

int main(int argc, char** argv) { return lpsketch::run_cli(argc, argv, std::cout, std::cerr); }
