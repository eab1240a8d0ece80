#include <iostream>

#include "ambs/cli.hpp"

int main(int argc, char** argv) { return ambs::run_cli(argc, argv, std::cout, std::cerr); }
