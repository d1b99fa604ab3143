#include <iostream>

#include "tactics/cli.hpp"

int main(int argc, char** argv) { return tactics::run_cli(argc, argv, std::cout, std::cerr); }
