#include <iostream>

#include "annlab/bench/cli.hpp"

int main(int argc, char** argv) { return annlab::bench::run_cli(argc, argv, std::cout, std::cerr); }
