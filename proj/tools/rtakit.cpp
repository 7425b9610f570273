#include "rtakit/cli.hpp"

#include <iostream>

int main(int argc, char ** argv) { return rta::run_cli(argc, argv, std::cout, std::cerr); }
