#include <iostream>

#include "gesha/cli.hpp"

int main(int argc, char** argv) { return gesha::run_cli(argc, argv, std::cout, std::cerr); }
