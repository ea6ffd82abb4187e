#include <iostream>

#include "belljump/cli.hpp"

int main(int argc, char** argv) { return belljump::run_cli(argc, argv, std::cout, std::cerr); }
