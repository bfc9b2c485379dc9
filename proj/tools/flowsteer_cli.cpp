#include <iostream>

#include "flowsteer/cli.hpp"

int main(int argc, char** argv) { return flowsteer::run_cli(argc, argv, std::cout, std::cerr); }
