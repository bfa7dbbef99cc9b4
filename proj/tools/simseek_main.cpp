#include <iostream>

#include "simseek/cli.hpp"

int main(int argc, char** argv) { return simseek::run_cli(argc, argv, std::cout, std::cerr); }
