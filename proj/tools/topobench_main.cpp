#include <iostream>

#include "topobench/cli.hpp"

int main(int argc, char** argv) { return topobench::run_cli(argc, argv, std::cout, std::cerr); }
