#include <iostream>

#include "epann/cli.hpp"

int main(int argc, char** argv) { return epann::run_cli(argc, argv, std::cout, std::cerr); }
