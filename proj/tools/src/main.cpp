#include <iostream>

#include "macpp/cli.hpp"

int main(int argc, char** argv) { return macpp::run_cli(argc, argv, std::cout, std::cerr); }
