#include <iostream>

#include "signdict/cli.hpp"

int main(int argc, char** argv) { return signdict::run_cli(argc, argv, std::cout, std::cerr); }
