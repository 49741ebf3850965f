#include "rbto_cli/run.hpp"

#include <iostream>

int main(int argc, char** argv) { return rbto::cli::run_cli(argc, argv, std::cout, std::cerr); }
