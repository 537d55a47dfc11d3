#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return wavelab::cli::run_cli(argc, argv, std::cout, std::cerr); }
