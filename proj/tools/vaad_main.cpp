#include <iostream>

#include "vaad/commands.hpp"

int main(int argc, char** argv) { return vaad::cli::main(argc, argv, std::cout, std::cerr); }
