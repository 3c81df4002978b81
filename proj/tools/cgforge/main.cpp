#include <iostream>

#include "cgforge/cli/app.hpp"

int main(int argc, char** argv) { return cgforge::cli::run(argc, argv, std::cout, std::cerr); }
