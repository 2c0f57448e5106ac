#include <iostream>

#include "mlz/cli.hpp"

int main(int argc, char** argv) { return mlz::cli::run(argc, argv, std::cout, std::cerr); }
