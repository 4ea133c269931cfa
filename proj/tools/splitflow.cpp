#include "splitflow/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return splitflow::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
