#include <iostream>

#include "strictlyap/cli.hpp"

int main(int argc, char** argv) { return strictlyap::cli::run(argc, argv, std::cout, std::cerr); }
