#include <iostream>

#include "frodo/commands.hpp"

int main(int argc, char** argv) { return frodo::cli::run(argc, argv, std::cout, std::cerr); }
