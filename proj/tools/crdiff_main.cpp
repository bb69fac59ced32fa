#include <iostream>

#include "crdiff/cli.hpp"

int main(int argc, char** argv) { return crdiff::cli::main_entry(argc, argv, std::cout, std::cerr); }
