#include <iostream>

#include "csi/cli.hpp"

int main(int argc, char** argv) { return csi::cli::main_entry(argc, argv, std::cout, std::cerr); }
