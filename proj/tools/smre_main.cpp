#include <iostream>

#include "smre/cli.hpp"

int main(int argc, char** argv) { return smre::cli_main(argc, argv, std::cout, std::cerr); }
