#include <iostream>

#include "torusconj/cli.hpp"

int main(int argc, char** argv) { return torusconj::cli::run(argc, argv, std::cout, std::cerr); }
