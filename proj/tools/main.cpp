#include <iostream>

#include "termspace/cli.hpp"

int main(int argc, char** argv) {
  return termspace::cli::run(argc, argv, std::cout, std::cerr);
}
