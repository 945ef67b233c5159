#include <iostream>

#include "bracket_reach/cli.hpp"

int main(int argc, char** argv) {
  return bracket_reach::cli::run(argc, argv, std::cout, std::cerr);
}
