#include <iostream>

#include "bell_lab/cli.hpp"

int main(int argc, char** argv) {
  return bell_lab::cli_main(argc, argv, std::cout, std::cerr);
}
