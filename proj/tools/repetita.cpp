#include <iostream>

#include "repetita/cli.hpp"

int main(int argc, char** argv) {
  return repetita::cli_main(argc, argv, std::cerr);
}
