#include <iostream>

#include "ctlab/cli.hpp"

int main(int argc, char** argv) {
  return ctlab::run_cli(argc, argv, std::cout, std::cerr);
}
