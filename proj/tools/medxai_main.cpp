#include <iostream>

#include "medxai/cli.hpp"

int main(int argc, char** argv) {
  return medxai::run_cli(argc, argv, std::cout, std::cerr);
}
