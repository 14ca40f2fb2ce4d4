#include <iostream>

#include "styleaug/cli.hpp"

int main(int argc, char** argv) {
  return styleaug::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
