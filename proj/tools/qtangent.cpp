#include <iostream>

#include "qtangent/cli.hpp"

int main(int argc, char** argv) {
  return qtangent::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
