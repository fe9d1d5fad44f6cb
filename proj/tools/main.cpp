#include <iostream>

#include "dscjscc/cli.hpp"

int main(int argc, char** argv) {
  return dscjscc::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
