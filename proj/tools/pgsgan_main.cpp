#include <iostream>

#include "pgsgan/cli/commands.hpp"

int main(int argc, char** argv) {
  return pgsgan::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
