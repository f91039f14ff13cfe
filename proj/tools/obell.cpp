#include <iostream>

#include "obell/cli.hpp"

int main(int argc, char** argv) {
  return obell::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
