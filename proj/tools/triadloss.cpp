#include <iostream>
#include <string>
#include <vector>

#include "triad/cli.hpp"

int main(int argc, char** argv) {
  return triad::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
