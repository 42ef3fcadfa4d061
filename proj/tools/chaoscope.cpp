#include <iostream>
#include <string>
#include <vector>

#include "chaoscope_cli.hpp"

int main(int argc, char** argv)
{
  std::vector<std::string> args(argv, argv + argc);
  return chaoscope::cli::run(args, std::cout, std::cerr);
}
