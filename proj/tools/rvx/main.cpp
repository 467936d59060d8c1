#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "rvx/driver.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string out, err;
  int status = rvx::run_cli(
      args, [] { return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()); },
      out, err);
  std::cout << out;
  std::cerr << err;
  return status;
}
