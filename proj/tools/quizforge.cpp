#include <iostream>
#include <string>
#include <vector>

#include "quizforge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quizforge::cli::run(args, std::cout, std::cerr);
}
