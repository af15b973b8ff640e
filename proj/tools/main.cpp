#include <vector>

#include "intonation/commands.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return intonation::pipeline::run_command(args);
}
