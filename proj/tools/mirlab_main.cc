#include <iostream>

#include "mirlab/cli/app.h"
#include "mirlab/common/alloc.h"

int main(int argc, char** argv) {
  mirlab::tune_allocator();
  return mirlab::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
