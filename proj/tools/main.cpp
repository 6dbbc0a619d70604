#include <iostream>

#include "cli_app.hpp"
#include "intent/runtime.hpp"

int main(int argc, char** argv) {
  intent::retain_heap_memory();
  return intent::cli::run(argc, argv, std::cout, std::cerr);
}
