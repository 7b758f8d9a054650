#include <iostream>

#include "cloudvision/cli.hpp"
#include "cloudvision/parallel.hpp"

int main(int argc, char** argv) {
  cloudvision::configure_threads_from_env();
  return cloudvision::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
