#include "cloudvision/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace cloudvision {

void set_thread_count(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

int thread_count() { return omp_get_max_threads(); }

int configure_threads_from_env() {
  if (const char* env = std::getenv("CLOUDVISION_THREADS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n > 0) set_thread_count(n);
    } catch (const std::exception&) {
      // ignored: malformed values leave the OpenMP default in place
    }
  }
  return thread_count();
}

}  // namespace cloudvision
