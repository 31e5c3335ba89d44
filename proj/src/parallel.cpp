#include "xray/parallel.hpp"

#include <omp.h>

#include <thread>

namespace xray {

void set_num_threads(int n) {
  omp_set_num_threads(n > 0 ? n : hardware_threads());
}

int num_threads() { return omp_get_max_threads(); }

int hardware_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace xray
