#include "hesslab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hesslab {

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("HESSLAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) return cap < hw ? cap : hw;
    } catch (...) {
    }
  }
  return hw;
}

}  // namespace hesslab
