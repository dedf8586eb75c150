#include <atomic>
#include <cstdlib>
#include <string>

#include "dicke/kernels.hpp"

namespace dicke::kernels {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("DICKE_SIMD")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return (avx2_table() != nullptr && cpu_supports_avx2()) ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

const KernelTable& active() {
  return current().load(std::memory_order_relaxed) == Backend::avx2 ? *avx2_table()
                                                                     : scalar_table();
}

bool select(Backend backend) {
  if (backend == Backend::avx2 && (avx2_table() == nullptr || !cpu_supports_avx2())) return false;
  current().store(backend, std::memory_order_relaxed);
  return true;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace dicke::kernels
