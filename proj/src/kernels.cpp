// Backend selection. Resolved once per process: HLENS_KERNELS=scalar|avx2
// forces a backend, anything else (or unset) auto-detects via CPUID.

#include "hlens/kernels.hpp"

#include "hlens/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace hlens::kernels {

namespace detail {
#if defined(HLENS_HAVE_AVX2)
const Ops* avx2_ops_table(); // defined in kernels_avx2.cpp
const Ops* avx2_ops() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops_table();
  return nullptr;
}
#else
const Ops* avx2_ops() { return nullptr; }
#endif
} // namespace detail

namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

void resolve() {
  if (g_active.load(std::memory_order_acquire) != nullptr) return;
  Backend pick = Backend::scalar;
  const char* env = std::getenv("HLENS_KERNELS");
  const std::string req = env ? env : "auto";
  if (req == "scalar") {
    pick = Backend::scalar;
  } else if (req == "avx2") {
    if (!detail::avx2_ops()) raise(Err::InvalidKind, "HLENS_KERNELS=avx2 but AVX2 is unavailable");
    pick = Backend::avx2;
  } else {
    pick = detail::avx2_ops() ? Backend::avx2 : Backend::scalar;
  }
  g_backend.store(pick, std::memory_order_relaxed);
  g_active.store(pick == Backend::avx2 ? detail::avx2_ops() : detail::scalar_ops(),
                 std::memory_order_release);
}

} // namespace

bool available(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && detail::avx2_ops() != nullptr);
}

Backend active() {
  resolve();
  return g_backend.load(std::memory_order_relaxed);
}

void force(Backend b) {
  if (!available(b)) raise(Err::InvalidKind, "kernel backend unavailable on this machine");
  g_backend.store(b, std::memory_order_relaxed);
  g_active.store(b == Backend::avx2 ? detail::avx2_ops() : detail::scalar_ops(),
                 std::memory_order_release);
}

std::string_view name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

const Ops& ops(Backend b) {
  if (b == Backend::scalar) return *detail::scalar_ops();
  const Ops* t = detail::avx2_ops();
  if (!t) raise(Err::InvalidKind, "AVX2 kernels unavailable on this machine");
  return *t;
}

const Ops& active_ops() {
  resolve();
  return *g_active.load(std::memory_order_acquire);
}

} // namespace hlens::kernels
