#include <atomic>
#include <cstdlib>
#include <string_view>

#include "fgvc/kernels.hpp"

namespace fgvc::kernels {

#ifndef FGVC_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("FGVC_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) {
  const KernelTable* t = &scalar_table();
  if (isa == Isa::Avx2 && avx2_table()) t = avx2_table();
  slot().store(t, std::memory_order_release);
}

}  // namespace fgvc::kernels
