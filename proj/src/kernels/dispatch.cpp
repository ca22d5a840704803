#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernel_table.hpp"
#include "vortexlab/error.hpp"

namespace vortexlab::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(VORTEXLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Isa isa) {
#if defined(VORTEXLAB_HAVE_AVX2)
  if (isa == Isa::Avx2) return &detail::avx2_table();
#endif
  (void)isa;
  return &detail::scalar_table();
}

Isa initial_isa() {
  const char* env = std::getenv("VORTEXLAB_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const detail::KernelTable& table() { return *table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

Isa active_isa() { return current().load(); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw InputError(std::string("instruction set not available: ") + isa_name(isa));
  current().store(isa);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
  return table().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return table().sum(a.data(), a.size()); }

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  return table().abs_diff_sum(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x.data(), y.data(), y.size());
}

void xpay(std::span<const double> x, double alpha, std::span<double> y) {
  table().xpay(x.data(), alpha, y.data(), y.size());
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  table().multiply(a.data(), b.data(), out.data(), out.size());
}

void apply_stencil(const StencilView& op, std::span<const double> in, std::span<double> out) {
  table().apply_stencil(op, in.data(), out.data());
}

void advect(const AdvectionView& view, std::span<double> out) { table().advect(view, out.data()); }

}  // namespace vortexlab::kernels
