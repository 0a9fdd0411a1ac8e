#pragma once

// Dense double-precision inner loops shared by the learners and transforms.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant is
// chosen once at first use from the CPU's reported features; tests compare
// every available variant against the scalar reference.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace strokeml::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
    Isa isa;
    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i (a[i] - b[i])^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    /// sum_i (x[i] - mu[i])^2 * w[i]
    double (*weighted_squared_distance)(const double* x, const double* mu, const double* w,
                                        std::size_t n);
    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

/// True when the variant was compiled in and the running CPU supports it.
bool available(Isa isa);

/// Kernel table for `isa`; throws strokeml::Error(InvalidArgument) if unavailable.
const KernelTable& kernels(Isa isa);

/// Best available variant on this machine, or the one set by force_isa().
const KernelTable& active();

/// Pins the active variant for the remainder of the process (benchmarks, tests).
void force_isa(Isa isa);

std::vector<Isa> available_isas();

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline double weighted_squared_distance(std::span<const double> x, std::span<const double> mu,
                                        std::span<const double> w) {
    assert(x.size() == mu.size() && x.size() == w.size());
    return active().weighted_squared_distance(x.data(), mu.data(), w.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
const KernelTable* avx2_kernels();  // nullptr when not compiled in
const KernelTable* neon_kernels();  // nullptr when not compiled in
}  // namespace detail

}  // namespace strokeml::simd
