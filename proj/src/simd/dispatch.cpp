#include <atomic>

#include "strokeml/error.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::simd {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
            // Advanced SIMD is mandatory on aarch64.
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* compiled(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return &scalar_kernels();
        case Isa::Avx2: return detail::avx2_kernels();
        case Isa::Neon: return detail::neon_kernels();
    }
    return nullptr;
}

const KernelTable* detect_best() {
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (available(isa)) return compiled(isa);
    }
    return &scalar_kernels();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool available(Isa isa) { return compiled(isa) != nullptr && cpu_supports(isa); }

const KernelTable& kernels(Isa isa) {
    if (!available(isa)) {
        throw Error(ErrorCode::InvalidArgument,
                    "SIMD variant '" + std::string(to_string(isa)) + "' is not available on this CPU");
    }
    return *compiled(isa);
}

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        const KernelTable* best = detect_best();
        const KernelTable* expected = nullptr;
        g_active.compare_exchange_strong(expected, best, std::memory_order_acq_rel);
        t = g_active.load(std::memory_order_acquire);
    }
    return *t;
}

void force_isa(Isa isa) { g_active.store(&kernels(isa), std::memory_order_release); }

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (available(isa)) out.push_back(isa);
    }
    return out;
}

}  // namespace strokeml::simd
