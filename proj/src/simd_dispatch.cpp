#include "geodrop/simd.hpp"

#include <cstdlib>
#include <cstring>

#include "geodrop/errors.hpp"

namespace geodrop::simd {

bool cpu_supports_avx2() {
#ifdef GEODROP_HAS_AVX2_BUILD
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Kernels& resolve() {
    const char* pref = std::getenv("GEODROP_SIMD");
    if (pref == nullptr || std::strcmp(pref, "auto") == 0 ||
        pref[0] == '\0') {
#ifdef GEODROP_HAS_AVX2_BUILD
        if (cpu_supports_avx2()) return avx2::kernels;
#endif
        return scalar::kernels;
    }
    if (std::strcmp(pref, "scalar") == 0) return scalar::kernels;
    if (std::strcmp(pref, "avx2") == 0) {
#ifdef GEODROP_HAS_AVX2_BUILD
        if (cpu_supports_avx2()) return avx2::kernels;
#endif
        throw ConfigError("GEODROP_SIMD=avx2 requested but AVX2+FMA is "
                          "not available on this CPU/build");
    }
    throw ConfigError(std::string("unknown GEODROP_SIMD value '") + pref +
                      "' (expected auto, scalar, or avx2)");
}

} // namespace

const Kernels& active() {
    // Resolved once; the chosen backend is fixed for the process lifetime
    // so all downstream arithmetic is reproducible within a run.
    static const Kernels& k = resolve();
    return k;
}

const char* active_name() { return active().name; }

} // namespace geodrop::simd
