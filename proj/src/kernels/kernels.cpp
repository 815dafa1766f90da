#include "gf/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gf::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Ops& active() {
    static const Ops* chosen = [] {
        const char* env = std::getenv("GF_KERNELS");
        if (env && std::strcmp(env, "scalar") == 0) return &scalar();
        if (env && std::strcmp(env, "avx2") == 0) return &avx2();
        return avx2_supported() ? &avx2() : &scalar();
    }();
    return *chosen;
}

} // namespace gf::kernels
