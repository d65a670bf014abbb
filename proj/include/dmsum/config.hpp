#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>

namespace dmsum {

using u64 = std::uint64_t;
using i64 = std::int64_t;

// Resource limits shared by all modules. The defaults are desk-scale;
// the CLI overrides memory_bytes from DMSUM_MEMORY_BUDGET.
struct Limits {
    u64 segment_length = u64{1} << 22;   // integers per sieve segment
    u64 max_segment = u64{1} << 26;      // largest segment sieve_range accepts
    u64 memory_bytes = u64{4} << 30;     // budget for tables
    unsigned max_primorial_primes = 25;  // 2^25 subsets at most
    u64 quadratic_limit = 10000;         // brute-force double sum
    u64 scan_limit = 100000000;          // longest scan accepted
    unsigned threads = 1;

    static Limits from_environment()
    {
        Limits lim;
        if (const char* env = std::getenv("DMSUM_MEMORY_BUDGET")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(env, &end, 10);
            if (end != env && v > 0) lim.memory_bytes = v;
        }
        lim.threads = std::max(1u, std::thread::hardware_concurrency());
        return lim;
    }
};

inline const Limits& default_limits()
{
    static const Limits lim{};
    return lim;
}

} // namespace dmsum
