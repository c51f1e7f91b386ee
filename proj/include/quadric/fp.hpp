#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadric {

// Word-size primes of the form k*2^m + 1, each admitting radix-2 transforms
// up to length 2^two_adicity.  All fit in 31 bits so products fit in uint64.
struct NttPrime {
    uint32_t p;
    uint32_t generator;  // primitive root mod p
    int two_adicity;
};

inline constexpr NttPrime kNttPrimes[] = {
    {2013265921u, 31u, 27},  // 15*2^27 + 1
    {469762049u, 3u, 26},    // 7*2^26 + 1
    {167772161u, 3u, 25},    // 5*2^25 + 1
    {1224736769u, 3u, 24},   // 73*2^24 + 1
};
inline constexpr int kNumNttPrimes = 4;

inline uint32_t add_mod(uint32_t a, uint32_t b, uint32_t p) {
    uint32_t s = a + b;
    if (s >= p) s -= p;
    return s;
}

inline uint32_t sub_mod(uint32_t a, uint32_t b, uint32_t p) {
    return a >= b ? a - b : a + p - b;
}

inline uint32_t mul_mod(uint32_t a, uint32_t b, uint32_t p) {
    return static_cast<uint32_t>(static_cast<uint64_t>(a) * b % p);
}

inline uint32_t pow_mod(uint32_t a, uint64_t e, uint32_t p) {
    uint32_t r = 1 % p;
    while (e) {
        if (e & 1) r = mul_mod(r, a, p);
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    return r;
}

inline uint32_t inv_mod(uint32_t a, uint32_t p) {
    if (a == 0) throw std::domain_error("inv_mod: zero is not invertible");
    return pow_mod(a, p - 2, p);
}

inline uint32_t neg_mod(uint32_t a, uint32_t p) { return a ? p - a : 0; }

// Root of unity of order 2^k mod p; throws when p does not admit one.
inline uint32_t root_of_unity(uint32_t p, int k) {
    for (const NttPrime& np : kNttPrimes) {
        if (np.p != p) continue;
        if (k > np.two_adicity)
            throw std::domain_error("transform size 2^" + std::to_string(k) +
                                    " unavailable for p=" + std::to_string(p));
        return pow_mod(np.generator, (static_cast<uint64_t>(p) - 1) >> k, p);
    }
    throw std::domain_error("not a registered NTT prime: " + std::to_string(p));
}

inline int max_two_adicity(uint32_t p) {
    for (const NttPrime& np : kNttPrimes)
        if (np.p == p) return np.two_adicity;
    return 0;
}

// Reduce a signed 64-bit integer into [0, p).
inline uint32_t to_mod(int64_t v, uint32_t p) {
    int64_t r = v % static_cast<int64_t>(p);
    if (r < 0) r += p;
    return static_cast<uint32_t>(r);
}

}  // namespace quadric
