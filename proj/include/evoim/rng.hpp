#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evoim {

// splitmix64; used to derive well-separated seeds for per-purpose streams.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_tag(std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

using Rng = std::mt19937_64;

// Independent stream for (master seed, purpose tag, index). Streams derived
// this way stay aligned across worlds that share the master seed.
inline Rng make_stream(uint64_t master, std::string_view tag, uint64_t index = 0) {
    return Rng(mix64(master ^ mix64(hash_tag(tag)) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1)));
}

inline double u01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(rng);
}

// log-uniform over [lo, hi], lo > 0
inline double log_uniform(Rng& rng, double lo, double hi) {
    double u = std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng);
    return std::exp(u);
}

}  // namespace evoim
