#pragma once

#include <cstdint>
#include <random>

namespace hjm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Standard normal draws for one path. The stream depends only on (seed, stream
/// index), so paths can be generated in any order with identical results.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, bool negate = false)
        : engine_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))), sign_(negate ? -1.0 : 1.0) {}

    double next() { return sign_ * dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
    double sign_;
};

/// Stream for `path` under optional antithetic pairing: paths 2p and 2p+1 share
/// stream p, the odd one negated.
inline NormalStream path_stream(std::uint64_t seed, std::uint64_t path, bool antithetic) {
    if (!antithetic) return NormalStream(seed, path);
    return NormalStream(seed, path / 2, path % 2 == 1);
}

}  // namespace hjm
