#include "mkvlab/rng.hpp"

namespace mkvlab::rng {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    std::uint64_t s = h ^ (v + 0x9e3779b97f4a7c15ULL);
    return splitmix64_next(s);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                          std::uint64_t kind, std::uint64_t element) {
    std::uint64_t h = mix(mix(mix(master, replication), kind), element);
    return splitmix64_next(h);
}

}  // namespace mkvlab::rng
