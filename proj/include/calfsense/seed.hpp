#pragma once

#include <cstdint>
#include <initializer_list>

namespace calfsense {

// splitmix64 step: an independent seed for `stream` under `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
    for (auto s : path) root = derive_seed(root, s);
    return root;
}

}  // namespace calfsense
