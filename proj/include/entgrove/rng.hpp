#pragma once

#include <cstdint>
#include <vector>

namespace entgrove {

// SplitMix64 (Steele, Lea, Vigna; public domain). All seeded shuffling in
// this project flows through this generator so that splits reproduce
// bit-exactly across platforms and standard-library versions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Fisher-Yates permutation driven by SplitMix64. Index j is drawn as
// next() % (i + 1); the modulo bias is irrelevant here because the contract
// is determinism, not statistical uniformity.
template <typename T>
void fisher_yates_shuffle(std::vector<T>& values, SplitMix64& rng) {
    if (values.size() < 2) return;
    for (std::size_t i = values.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(values[i], values[j]);
    }
}

}  // namespace entgrove
