#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace dsadmm {

/// Seeded generator used for every random draw in the project.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The standard distributions are implementation-defined, so
/// the conversions below are spelled out to keep runs bit-identical across
/// toolchains:
///   uniform()  = (bits >> 11) * 2^-53, in [0, 1)
///   normal()   = Box-Muller on two uniforms, second value cached
///   index(k)   = rejection-sampled value in [0, k)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double normal();
    std::size_t index(std::size_t bound);

    /// Fisher-Yates shuffle driven by index().
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dsadmm
