#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace egtw {

// Deterministic RNG with purpose-based splitting. All randomness in a run flows
// from one root seed; children are derived by hashing the purpose string so that
// independent consumers (data order, noise, dropout) do not perturb each other.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // inclusive bounds, unbiased
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // standard normal via Box-Muller (portable across standard libraries)
    double normal();
    double normal(double mean, double stddev);

    Rng split(std::string_view purpose) const;
    std::uint64_t seed() const { return seed_; }

    std::string state_string() const;
    void restore_state(const std::string& s);

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 14695981039346656037ull);

} // namespace egtw
