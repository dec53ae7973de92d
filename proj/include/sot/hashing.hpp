#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sot {

// Lowercase hex SHA-256 digest (64 chars).
std::string sha256_hex(std::string_view data);

// Non-cryptographic 64-bit hash of `data` mixed with `seed`. Stable across
// platforms and runs; drives the mock backend and the mock embedder.
std::uint64_t seeded_hash(std::string_view data, std::uint64_t seed);

// One step of the splitmix64 generator.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace sot
