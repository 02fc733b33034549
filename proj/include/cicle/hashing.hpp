#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cicle {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Stable 64-bit FNV-1a; used for per-item seeds and cache keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Mixes two 64-bit values (splitmix64 finalizer over a ^ b-rotation).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace cicle
