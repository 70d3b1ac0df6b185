#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trex {

// SHA-256 of a byte string, lowercase hex. Used for cache keys, transcript
// ids, and seeded draws; must stay stable across platforms and runs.
std::string sha256_hex(std::string_view data);

// First 8 bytes of sha256(key) as a big-endian unsigned integer.
std::uint64_t stable_hash64(std::string_view key);

// Uniform draw in [0, 1) derived from the key alone. Two calls with the same
// key always return the same value, regardless of call order or thread.
double unit_draw(std::string_view key);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Collapses runs of whitespace to single spaces and lowercases; used for
// phrase containment checks in the normalizer.
std::string normalize_ws(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Writes to a unique temp file in the target directory, then renames over the
// destination. Concurrent writers of the same key are safe; last one wins.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string iso8601_now();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions inside
// fn propagate after all threads join (first one wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace trex
