#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pixelarm {

// Error classes map onto the CLI exit codes: ConfigError -> 2, DataError -> 3,
// NumericError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, 64 bit. Used for shard/checkpoint payload checksums and manifest
// artifact digests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        state ^= p[i];
        state *= 0x100000001b3ull;
    }
    return state;
}

// --- UTF-8 <-> codepoints ------------------------------------------------

std::vector<char32_t> utf8_decode(std::string_view text);
std::string utf8_encode(const std::vector<char32_t>& codepoints);
void utf8_append(std::string& out, char32_t cp);

// --- small text helpers ---------------------------------------------------

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Deterministic stream splitting: mixes a base seed with per-use indices so
// derived generators are independent of evaluation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
    std::uint64_t x = seed ^ (a * 0x9e3779b97f4a7c15ull) ^
                      (b * 0xc2b2ae3d27d4eb4full);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

// --- files ------------------------------------------------------------------

std::string read_file(const std::string& path);
// write-temp-then-rename; no partial files on failure
void atomic_write_file(const std::string& path, std::string_view contents);
std::uint64_t file_checksum(const std::string& path);

// key=value config files (UTF-8, one pair per line, '#' comments).
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(std::string_view text);

}  // namespace pixelarm
