#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pixelarm/patch.hpp"

namespace pixelarm {

// Binary shard layout (all integers little-endian):
//   "PXSH1"
//   u32 version (= 1)
//   u32 patch_h, u32 patch_w, u32 channels
//   u32 language length, language bytes (UTF-8)
//   u64 patch_count, u64 sequence_count, u64 total_chars
//   u64 offsets[sequence_count]   starting patch index per sequence,
//                                 strictly increasing, first is 0
//   payload                       ceil(patch_count*H*W*C/8) bytes; bit k of
//                                 the patch-major row-major bit stream is
//                                 (byte[k>>3] >> (k&7)) & 1
//   u64 checksum                  FNV-1a over version..payload
struct ShardHeader {
    int patch_h = 0;
    int patch_w = 0;
    int channels = 1;
    std::string language;
    std::uint64_t patch_count = 0;
    std::uint64_t sequence_count = 0;
    std::uint64_t total_chars = 0;
    std::vector<std::uint64_t> offsets;
};

struct Shard {
    ShardHeader header;
    std::vector<PatchSequence> sequences;
};

// Sequences must share geometry and language; empty sequences are skipped.
// Character counts are taken from the sequences' span maps.
void write_shard(const std::string& path,
                 const std::vector<PatchSequence>& sequences);

Shard read_shard(const std::string& path);
// Header + index only; payload is validated lazily by read_shard.
ShardHeader read_shard_header(const std::string& path);

struct LanguageStats {
    std::string language;
    std::uint64_t patches = 0;
    std::uint64_t chars = 0;
    double chars_per_patch = 0.0;
};

// Exact ratio of totals per language; languages with zero patches are absent.
std::vector<LanguageStats> compute_stats(const std::vector<ShardHeader>& shards);

}  // namespace pixelarm
