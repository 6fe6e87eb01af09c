#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pixelarm {

// Written atomically at the end of every CLI run; together with the input
// paths and seed it reproduces the run.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;  // complete resolved snapshot
    std::vector<std::string> inputs;
    std::map<std::string, std::uint64_t> outputs;  // path -> FNV-1a checksum
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace pixelarm
