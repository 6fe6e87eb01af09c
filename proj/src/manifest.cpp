#include "pixelarm/manifest.hpp"

#include <json.hpp>

#include "pixelarm/common.hpp"

namespace pixelarm {

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    nlohmann::json outs = nlohmann::json::object();
    char buf[24];
    for (const auto& [p, sum] : m.outputs) {
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(sum));
        outs[p] = buf;
    }
    j["outputs"] = outs;
    j["seed"] = m.seed;
    j["wall_seconds"] = m.wall_seconds;
    atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace pixelarm
