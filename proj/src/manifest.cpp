#include "ngdc/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "ngdc/error.hpp"

namespace ngdc {

DatasetManifest load_manifest(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error("unreadable manifest: " + json_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid manifest JSON: " + json_path.string() + " (" +
                    e.what() + ")");
    }

    DatasetManifest m;
    try {
        m.dataset_id = j.at("dataset_id").get<std::string>();
        const auto base = json_path.parent_path();
        for (const auto& entry : j.at("images")) {
            ManifestImage img;
            img.id = entry.at("id").get<std::string>();
            std::filesystem::path p = entry.at("path").get<std::string>();
            img.path = p.is_absolute() ? p : base / p;
            m.images.push_back(std::move(img));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid manifest schema: " + json_path.string() + " (" +
                    e.what() + ")");
    }

    std::unordered_set<std::string> seen;
    for (const auto& img : m.images) {
        if (img.id.empty()) throw Error("manifest: empty image id");
        if (!seen.insert(img.id).second)
            throw Error("manifest: duplicate image id '" + img.id + "'");
    }
    return m;
}

}  // namespace ngdc
