#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ngdc {

struct ManifestImage {
    std::string id;
    std::filesystem::path path;
};

// Ordered image list; the order is the canonical processing order.
struct DatasetManifest {
    std::string dataset_id;
    std::vector<ManifestImage> images;
};

// Parses {"dataset_id": ..., "images": [{"id": ..., "path": ...}, ...]}.
// Relative image paths are resolved against the manifest's directory.
// Duplicate ids within a manifest are an error.
DatasetManifest load_manifest(const std::filesystem::path& json_path);

}  // namespace ngdc
