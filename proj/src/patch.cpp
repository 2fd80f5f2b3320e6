#include "ngdc/patch.hpp"

#include <string>

#include "ngdc/error.hpp"

namespace ngdc {

std::vector<std::pair<int, int>> grid_origins(int height, int width, int s) {
    std::vector<std::pair<int, int>> origins;
    const int rows = height / s;
    const int cols = width / s;
    origins.reserve(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) origins.emplace_back(r * s, c * s);
    return origins;
}

Patch extract_patch(const Image& img, int row, int col, int s,
                    const std::string& source_id) {
    if (row < 0 || col < 0 || row + s > img.height || col + s > img.width)
        throw Error("extract_patch: window outside image");
    Patch p;
    p.pixels = Image(s, s, img.channels);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < img.channels; ++c)
                p.pixels.at(y, x, c) = img.at(row + y, col + x, c);
    p.source_id = source_id;
    p.row = row;
    p.col = col;
    return p;
}

std::vector<Patch> extract_patch_grid(const Image& img, int s,
                                      const std::string& source_id) {
    if (s < 2) throw Error("patch size must be >= 2, got " + std::to_string(s));
    std::vector<Patch> patches;
    for (auto [row, col] : grid_origins(img.height, img.width, s))
        patches.push_back(extract_patch(img, row, col, s, source_id));
    return patches;
}

PatchStats rect_luma_stats(const Image& luma, int row, int col, int s) {
    if (luma.channels != 1) throw Error("rect_luma_stats: expects 1-channel luma");
    if (row < 0 || col < 0 || row + s > luma.height || col + s > luma.width)
        throw Error("rect_luma_stats: window outside image");
    double sum = 0.0;
    double sumsq = 0.0;
    for (int y = row; y < row + s; ++y) {
        for (int x = col; x < col + s; ++x) {
            const double v = luma.at(y, x, 0);
            sum += v;
            sumsq += v * v;
        }
    }
    const double n = static_cast<double>(s) * s;
    PatchStats st;
    st.mean = sum / n;
    st.sigma = sumsq / n - st.mean * st.mean;
    if (st.sigma < 0.0) st.sigma = 0.0;
    if (st.sigma > 0.25) st.sigma = 0.25;
    return st;
}

PatchStats patch_stats(const Patch& p) {
    if (p.pixels.height != p.pixels.width)
        throw Error("patch_stats: patch must be square");
    const Image luma = to_luma(p.pixels);
    return rect_luma_stats(luma, 0, 0, p.pixels.height);
}

}  // namespace ngdc
