#include "ngdc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ngdc/error.hpp"

namespace ngdc::ref {

namespace {

double cubic_kernel(double t) {
    const double at = std::abs(t);
    if (at <= 1.0) return (1.5 * at - 2.5) * at * at + 1.0;
    if (at < 2.0) return ((-0.5 * at + 2.5) * at - 4.0) * at + 2.0;
    return 0.0;
}

int clamp_index(int j, int n) { return j < 0 ? 0 : (j >= n ? n - 1 : j); }

}  // namespace

Image bicubic_resize_dense(const Image& img, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1)
        throw Error("bicubic_resize_dense: zero-sized target");
    const int sh = img.height, sw = img.width, c = img.channels;
    const double denom_y = 2.0 * std::max(sh, target_h);
    const double denom_x = 2.0 * std::max(sw, target_w);
    const double scale_y = sh > target_h ? static_cast<double>(sh) / target_h : 1.0;
    const double scale_x = sw > target_w ? static_cast<double>(sw) / target_w : 1.0;

    Image out(target_h, target_w, c);
    for (int oy = 0; oy < target_h; ++oy) {
        const double cy = (oy + 0.5) * (static_cast<double>(sh) / target_h) - 0.5;
        const int ylo = static_cast<int>(std::floor(cy - 2.0 * scale_y)) - 2;
        const int yhi = static_cast<int>(std::ceil(cy + 2.0 * scale_y)) + 2;
        for (int ox = 0; ox < target_w; ++ox) {
            const double cx = (ox + 0.5) * (static_cast<double>(sw) / target_w) - 0.5;
            const int xlo = static_cast<int>(std::floor(cx - 2.0 * scale_x)) - 2;
            const int xhi = static_cast<int>(std::ceil(cx + 2.0 * scale_x)) + 2;
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                double wsum = 0.0;
                for (int jy = ylo; jy <= yhi; ++jy) {
                    const double ty =
                        ((2.0 * jy + 1.0) * target_h - (2.0 * oy + 1.0) * sh) / denom_y;
                    const double wy = cubic_kernel(ty);
                    if (wy == 0.0) continue;
                    for (int jx = xlo; jx <= xhi; ++jx) {
                        const double tx =
                            ((2.0 * jx + 1.0) * target_w - (2.0 * ox + 1.0) * sw) /
                            denom_x;
                        const double wx = cubic_kernel(tx);
                        if (wx == 0.0) continue;
                        const double w = wy * wx;
                        acc += w * img.at(clamp_index(jy, sh), clamp_index(jx, sw), ch);
                        wsum += w;
                    }
                }
                out.at(oy, ox, ch) =
                    static_cast<float>(std::clamp(acc / wsum, 0.0, 1.0));
            }
        }
    }
    return out;
}

PatchStats two_pass_stats(const Patch& p) {
    const Image luma = to_luma(p.pixels);
    const double n = static_cast<double>(luma.data.size());
    double mean = 0.0;
    for (float v : luma.data) mean += v;
    mean /= n;
    double var = 0.0;
    for (float v : luma.data) {
        const double d = static_cast<double>(v) - mean;
        var += d * d;
    }
    var /= n;
    PatchStats st;
    st.mean = mean;
    st.sigma = var;
    return st;
}

Cati compute_cati_sorted(const std::vector<PatchStats>& stats,
                         double bottom_frac) {
    if (stats.empty()) throw Error("compute_cati_sorted: empty list");
    std::vector<PatchStats> sorted = stats;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PatchStats& a, const PatchStats& b) {
                         if (a.sigma != b.sigma) return a.sigma < b.sigma;
                         return a.mean < b.mean;
                     });
    const size_t k = cati_selection_count(stats.size(), bottom_frac);
    std::vector<PatchStats> survivors;
    for (size_t i = 0; i < k; ++i)
        if (sorted[i].mean > 0.0) survivors.push_back(sorted[i]);
    if (survivors.empty()) throw Error("empty CATI (reference)");
    Cati c;
    c.sigma_lo = c.sigma_hi = survivors[0].sigma;
    c.mean_lo = c.mean_hi = survivors[0].mean;
    for (const PatchStats& s : survivors) {
        c.sigma_lo = std::min(c.sigma_lo, s.sigma);
        c.sigma_hi = std::max(c.sigma_hi, s.sigma);
        c.mean_lo = std::min(c.mean_lo, s.mean);
        c.mean_hi = std::max(c.mean_hi, s.mean);
    }
    return c;
}

Image inject_tiled(const Image& lr, const Image& patch, int off_row,
                   int off_col) {
    const int s = patch.height;
    std::vector<double> mean(patch.channels, 0.0);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < patch.channels; ++c) mean[c] += patch.at(y, x, c);
    for (double& m : mean) m /= static_cast<double>(s) * s;

    // Residual field assembled tile by tile, then added and clamped.
    std::vector<double> field(static_cast<size_t>(lr.height) * lr.width *
                              lr.channels);
    for (int ty = -off_row; ty < lr.height; ty += s) {
        for (int tx = -off_col; tx < lr.width; tx += s) {
            for (int y = 0; y < s; ++y) {
                const int iy = ty + y;
                if (iy < 0 || iy >= lr.height) continue;
                for (int x = 0; x < s; ++x) {
                    const int ix = tx + x;
                    if (ix < 0 || ix >= lr.width) continue;
                    for (int c = 0; c < lr.channels; ++c) {
                        const int pc = patch.channels == 1 ? 0 : c;
                        field[(static_cast<size_t>(iy) * lr.width + ix) *
                                  lr.channels +
                              c] = static_cast<double>(patch.at(y, x, pc)) - mean[pc];
                    }
                }
            }
        }
    }
    Image out(lr.height, lr.width, lr.channels);
    for (size_t i = 0; i < out.data.size(); ++i) {
        const double v = static_cast<double>(lr.data[i]) + field[i];
        out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

double mse(const Image& a, const Image& b) {
    if (a.data.size() != b.data.size()) throw Error("mse: shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data.size());
}

double ssim_windowed(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw Error("ssim_windowed: shape mismatch");
    constexpr int win = 11;
    constexpr int rad = win / 2;
    if (a.height < win || a.width < win)
        throw Error("ssim_windowed: image smaller than the window");
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;

    double weight[win][win];
    double wsum = 0.0;
    for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
            const double dy = i - rad, dx = j - rad;
            weight[i][j] = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
            wsum += weight[i][j];
        }
    }
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) weight[i][j] /= wsum;

    const Image la = to_luma(a);
    const Image lb = to_luma(b);
    double total = 0.0;
    int windows = 0;
    for (int y = 0; y + win <= la.height; ++y) {
        for (int x = 0; x + win <= la.width; ++x) {
            double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (int i = 0; i < win; ++i) {
                for (int j = 0; j < win; ++j) {
                    const double va = la.at(y + i, x + j, 0);
                    const double vb = lb.at(y + i, x + j, 0);
                    const double w = weight[i][j];
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return total / windows;
}

DistilledDataset distill_straightline(const DatasetManifest& target,
                                      const DatasetManifest& aux,
                                      const DistillConfig& cfg) {
    if (target.images.empty()) throw Error("empty dataset (reference)");

    DistilledDataset out;
    out.config = cfg;
    out.target_id = target.dataset_id;
    out.aux_id = aux.dataset_id;
    out.bank.patch_size = cfg.patch_size;
    out.bank.bottom_frac = cfg.bottom_frac;

    // One flat scan for the CATI.
    std::vector<PatchStats> all_stats;
    for (const auto& mi : target.images) {
        const Image img = load_image(mi.path);
        for (const Patch& p : extract_patch_grid(img, cfg.patch_size))
            all_stats.push_back(patch_stats(p));
    }
    out.bank.cati = compute_cati_sorted(all_stats, cfg.bottom_frac);
    out.bank.source_datasets = {target.dataset_id};

    const auto inside = [&](const PatchStats& s) {
        return s.sigma >= out.bank.cati.sigma_lo &&
               s.sigma <= out.bank.cati.sigma_hi &&
               s.mean >= out.bank.cati.mean_lo && s.mean <= out.bank.cati.mean_hi;
    };

    for (const auto& mi : target.images) {
        const Image img = load_image(mi.path);
        const std::string source_id = target.dataset_id + "/" + mi.id;
        for (const Patch& p : extract_patch_grid(img, cfg.patch_size, source_id)) {
            const PatchStats st = patch_stats(p);
            if (!inside(st)) continue;
            out.bank.entries.push_back(
                BankEntry{"", st, source_id, p.row, p.col, p.pixels});
        }
        const DegradedPair dp = degrade_pair(img, cfg.scale);
        out.pairs.push_back(
            TrainingPair{mi.id, target.dataset_id, dp.hr, dp.lr, "", ""});
    }

    for (const auto& mi : aux.images) {
        const Image img = load_image(mi.path);
        const std::string source_id = aux.dataset_id + "/" + mi.id;
        bool matched = false;
        for (const Patch& p : extract_patch_grid(img, cfg.patch_size, source_id)) {
            const PatchStats st = patch_stats(p);
            if (!inside(st)) continue;
            matched = true;
            out.bank.entries.push_back(
                BankEntry{"", st, source_id, p.row, p.col, p.pixels});
        }
        if (matched) {
            const DegradedPair dp = degrade_pair(img, cfg.scale);
            out.pairs.push_back(
                TrainingPair{mi.id, aux.dataset_id, dp.hr, dp.lr, "", ""});
            if (out.bank.source_datasets.size() == 1)
                out.bank.source_datasets.push_back(aux.dataset_id);
        }
    }

    std::sort(out.bank.entries.begin(), out.bank.entries.end(),
              [](const BankEntry& a, const BankEntry& b) {
                  if (a.source_id != b.source_id) return a.source_id < b.source_id;
                  if (a.row != b.row) return a.row < b.row;
                  return a.col < b.col;
              });
    for (size_t i = 0; i < out.bank.entries.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%06zu.pat", i);
        out.bank.entries[i].file_name = buf;
    }

    // Pairs are not reordered: target images were appended in manifest order,
    // auxiliary selections afterwards, matching the pipeline's ordering rule.
    return out;
}

Tensor3 softmax_longdouble(const Tensor3& m) {
    Tensor3 out(m.height, m.width, m.channels);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            long double zmax = m.at(y, x, 0);
            for (int c = 1; c < m.channels; ++c)
                zmax = std::max<long double>(zmax, m.at(y, x, c));
            long double sum = 0.0L;
            std::vector<long double> e(m.channels);
            for (int c = 0; c < m.channels; ++c) {
                e[c] = expl(static_cast<long double>(m.at(y, x, c)) - zmax);
                sum += e[c];
            }
            for (int c = 0; c < m.channels; ++c)
                out.at(y, x, c) = static_cast<double>(e[c] / sum);
        }
    }
    return out;
}

}  // namespace ngdc::ref
