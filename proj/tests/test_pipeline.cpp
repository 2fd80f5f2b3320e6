#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ngdc/error.hpp"
#include "ngdc/pipeline.hpp"
#include "ngdc/reference.hpp"
#include "ngdc/rng.hpp"
#include "test_util.hpp"

using namespace ngdc;
using testutil::TempDir;

namespace {

// Planted distillation corpus. Target: 3 images of 160x160 (100 patches each
// at s=16, 300 total, so bottom 2% selects 6). Six near-flat patches with
// quantization-exact deltas k/255 for k in {3..8} span the CATI; auxiliary
// images are busy everywhere except `planted_aux` of them, which carry one
// patch strictly inside the interval (k in {4..7}).
struct PlantedCorpus {
    DatasetManifest target;
    DatasetManifest aux;
    std::vector<size_t> planted_aux;  // indices into aux manifest
};

PlantedCorpus make_planted(const std::filesystem::path& root) {
    const int s = 16;
    std::vector<Image> target_images;
    const int target_deltas[3][2] = {{3, 8}, {4, 7}, {5, 6}};
    for (int i = 0; i < 3; ++i) {
        Image img(160, 160, 3);
        int cell = 0;
        for (int r = 0; r < 160; r += s)
            for (int c = 0; c < 160; c += s)
                testutil::fill_busy_patch(img, r, c, s, 9000 + i * 100 + cell++);
        testutil::plant_flat_patch(img, 32, 48, s, 0.5f,
                                   target_deltas[i][0] / 255.0f);
        testutil::plant_flat_patch(img, 96, 112, s, 0.5f,
                                   target_deltas[i][1] / 255.0f);
        target_images.push_back(std::move(img));
    }

    PlantedCorpus corpus;
    corpus.planted_aux = {2, 5, 9, 13, 17};
    const int aux_deltas[5] = {4, 5, 5, 6, 7};
    std::vector<Image> aux_images;
    for (size_t i = 0; i < 20; ++i) {
        Image img(80, 80, 3);
        int cell = 0;
        for (int r = 0; r < 80; r += s)
            for (int c = 0; c < 80; c += s)
                testutil::fill_busy_patch(img, r, c, s, 20000 + i * 100 + cell++);
        const auto it = std::find(corpus.planted_aux.begin(),
                                  corpus.planted_aux.end(), i);
        if (it != corpus.planted_aux.end()) {
            const int k = aux_deltas[it - corpus.planted_aux.begin()];
            testutil::plant_flat_patch(img, 48, 16, s, 0.5f, k / 255.0f);
        }
        aux_images.push_back(std::move(img));
    }

    corpus.target = testutil::write_dataset(root / "target", "target", target_images);
    corpus.aux = testutil::write_dataset(root / "aux", "aux", aux_images);
    return corpus;
}

DistillConfig planted_config() {
    DistillConfig cfg;
    cfg.scale = 4;
    cfg.patch_size = 16;
    cfg.bottom_frac = 0.02;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("empty auxiliary dataset degenerates to the target pipeline") {
    TempDir dir("distill_noaux");
    std::vector<Image> images;
    for (int i = 0; i < 3; ++i)
        images.push_back(testutil::random_image(400 + i, 64, 64, 3));
    const auto target = testutil::write_dataset(dir.path(), "t", images);

    DistillConfig cfg;
    cfg.scale = 4;
    cfg.patch_size = 16;
    cfg.bottom_frac = 0.1;
    const DistilledDataset d = distill(target, DatasetManifest{}, cfg);

    REQUIRE(d.pairs.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(d.pairs[i].image_id == "img" + std::to_string(i));
        CHECK(d.pairs[i].origin_dataset == "t");
        CHECK(d.pairs[i].hr.height == 16);
        CHECK(d.pairs[i].lr.height == 4);
    }
    CHECK(d.bank.source_datasets == std::vector<std::string>{"t"});
}

TEST_CASE("planted auxiliary images are selected exactly") {
    TempDir dir("distill_planted");
    const PlantedCorpus corpus = make_planted(dir.path());
    const DistilledDataset d = distill(corpus.target, corpus.aux, planted_config());

    // 3 target pairs + 5 planted auxiliary pairs, target first.
    REQUIRE(d.pairs.size() == 8);
    std::set<std::string> aux_ids;
    for (size_t i = 0; i < d.pairs.size(); ++i) {
        if (i < 3) {
            CHECK(d.pairs[i].origin_dataset == "target");
        } else {
            CHECK(d.pairs[i].origin_dataset == "aux");
            aux_ids.insert(d.pairs[i].image_id);
        }
    }
    std::set<std::string> expect_ids;
    for (size_t idx : corpus.planted_aux)
        expect_ids.insert("img" + std::to_string(idx));
    CHECK(aux_ids == expect_ids);

    // Merged bank: 6 target + 5 auxiliary planted patches.
    CHECK(d.bank.entries.size() == 11);
    CHECK(d.bank.source_datasets ==
          std::vector<std::string>{"target", "aux"});

    // Subset law, checked by exhaustive re-scan of every auxiliary image.
    for (size_t i = 0; i < corpus.aux.images.size(); ++i) {
        const Image img = load_image(corpus.aux.images[i].path);
        bool matches = false;
        for (const Patch& p : extract_patch_grid(img, 16))
            if (classify_patch(patch_stats(p), d.bank.cati) == PatchClass::Noise)
                matches = true;
        const bool selected = expect_ids.count("img" + std::to_string(i)) > 0;
        CHECK(matches == selected);
    }
}

TEST_CASE("distill matches the straight-line reference end to end") {
    TempDir dir("distill_ref");
    const PlantedCorpus corpus = make_planted(dir.path());
    const DistillConfig cfg = planted_config();
    const DistilledDataset fast = distill(corpus.target, corpus.aux, cfg);
    const DistilledDataset slow =
        ref::distill_straightline(corpus.target, corpus.aux, cfg);

    CHECK(fast.bank.cati.sigma_lo == slow.bank.cati.sigma_lo);
    CHECK(fast.bank.cati.sigma_hi == slow.bank.cati.sigma_hi);
    CHECK(fast.bank.cati.mean_lo == slow.bank.cati.mean_lo);
    CHECK(fast.bank.cati.mean_hi == slow.bank.cati.mean_hi);

    REQUIRE(fast.pairs.size() == slow.pairs.size());
    for (size_t i = 0; i < fast.pairs.size(); ++i) {
        CHECK(fast.pairs[i].image_id == slow.pairs[i].image_id);
        CHECK(fast.pairs[i].origin_dataset == slow.pairs[i].origin_dataset);
        CHECK(fast.pairs[i].hr.data == slow.pairs[i].hr.data);
        CHECK(fast.pairs[i].lr.data == slow.pairs[i].lr.data);
    }

    REQUIRE(fast.bank.entries.size() == slow.bank.entries.size());
    for (size_t i = 0; i < fast.bank.entries.size(); ++i) {
        CHECK(fast.bank.entries[i].file_name == slow.bank.entries[i].file_name);
        CHECK(fast.bank.entries[i].source_id == slow.bank.entries[i].source_id);
        CHECK(fast.bank.entries[i].row == slow.bank.entries[i].row);
        CHECK(fast.bank.entries[i].col == slow.bank.entries[i].col);
        CHECK(fast.bank.entries[i].stats.sigma == slow.bank.entries[i].stats.sigma);
        CHECK(fast.bank.entries[i].stats.mean == slow.bank.entries[i].stats.mean);
        CHECK(fast.bank.entries[i].pixels.data == slow.bank.entries[i].pixels.data);
    }
    CHECK(fast.bank.source_datasets == slow.bank.source_datasets);
}

TEST_CASE("widening bottom_frac never drops a selected auxiliary image") {
    TempDir dir("distill_mono");
    std::vector<Image> timages, aimages;
    for (int i = 0; i < 2; ++i)
        timages.push_back(testutil::random_image(600 + i, 64, 64, 3));
    for (int i = 0; i < 6; ++i)
        aimages.push_back(testutil::random_image(700 + i, 64, 64, 3));
    const auto target = testutil::write_dataset(dir.path() / "t", "t", timages);
    const auto aux = testutil::write_dataset(dir.path() / "a", "a", aimages);

    DistillConfig narrow = planted_config();
    narrow.bottom_frac = 0.05;
    DistillConfig wide = narrow;
    wide.bottom_frac = 0.5;

    const auto selected = [](const DistilledDataset& d) {
        std::set<std::string> ids;
        for (const auto& p : d.pairs)
            if (p.origin_dataset == "a") ids.insert(p.image_id);
        return ids;
    };
    const auto narrow_ids = selected(distill(target, aux, narrow));
    const auto wide_ids = selected(distill(target, aux, wide));
    CHECK(std::includes(wide_ids.begin(), wide_ids.end(), narrow_ids.begin(),
                        narrow_ids.end()));
}

TEST_CASE("every target image appears in exactly one pair") {
    TempDir dir("distill_cov");
    const PlantedCorpus corpus = make_planted(dir.path());
    const DistilledDataset d = distill(corpus.target, corpus.aux, planted_config());
    std::multiset<std::string> target_ids;
    for (const auto& p : d.pairs)
        if (p.origin_dataset == "target") target_ids.insert(p.image_id);
    CHECK(target_ids.size() == corpus.target.images.size());
    for (const auto& mi : corpus.target.images)
        CHECK(target_ids.count(mi.id) == 1);
}

TEST_CASE("distill aborts on unreadable images") {
    TempDir dir("distill_err");
    std::vector<Image> images = {testutil::random_image(800, 64, 64, 3)};
    auto target = testutil::write_dataset(dir.path(), "t", images);
    target.images.push_back({"ghost", dir / "missing.png"});
    CHECK_THROWS_WITH_AS(distill(target, DatasetManifest{}, planted_config()),
                         doctest::Contains("missing.png"), Error);

    DatasetManifest empty;
    empty.dataset_id = "none";
    CHECK_THROWS_WITH_AS(distill(empty, DatasetManifest{}, planted_config()),
                         doctest::Contains("empty dataset"), Error);
}

TEST_CASE("emit without injection writes pass-through LR files") {
    TempDir dir("emit_plain");
    std::vector<Image> images = {testutil::random_image(900, 64, 64, 3),
                                 testutil::random_image(901, 64, 64, 3)};
    const auto target = testutil::write_dataset(dir.path() / "ds", "t", images);
    DistillConfig cfg = planted_config();
    cfg.bottom_frac = 0.1;
    DistilledDataset d = distill(target, DatasetManifest{}, cfg);

    const auto manifest_path = emit_pairs(d, dir / "out", false, 0);
    CHECK(manifest_path == dir / "out" / "pairs.json");
    for (const auto& p : d.pairs) {
        save_image(p.lr, dir / "direct.png");
        CHECK(testutil::read_bytes(dir / "out" / p.lr_path) ==
              testutil::read_bytes(dir / "direct.png"));
    }

    // Re-emission is byte-identical.
    DistilledDataset d2 = distill(target, DatasetManifest{}, cfg);
    emit_pairs(d2, dir / "out2", false, 0);
    CHECK(testutil::read_bytes(dir / "out" / "pairs.json") ==
          testutil::read_bytes(dir / "out2" / "pairs.json"));
}

TEST_CASE("constant-patch bank injects as a byte-identical pass-through") {
    TempDir dir("emit_const");
    std::vector<Image> images = {testutil::random_image(910, 64, 64, 3)};
    const auto target = testutil::write_dataset(dir.path() / "ds", "t", images);
    DistillConfig cfg = planted_config();
    cfg.bottom_frac = 0.1;
    DistilledDataset d = distill(target, DatasetManifest{}, cfg);

    // Replace the bank with a single constant patch: zero residual.
    d.bank.entries.clear();
    BankEntry e;
    e.file_name = "000000.pat";
    e.source_id = "t/img0";
    e.pixels = Image(16, 16, 3, 0.25f);
    d.bank.entries.push_back(std::move(e));

    emit_pairs(d, dir / "inj", true, 42);
    DistilledDataset plain = distill(target, DatasetManifest{}, cfg);
    emit_pairs(plain, dir / "plain", false, 42);
    CHECK(testutil::read_bytes(dir / "inj" / "lr" / "t_img0.png") ==
          testutil::read_bytes(dir / "plain" / "lr" / "t_img0.png"));
}

TEST_CASE("seeded injection matches the per-image oracle") {
    TempDir dir("emit_inj");
    const PlantedCorpus corpus = make_planted(dir.path());
    const DistillConfig cfg = planted_config();
    DistilledDataset d = distill(corpus.target, corpus.aux, cfg);
    DistilledDataset copy = distill(corpus.target, corpus.aux, cfg);

    const uint64_t seed = 77;
    emit_pairs(d, dir / "out", true, seed);

    for (const auto& p : copy.pairs) {
        const std::string key = p.origin_dataset + "/" + p.image_id;
        const Patch noise = sample_noise(copy.bank, derive_seed(seed, key, 0));
        const Image expect = inject_noise(p.lr, noise, derive_seed(seed, key, 1));
        save_image(expect, dir / "expected.png");
        const std::string emitted = "lr/" + p.origin_dataset + "_" + p.image_id + ".png";
        CHECK(testutil::read_bytes(dir / "out" / emitted) ==
              testutil::read_bytes(dir / "expected.png"));
    }
}

TEST_CASE("pairs.json embeds the config echo and format version") {
    TempDir dir("emit_manifest");
    std::vector<Image> images = {testutil::random_image(920, 64, 64, 3)};
    const auto target = testutil::write_dataset(dir.path() / "ds", "t", images);
    DistillConfig cfg = planted_config();
    cfg.bottom_frac = 0.1;
    cfg.seed = 99;
    DistilledDataset d = distill(target, DatasetManifest{}, cfg);
    emit_pairs(d, dir / "out", false, cfg.seed);

    const std::string json = testutil::read_bytes(dir / "out" / "pairs.json");
    CHECK(json.find("\"version\": 1") != std::string::npos);
    CHECK(json.find("\"scale\": 4") != std::string::npos);
    CHECK(json.find("\"patch_size\": 16") != std::string::npos);
    CHECK(json.find("\"seed\": 99") != std::string::npos);
    CHECK(json.find("\"inject\": false") != std::string::npos);
    CHECK(json.find("\"target_dataset\": \"t\"") != std::string::npos);
}
