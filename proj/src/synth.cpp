#include "crowdseg/synth.hpp"

#include <algorithm>
#include <cmath>

#include "crowdseg/features.hpp"
#include "crowdseg/rng.hpp"
#include "crowdseg/tensor_io.hpp"

namespace crowdseg {

namespace {

// Per-band disparity factor; bands alternate between two depths.
int band_disparity(int y, int band_height) {
    return 1 + ((y / band_height) & 1);
}

bool separator_row(int y, int band_height) {
    return (y % band_height) >= band_height - 2;
}

RgbImage box_blur3(const RgbImage& img) {
    const int h = img.height(), w = img.width();
    RgbImage out(h, w);
    auto blur = [&](const ScalarMap& src, ScalarMap& dst) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        s += src.at(std::clamp(y + dy, 0, h - 1), std::clamp(x + dx, 0, w - 1));
                dst.at(y, x) = static_cast<float>(s / 9.0);
            }
        }
    };
    blur(img.r, out.r);
    blur(img.g, out.g);
    blur(img.b, out.b);
    return out;
}

}  // namespace

SynthScene generate_synth_scene(const SynthConfig& cfg) {
    if (cfg.size < 2 * cfg.band_height) throw DataError("synth: size must cover >= 2 bands");
    if (cfg.image_count < 2) throw DataError("synth: need at least 2 images");
    if (!cfg.static_scene && cfg.square * cfg.image_count > cfg.size + cfg.square)
        throw DataError("synth: square too large for non-overlapping vertical motion");

    const int s = cfg.size;
    Rng rng(cfg.seed);

    // Background texture in green/blue hues; the moving square is red, so
    // the two populations stay apart under feature normalization.
    RgbImage base(s, s);
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            base.r.at(y, x) = static_cast<float>(0.10 + 0.15 * rng.uniform());
            base.g.at(y, x) = static_cast<float>(0.30 + 0.50 * rng.uniform());
            base.b.at(y, x) = static_cast<float>(0.30 + 0.50 * rng.uniform());
        }
    }
    base = box_blur3(base);
    for (int y = 0; y < s; ++y) {
        if (!separator_row(y, cfg.band_height)) continue;
        for (int x = 0; x < s; ++x) {
            base.r.at(y, x) = 0.15f;
            base.g.at(y, x) = 0.18f;
            base.b.at(y, x) = 0.18f;
        }
    }

    SynthScene scene;
    scene.cfg = cfg;
    std::vector<int> cam_shift(cfg.image_count);
    for (int i = 0; i < cfg.image_count; ++i) cam_shift[i] = 3 * i;

    std::vector<int> sq_x(cfg.image_count, 0), sq_y(cfg.image_count, 0);
    for (int i = 0; i < cfg.image_count; ++i) {
        sq_y[i] = 2 + i * cfg.square;  // vertical motion: no row overlap between views
        sq_x[i] = 8 + ((5 * i) % std::max(1, s - cfg.square - 16));
    }

    for (int i = 0; i < cfg.image_count; ++i) {
        RgbImage img(s, s);
        for (int y = 0; y < s; ++y) {
            int shift = cam_shift[i] * band_disparity(y, cfg.band_height);
            for (int x = 0; x < s; ++x) {
                int sx = (x + shift) % s;  // cyclic: every background pixel stays matchable
                img.r.at(y, x) = base.r.at(y, sx);
                img.g.at(y, x) = base.g.at(y, sx);
                img.b.at(y, x) = base.b.at(y, sx);
            }
        }
        Mask truth(s, s, PixelClass::Static);
        if (!cfg.static_scene) {
            for (int y = sq_y[i]; y < std::min(s, sq_y[i] + cfg.square); ++y) {
                for (int x = sq_x[i]; x < std::min(s, sq_x[i] + cfg.square); ++x) {
                    img.r.at(y, x) = static_cast<float>(0.80 + 0.15 * rng.uniform());
                    img.g.at(y, x) = static_cast<float>(0.05 + 0.08 * rng.uniform());
                    img.b.at(y, x) = static_cast<float>(0.05 + 0.05 * rng.uniform());
                    truth.at(y, x) = PixelClass::Dynamic;
                }
            }
        }
        scene.features.push_back(builtin_features(img, cfg.feature_window));
        scene.images.push_back(std::move(img));
        scene.truths.push_back(std::move(truth));
    }

    // Initial score maps: ground truth plus salt noise.
    for (int i = 0; i < cfg.image_count; ++i) {
        ScalarMap score(s, s);
        for (std::size_t pix = 0; pix < score.data.size(); ++pix) {
            score.data[pix] = scene.truths[i].data[pix] == PixelClass::Dynamic ? 1.0f : 0.0f;
            if (rng.uniform() < cfg.salt_noise) score.data[pix] = 1.0f;
        }
        scene.scores.push_back(std::move(score));
    }

    // Sparse matches per pair, from the known background flow plus outliers.
    for (int i = 0; i < cfg.image_count; ++i) {
        for (int j = i + 1; j < cfg.image_count; ++j) {
            SparseMatches matches;
            int rel = cam_shift[i] - cam_shift[j];
            for (int k = 0; k < cfg.matches_per_pair; ++k) {
                int y = rng.uniform_int(s);
                int x = rng.uniform_int(s);
                if (rng.uniform() < cfg.outlier_fraction) {
                    matches.push_back({static_cast<double>(x), static_cast<double>(y),
                                       static_cast<double>(rng.uniform_int(s)),
                                       static_cast<double>(rng.uniform_int(s))});
                } else {
                    int x1 = ((x + rel * band_disparity(y, cfg.band_height)) % s + s) % s;
                    matches.push_back({static_cast<double>(x), static_cast<double>(y),
                                       static_cast<double>(x1), static_cast<double>(y)});
                }
            }
            scene.matches.push_back({{i, j}, std::move(matches)});
        }
    }
    return scene;
}

SceneManifest write_synth_scene(const SynthScene& scene, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    SceneManifest manifest;
    manifest.scene = scene.cfg.static_scene ? "synth-static" : "synth";
    manifest.base_dir = dir;
    manifest.params["lambda"] = scene.cfg.manifest_lambda;

    for (std::size_t i = 0; i < scene.images.size(); ++i) {
        ImageRecord rec;
        rec.image = dir / ("im" + std::to_string(i) + ".ppm");
        rec.features = dir / ("feat" + std::to_string(i) + ".fmap");
        rec.scores = dir / ("scores" + std::to_string(i) + ".fmap");
        rec.truth = dir / ("truth" + std::to_string(i) + ".pgm");
        write_ppm(scene.images[i], rec.image);
        write_tensor(scene.features[i], rec.features);
        write_tensor(scene.scores[i], rec.scores);
        write_mask(scene.truths[i], *rec.truth);
        manifest.images.push_back(std::move(rec));
    }
    for (const auto& [pair, matches] : scene.matches) {
        MatchRecord rec;
        rec.a = pair.first;
        rec.b = pair.second;
        rec.file = dir / ("matches_" + std::to_string(pair.first) + "_" +
                          std::to_string(pair.second) + ".txt");
        write_matches(matches, rec.file);
        manifest.matches.push_back(std::move(rec));
    }
    write_manifest(manifest, dir / "manifest.json");
    return manifest;
}

}  // namespace crowdseg
