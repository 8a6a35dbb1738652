#include "crowdseg/manifest.hpp"

#include <fstream>
#include <sstream>

#include "crowdseg/tensor_io.hpp"

namespace crowdseg {

const MatchRecord* SceneManifest::find_matches(int a, int b) const {
    for (const auto& m : matches) {
        if ((m.a == a && m.b == b) || (m.a == b && m.b == a)) return &m;
    }
    return nullptr;
}

SceneManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }

    SceneManifest m;
    m.base_dir = path.parent_path();
    try {
        m.scene = j.value("scene", std::string("unnamed"));
        m.feature_scale = j.value("feature_scale", 1);
        if (m.feature_scale < 1) throw DataError("feature_scale must be >= 1");
        if (!j.contains("images") || !j["images"].is_array() || j["images"].empty())
            throw DataError("manifest needs a non-empty 'images' array");
        for (const auto& rec : j["images"]) {
            ImageRecord r;
            r.image = m.base_dir / rec.at("image").get<std::string>();
            r.features = m.base_dir / rec.at("features").get<std::string>();
            r.scores = m.base_dir / rec.at("scores").get<std::string>();
            if (rec.contains("truth"))
                r.truth = m.base_dir / rec.at("truth").get<std::string>();
            m.images.push_back(std::move(r));
        }
        for (const auto& rec : j.value("matches", nlohmann::json::array())) {
            MatchRecord r;
            r.a = rec.at("a").get<int>();
            r.b = rec.at("b").get<int>();
            r.file = m.base_dir / rec.at("file").get<std::string>();
            int n = static_cast<int>(m.images.size());
            if (r.a < 0 || r.b < 0 || r.a >= n || r.b >= n || r.a == r.b) {
                std::ostringstream os;
                os << "match record (" << r.a << "," << r.b << ") references bad image indices";
                throw DataError(os.str());
            }
            m.matches.push_back(std::move(r));
        }
        m.params = j.value("params", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad manifest: " + e.what());
    }
    return m;
}

void write_manifest(const SceneManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["scene"] = manifest.scene;
    j["feature_scale"] = manifest.feature_scale;
    nlohmann::json images = nlohmann::json::array();
    for (const auto& r : manifest.images) {
        nlohmann::json rec;
        rec["image"] = r.image.filename().string();
        rec["features"] = r.features.filename().string();
        rec["scores"] = r.scores.filename().string();
        if (r.truth) rec["truth"] = r.truth->filename().string();
        images.push_back(rec);
    }
    j["images"] = images;
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& r : manifest.matches)
        matches.push_back({{"a", r.a}, {"b", r.b}, {"file", r.file.filename().string()}});
    j["matches"] = matches;
    j["params"] = manifest.params;

    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError(path.string() + ": write failure");
}

LoadedScene load_scene(const SceneManifest& manifest, const LoadOptions& opts) {
    LoadedScene scene;
    scene.manifest = manifest;
    for (std::size_t i = 0; i < manifest.images.size(); ++i) {
        const auto& rec = manifest.images[i];
        RgbImage img = read_image(rec.image);
        FeatureMap feat = read_feature_map(rec.features);
        if (manifest.feature_scale > 1) feat = upscale_nearest(feat, manifest.feature_scale);
        auto dims_bad = [&](int h, int w) { return h != img.height() || w != img.width(); };
        if (dims_bad(feat.height, feat.width)) {
            std::ostringstream os;
            os << rec.features.string() << ": feature map is " << feat.height << "x" << feat.width
               << " but image " << rec.image.string() << " is " << img.height() << "x"
               << img.width() << " (feature_scale " << manifest.feature_scale << ")";
            throw DataError(os.str());
        }
        if (!scene.features.empty() && feat.depth != scene.features[0].depth)
            throw DataError(rec.features.string() + ": feature depth differs from the rest of the scene");

        if (opts.need_scores) {
            ScalarMap s = read_scalar_map(rec.scores);
            if (dims_bad(s.height, s.width))
                throw DataError(rec.scores.string() + ": score map dimensions differ from the image");
            require_score_map(s, rec.scores.string());
            scene.scores.push_back(std::move(s));
        }

        if (rec.truth) {
            Mask t = read_mask(*rec.truth);
            if (dims_bad(t.height, t.width))
                throw DataError(rec.truth->string() + ": mask dimensions differ from the image");
            scene.truths.emplace_back(std::move(t));
        } else {
            if (opts.need_truths)
                throw DataError(rec.image.string() + ": ground-truth mask required but not declared");
            scene.truths.emplace_back(std::nullopt);
        }

        scene.images.push_back(std::move(img));
        scene.features.push_back(std::move(feat));
    }
    return scene;
}

}  // namespace crowdseg
