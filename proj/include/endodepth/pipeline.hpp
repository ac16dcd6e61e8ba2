// Dataset generation: seeded procedural scenes rendered to disk with
// manifests. Synthetic datasets hold grayscale raster frames; cinematic
// datasets hold multi-style path-traced frames sharing one depth raster per
// scene. Scene splits are assigned by contiguous scene ranges, so scene ids
// partition across splits by construction.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "endodepth/cinematic.hpp"
#include "endodepth/config.hpp"
#include "endodepth/dataset.hpp"
#include "endodepth/raster.hpp"

namespace endo {

namespace detail {

inline std::uint64_t frame_seed(std::uint64_t seed, int scene_id,
                                int pose_index) {
    return hash_combine(hash_combine(seed, 0x6672616d65ULL),
                        (static_cast<std::uint64_t>(scene_id) << 16) ^
                            static_cast<std::uint64_t>(pose_index));
}

}  // namespace detail

// Generates `count` grayscale raster frames over seeded scenes, walking each
// scene's trajectory. Scenes are numbered scene_base, scene_base+1, ...; the
// leading scenes form the train split and the last val_fraction of scenes
// the val split.
inline Manifest gen_synthetic(const RunConfig& cfg,
                              const std::filesystem::path& out_dir,
                              const std::string& name, int count,
                              std::uint64_t seed, int scene_base = 0,
                              int threads = 1) {
    validate_config(cfg);
    if (count < 1) throw ParameterError("count must be >= 1");
    int poses = cfg.poses_per_scene;
    int n_scenes = (count + poses - 1) / poses;
    int n_val = n_scenes > 1
                    ? static_cast<int>(cfg.val_fraction * n_scenes + 0.5)
                    : 0;
    if (n_val >= n_scenes) n_val = n_scenes - 1;
    int n_train = n_scenes - n_val;

    Manifest m;
    m.name = name;
    m.config_hash = config_hash(cfg);
    LightRig rig = default_light_rig(cfg.light_power);
    int made = 0;
    for (int s = 0; s < n_scenes && made < count; ++s) {
        int scene_id = scene_base + s;
        DensityVolume vol = make_scene_volume(cfg, seed, scene_id);
        std::vector<Pose> traj = make_scene_trajectory(cfg, seed, scene_id);
        m.sentinel = static_cast<float>(vol.diagonal_mm());
        const std::string split = s < n_train ? "train" : "val";
        for (int p = 0; p < poses && made < count; ++p) {
            Frame f = render_raster_frame(vol, cfg.camera, rig, traj[
                static_cast<std::size_t>(p)], cfg.raster, threads);
            f.scene_id = scene_id;
            f.style_id = 0;
            f.pose_index = p;
            f.seed = detail::frame_seed(seed, scene_id, p);
            m.records.push_back(save_frame(f, out_dir, split));
            ++made;
        }
    }
    write_manifest(m, out_dir);
    return m;
}

// Generates `scenes` cinematic scenes, each rendered in `n_styles` styles
// sharing one depth raster (one pose per scene, cycled along the scene's
// trajectory). The first scenes are train, then val_scenes, then
// test_scenes.
inline Manifest gen_cinematic(const RunConfig& cfg,
                              const std::filesystem::path& out_dir,
                              const std::string& name, int scenes,
                              int n_styles, int spp, std::uint64_t seed,
                              int scene_base = 100000, int val_scenes = 0,
                              int test_scenes = 0, int threads = 1) {
    validate_config(cfg);
    if (scenes < 1) throw ParameterError("scenes must be >= 1");
    if (n_styles < 1 || n_styles > static_cast<int>(cfg.styles.size()))
        throw ParameterError("styles must be in [1, styles.count]");
    if (val_scenes < 0 || test_scenes < 0 ||
        val_scenes + test_scenes >= scenes)
        throw ParameterError("val/test scene counts leave no training scenes");
    PathTracerConfig pc = cfg.path;
    pc.spp = spp;
    validate_path_config(pc);

    std::vector<RenderStyle> styles;
    for (int k = 0; k < n_styles; ++k) styles.push_back(make_render_style(cfg, k));

    Manifest m;
    m.name = name;
    m.config_hash = config_hash(cfg);
    LightRig rig = default_light_rig(cfg.light_power);
    int n_train = scenes - val_scenes - test_scenes;
    for (int s = 0; s < scenes; ++s) {
        int scene_id = scene_base + s;
        DensityVolume vol = make_scene_volume(cfg, seed, scene_id);
        std::vector<Pose> traj = make_scene_trajectory(cfg, seed, scene_id);
        m.sentinel = static_cast<float>(vol.diagonal_mm());
        int pose_index = s % cfg.poses_per_scene;
        const Pose& pose = traj[static_cast<std::size_t>(pose_index)];
        PathTracerConfig spc = pc;
        spc.seed = detail::frame_seed(seed, scene_id, pose_index);
        StyleSetResult set =
            render_style_set(vol, cfg.camera, rig, pose, styles, spc, threads);
        const std::string split = s < n_train           ? "train"
                                  : s < n_train + val_scenes ? "val"
                                                             : "test";
        for (auto& f : set.frames) {
            f.scene_id = scene_id;
            f.pose_index = pose_index;
            f.seed = spc.seed;
            m.records.push_back(save_frame(f, out_dir, split));
        }
    }
    write_manifest(m, out_dir);
    return m;
}

// Loads every frame of one split, sharing depth rasters within style groups.
// `limit` > 0 truncates to the first `limit` records (manifest order).
inline std::vector<Frame> load_split(const std::filesystem::path& dataset_dir,
                                     const Manifest& m, const std::string& split,
                                     int limit = 0) {
    auto records = split_records(m, split);
    if (limit > 0 && static_cast<std::size_t>(limit) < records.size())
        records.resize(static_cast<std::size_t>(limit));
    std::map<std::string, std::shared_ptr<const DepthMap>> cache;
    std::vector<Frame> out;
    out.reserve(records.size());
    for (const auto* r : records) out.push_back(load_frame(dataset_dir, *r, &cache));
    return out;
}

}  // namespace endo
