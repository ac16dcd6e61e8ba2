// Durable on-disk datasets: 8-bit PNG images, 32-bit float depth rasters
// with an explicit sentinel, and a line-oriented manifest grouping frames
// into scenes, styles, and train/val/test splits.
//
// Depth raster format "EDR1" (all little-endian):
//   bytes  0-3   magic "EDR1" (version embedded; unknown versions rejected)
//   bytes  4-7   uint32 width
//   bytes  8-11  uint32 height
//   bytes 12-15  float32 sentinel (value marking pixels with no valid depth)
//   then width*height float32 depth values in mm, row-major.
//
// Manifest format (text, one record per line, stable field order):
//   EDMANIFEST 1
//   name <dataset name>
//   units mm
//   sentinel <float>
//   config <hash>
//   frame <split> <scene_id> <style_id> <pose_index> <renderer> <seed> <image_path> <depth_path>
// Paths are relative to the dataset directory. scene_ids must partition
// across splits (leakage is an error at write and at read), and all frames
// of one (scene, pose) group must reference the same depth raster.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/frame.hpp"
#include "endodepth/image.hpp"
#include "endodepth/png_io.hpp"

namespace endo {

inline const char kDepthMagic[4] = {'E', 'D', 'R', '1'};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32(std::string& out, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(out, v);
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float get_f32(const unsigned char* p) {
    std::uint32_t v = get_u32(p);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline void save_depth_raster(const std::filesystem::path& path,
                              const DepthMap& depth) {
    if (depth.width < 1 || depth.height < 1)
        throw ShapeError("depth map must be non-empty");
    std::string bytes;
    bytes.reserve(16 + depth.data.size() * 4);
    bytes.append(kDepthMagic, 4);
    detail::put_u32(bytes, static_cast<std::uint32_t>(depth.width));
    detail::put_u32(bytes, static_cast<std::uint32_t>(depth.height));
    detail::put_f32(bytes, depth.sentinel);
    for (float v : depth.data) detail::put_f32(bytes, v);
    detail::write_file_atomic(path, bytes);
}

inline DepthMap load_depth_raster(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open depth raster: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(is)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 16)
        throw FormatError("depth raster header truncated: " + path.string());
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kDepthMagic, 3) != 0)
        throw FormatError("bad depth raster magic: " + path.string());
    if (p[3] != '1')
        throw FormatError("unsupported depth raster version: " + path.string());
    std::uint32_t w = detail::get_u32(p + 4);
    std::uint32_t h = detail::get_u32(p + 8);
    float sentinel = detail::get_f32(p + 12);
    if (w < 1 || h < 1 || w > 1u << 20 || h > 1u << 20)
        throw FormatError("bad depth raster dimensions: " + path.string());
    std::size_t need = 16 + static_cast<std::size_t>(w) * h * 4;
    if (bytes.size() != need)
        throw FormatError("depth raster payload size mismatch: " + path.string());
    DepthMap d(static_cast<int>(w), static_cast<int>(h), sentinel);
    for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = detail::get_f32(p + 16 + i * 4);
    return d;
}

// ---------------------------------------------------------------------------

inline const char* renderer_name(RendererKind k) {
    return k == RendererKind::raster ? "raster" : "cinematic";
}

inline RendererKind renderer_from_name(const std::string& s) {
    if (s == "raster") return RendererKind::raster;
    if (s == "cinematic") return RendererKind::cinematic;
    throw FormatError("unknown renderer kind: " + s);
}

struct FrameRecord {
    std::string split;  // train | val | test
    int scene_id = 0;
    int style_id = 0;
    int pose_index = 0;
    RendererKind renderer = RendererKind::raster;
    std::uint64_t seed = 0;
    std::string image_path;  // relative to the dataset directory
    std::string depth_path;  // relative to the dataset directory
};

struct Manifest {
    std::string name = "dataset";
    std::string units = "mm";
    float sentinel = 0.0f;
    std::string config_hash = "0";
    std::vector<FrameRecord> records;
};

inline void validate_split_name(const std::string& s) {
    if (s != "train" && s != "val" && s != "test")
        throw ParameterError("split must be train, val, or test: " + s);
}

// Enforces the manifest invariants: valid split names, no scene_id in more
// than one split (leakage), one shared depth path per (scene, pose) group,
// and whitespace-free paths.
inline void validate_manifest(const Manifest& m) {
    std::map<int, std::string> scene_split;
    std::map<std::pair<int, int>, std::string> group_depth;
    for (const auto& r : m.records) {
        validate_split_name(r.split);
        if (r.image_path.empty() || r.depth_path.empty() ||
            r.image_path.find_first_of(" \t\n") != std::string::npos ||
            r.depth_path.find_first_of(" \t\n") != std::string::npos)
            throw FormatError("frame paths must be non-empty and contain no whitespace");
        auto it = scene_split.find(r.scene_id);
        if (it == scene_split.end()) {
            scene_split.emplace(r.scene_id, r.split);
        } else if (it->second != r.split) {
            throw LeakageError("scene " + std::to_string(r.scene_id) +
                               " appears in splits " + it->second + " and " +
                               r.split);
        }
        auto key = std::make_pair(r.scene_id, r.pose_index);
        auto git = group_depth.find(key);
        if (git == group_depth.end()) {
            group_depth.emplace(key, r.depth_path);
        } else if (git->second != r.depth_path) {
            throw ConsistencyError(
                "frames of scene " + std::to_string(r.scene_id) + ", pose " +
                std::to_string(r.pose_index) +
                " reference different depth rasters");
        }
    }
}

inline std::filesystem::path manifest_path(const std::filesystem::path& dataset_dir) {
    return dataset_dir / "manifest";
}

inline void write_manifest(const Manifest& m,
                           const std::filesystem::path& dataset_dir) {
    validate_manifest(m);
    std::ostringstream os;
    char num[64];
    os << "EDMANIFEST 1\n";
    os << "name " << m.name << "\n";
    os << "units " << m.units << "\n";
    std::snprintf(num, sizeof(num), "%.9g", static_cast<double>(m.sentinel));
    os << "sentinel " << num << "\n";
    os << "config " << m.config_hash << "\n";
    for (const auto& r : m.records) {
        os << "frame " << r.split << ' ' << r.scene_id << ' ' << r.style_id
           << ' ' << r.pose_index << ' ' << renderer_name(r.renderer) << ' '
           << r.seed << ' ' << r.image_path << ' ' << r.depth_path << "\n";
    }
    detail::write_file_atomic(manifest_path(dataset_dir), os.str());
}

inline Manifest read_manifest(const std::filesystem::path& path_or_dir) {
    namespace fs = std::filesystem;
    fs::path path = path_or_dir;
    if (fs::is_directory(path)) path = manifest_path(path);
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty manifest");
    {
        std::istringstream hs(line);
        std::string magic;
        int version = 0;
        hs >> magic >> version;
        if (magic != "EDMANIFEST") throw FormatError("bad manifest magic");
        if (version != 1)
            throw FormatError("unsupported manifest version: " + line);
    }
    Manifest m;
    bool have_name = false, have_units = false, have_sentinel = false,
         have_config = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "name") {
            ls >> m.name;
            have_name = true;
        } else if (key == "units") {
            ls >> m.units;
            have_units = true;
        } else if (key == "sentinel") {
            double s;
            if (!(ls >> s)) throw FormatError("bad sentinel line: " + line);
            m.sentinel = static_cast<float>(s);
            have_sentinel = true;
        } else if (key == "config") {
            ls >> m.config_hash;
            have_config = true;
        } else if (key == "frame") {
            FrameRecord r;
            std::string renderer;
            if (!(ls >> r.split >> r.scene_id >> r.style_id >> r.pose_index >>
                  renderer >> r.seed >> r.image_path >> r.depth_path))
                throw FormatError("bad frame record: " + line);
            r.renderer = renderer_from_name(renderer);
            m.records.push_back(std::move(r));
        } else {
            throw FormatError("unknown manifest line: " + line);
        }
    }
    if (!have_name || !have_units || !have_sentinel || !have_config)
        throw FormatError("manifest missing required metadata");
    validate_manifest(m);
    return m;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string frame_stem(const Frame& f) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "s%06d_y%02d_p%03d", f.scene_id, f.style_id,
                  f.pose_index);
    return buf;
}

inline std::string depth_stem(int scene_id, int pose_index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "s%06d_p%03d", scene_id, pose_index);
    return buf;
}

}  // namespace detail

// Writes the frame image (PNG) and, if not already present, the shared depth
// raster of its (scene, pose) group. Returns the manifest record.
inline FrameRecord save_frame(const Frame& frame,
                              const std::filesystem::path& dataset_dir,
                              const std::string& split) {
    namespace fs = std::filesystem;
    validate_split_name(split);
    if (!frame.depth) throw ParameterError("frame has no depth map");
    if (frame.image.width != frame.depth->width ||
        frame.image.height != frame.depth->height)
        throw ShapeError("frame image and depth dimensions differ");
    std::error_code ec;
    fs::create_directories(dataset_dir / "frames", ec);
    if (ec) throw IoError("cannot create directory: " + (dataset_dir / "frames").string());
    fs::create_directories(dataset_dir / "depth", ec);
    if (ec) throw IoError("cannot create directory: " + (dataset_dir / "depth").string());

    FrameRecord r;
    r.split = split;
    r.scene_id = frame.scene_id;
    r.style_id = frame.style_id;
    r.pose_index = frame.pose_index;
    r.renderer = frame.renderer;
    r.seed = frame.seed;
    r.image_path = "frames/" + detail::frame_stem(frame) + ".png";
    r.depth_path =
        "depth/" + detail::depth_stem(frame.scene_id, frame.pose_index) + ".edr";
    save_png(dataset_dir / r.image_path, frame.image);
    fs::path dp = dataset_dir / r.depth_path;
    if (!fs::exists(dp)) save_depth_raster(dp, *frame.depth);
    return r;
}

// Loads one frame; `depth_cache` (optional) deduplicates shared depth
// rasters across the styles of a group.
inline Frame load_frame(
    const std::filesystem::path& dataset_dir, const FrameRecord& r,
    std::map<std::string, std::shared_ptr<const DepthMap>>* depth_cache = nullptr) {
    Frame f;
    f.image = load_png(dataset_dir / r.image_path);
    if (depth_cache) {
        auto it = depth_cache->find(r.depth_path);
        if (it != depth_cache->end()) {
            f.depth = it->second;
        } else {
            f.depth = std::make_shared<DepthMap>(
                load_depth_raster(dataset_dir / r.depth_path));
            depth_cache->emplace(r.depth_path, f.depth);
        }
    } else {
        f.depth = std::make_shared<DepthMap>(
            load_depth_raster(dataset_dir / r.depth_path));
    }
    if (f.image.width != f.depth->width || f.image.height != f.depth->height)
        throw FormatError("image and depth dimensions differ for " + r.image_path);
    f.scene_id = r.scene_id;
    f.style_id = r.style_id;
    f.pose_index = r.pose_index;
    f.renderer = r.renderer;
    f.seed = r.seed;
    return f;
}

inline std::vector<const FrameRecord*> split_records(const Manifest& m,
                                                     const std::string& split) {
    validate_split_name(split);
    std::vector<const FrameRecord*> out;
    for (const auto& r : m.records)
        if (r.split == split) out.push_back(&r);
    return out;
}

inline std::set<int> split_scene_ids(const Manifest& m, const std::string& split) {
    std::set<int> out;
    for (const auto& r : m.records)
        if (r.split == split) out.insert(r.scene_id);
    return out;
}

}  // namespace endo
