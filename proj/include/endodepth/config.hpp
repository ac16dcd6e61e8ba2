// Declarative run configuration: one structured text file holds the volume,
// camera, light, style, superpixel, network, and training parameters. Lines
// are `key = value` with `#` comments; unknown keys are errors. A canonical
// dump with a stable field order feeds a 64-bit FNV-1a hash that is embedded
// in every output (manifests, checkpoints, metric reports).
//
// Schema (defaults in parentheses):
//   volume.nx|ny|nz (64,64,168)      volume.spacing_mm (0.5)
//   colon.radius_mm (9) colon.length_mm (80) colon.fold_amplitude_mm (1.5)
//   colon.fold_period_mm (7) colon.curvature (0.15) colon.wall_thickness_mm (1.2)
//   camera.width|height (64) camera.fov_deg (120) camera.k1 (-0.05)
//   lights.power (350)
//   trajectory.poses_per_scene (10)  trajectory.jitter_scale (1.0)
//   raster.iso (0.5) raster.albedo (0.75) raster.exposure (1.0)
//   path.spp (8) path.max_bounces (6) path.rr_start_bounce (3)
//   path.opacity_threshold (0.95)
//   transfer.profile = d:sigma_t pairs ("0:0 0.35:0 0.6:5 1:5")
//   styles.count (4)
//   style.K.albedo = r g b        style.K.scatter_fraction (share of sigma_t)
//   style.K.phase_g               style.K.roughness
//   style.K.specular              style.K.exposure
//   style.K.light_color = r g b                       for K in 1..4
//   superpixels.count (48) superpixels.compactness (0.2)
//   superpixels.hist_bins (16) superpixels.gamma1 (10) superpixels.gamma2 (5)
//   network.patch_size (24) network.init_output_bias (10)
//   network.conv = oc:k:stride:pool list ("6:3:1:2 12:3:1:2 12:3:1:1 24:3:1:2 24:3:1:1")
//   network.fc = widths ("48 24 12 1")
//   train.lr0 (2e-4) train.momentum (0.8) train.weight_decay (5e-4)
//   train.epochs (200) train.lr_decay_start (20) train.batch_size (16)
//   train.beta_lr_scale (1.0) train.val_fraction (0.15)
//   finetune.lr_scale (0.1) finetune.epochs (50)
//   crf.beta = per-kind weights ("1 1") crf.lambda_theta (1e-3)
//   crf.lambda_beta (1e-3)
//   threads (1)
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "endodepth/cinematic.hpp"
#include "endodepth/crf.hpp"
#include "endodepth/endoscope.hpp"
#include "endodepth/errors.hpp"
#include "endodepth/network.hpp"
#include "endodepth/raster.hpp"
#include "endodepth/volume.hpp"

namespace endo {

struct SuperpixelSettings {
    int count = 48;
    double compactness = 0.2;
    int hist_bins = 16;
    double gamma1 = 10.0;
    double gamma2 = 5.0;
};

// Extinction profile shared by every style: density -> sigma_t breakpoints.
struct ExtinctionProfile {
    std::vector<std::pair<double, double>> points{
        {0.0, 0.0}, {0.35, 0.0}, {0.6, 5.0}, {1.0, 5.0}};
};

// Appearance knobs of one style; the transfer function is assembled from the
// shared extinction profile, so every style has the same sigma_t by
// construction and style sets can share flight geometry and depth.
struct StyleConfig {
    Vec3 albedo{0.85, 0.55, 0.45};
    double scatter_fraction = 0.9;  // sigma_s = fraction * sigma_t
    double phase_g = 0.8;
    double roughness = 0.45;
    double specular = 0.15;
    double exposure = 1.0;
    Vec3 light_color{1.0, 0.93, 0.85};
};

struct RunConfig {
    int vol_nx = 64, vol_ny = 64, vol_nz = 168;
    double vol_spacing_mm = 0.5;
    ColonParams colon;  // per-scene seeds assigned at generation time
    EndoscopeCamera camera;
    double light_power = 350.0;
    int poses_per_scene = 10;
    double jitter_scale = 1.0;
    RasterParams raster;
    PathTracerConfig path;  // seed assigned at generation time
    ExtinctionProfile extinction;
    std::vector<StyleConfig> styles;
    SuperpixelSettings superpixels;
    NetworkSpec network;
    TrainHyper hyper;
    double beta_lr_scale = 1.0;
    double val_fraction = 0.15;
    double finetune_lr_scale = 0.1;
    int finetune_epochs = 50;
    CrfParams crf;
    int threads = 1;

    RunConfig() {
        styles.resize(4);
        styles[0] = StyleConfig{};
        styles[1] = StyleConfig{{0.80, 0.70, 0.60}, 0.80, 0.60, 0.25,
                                0.30,  1.30,        {1.0, 1.0, 1.0}};
        styles[2] = StyleConfig{{0.75, 0.35, 0.30}, 0.96, 0.85, 0.60,
                                0.10,  0.85,        {1.0, 0.85, 0.70}};
        styles[3] = StyleConfig{{0.70, 0.60, 0.65}, 0.84, 0.50, 0.20,
                                0.40,  1.15,        {0.90, 0.95, 1.0}};
        network.patch_size = 24;
        network.conv = {{6, 3, 1, 2}, {12, 3, 1, 2}, {12, 3, 1, 1},
                        {24, 3, 1, 2}, {24, 3, 1, 1}};
        network.fc = {48, 24, 12, 1};
        network.init_output_bias = 10.0;
    }
};

// Builds a style's transfer function from the shared extinction profile.
inline TransferFunction make_style_transfer(const ExtinctionProfile& ext,
                                            const StyleConfig& s) {
    if (s.scatter_fraction < 0.0 || s.scatter_fraction > 1.0)
        throw ConfigError("scatter_fraction must be in [0,1]");
    TransferFunction tf;
    for (const auto& [d, sigma_t] : ext.points) {
        TransferFunction::Breakpoint bp;
        bp.density = d;
        bp.props.sigma_s = s.scatter_fraction * sigma_t;
        bp.props.sigma_a = (1.0 - s.scatter_fraction) * sigma_t;
        bp.props.phase_g = s.phase_g;
        bp.props.albedo = s.albedo;
        tf.points.push_back(bp);
    }
    tf.validate();
    return tf;
}

inline RenderStyle make_render_style(const RunConfig& c, int index) {
    if (index < 0 || index >= static_cast<int>(c.styles.size()))
        throw ConfigError("style index out of range");
    const StyleConfig& s = c.styles[static_cast<std::size_t>(index)];
    RenderStyle r;
    r.style_id = index + 1;
    r.transfer = make_style_transfer(c.extinction, s);
    r.light_color = s.light_color;
    r.surface_roughness = s.roughness;
    r.specular_weight = s.specular;
    r.exposure = s.exposure;
    return r;
}

inline void validate_config(const RunConfig& c) {
    validate_volume_dims(c.vol_nx, c.vol_ny, c.vol_nz, c.vol_spacing_mm);
    validate_colon_params(c.colon);
    validate_camera(c.camera);
    if (!(c.light_power > 0.0)) throw ConfigError("lights.power must be positive");
    if (c.poses_per_scene < 1)
        throw ConfigError("trajectory.poses_per_scene must be >= 1");
    if (c.jitter_scale < 0.0 || c.jitter_scale > 1.0)
        throw ConfigError("trajectory.jitter_scale must be in [0,1]");
    validate_path_config(c.path);
    if (c.extinction.points.size() < 2)
        throw ConfigError("transfer.profile needs at least 2 breakpoints");
    if (c.styles.empty() || c.styles.size() > 4)
        throw ConfigError("styles.count must be in [1,4]");
    for (std::size_t i = 0; i < c.styles.size(); ++i)
        validate_style(make_render_style(c, static_cast<int>(i)));
    if (c.superpixels.count < 1)
        throw ConfigError("superpixels.count must be >= 1");
    if (!(c.superpixels.compactness > 0.0))
        throw ConfigError("superpixels.compactness must be positive");
    if (c.superpixels.hist_bins < 1)
        throw ConfigError("superpixels.hist_bins must be >= 1");
    if (c.superpixels.gamma1 < 0.0 || c.superpixels.gamma2 < 0.0)
        throw ConfigError("superpixels.gamma values must be >= 0");
    validate_spec(c.network);
    validate_hyper(c.hyper);
    if (c.beta_lr_scale < 0.0)
        throw ConfigError("train.beta_lr_scale must be >= 0");
    if (c.val_fraction < 0.0 || c.val_fraction >= 1.0)
        throw ConfigError("train.val_fraction must be in [0,1)");
    if (!(c.finetune_lr_scale > 0.0))
        throw ConfigError("finetune.lr_scale must be positive");
    if (c.finetune_epochs < 0)
        throw ConfigError("finetune.epochs must be >= 0");
    validate_crf_params(c.crf);
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
}

// --------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + v);
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(d);
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": " + v);
    }
}

inline std::vector<std::string> split_ws(const std::string& v) {
    std::istringstream is(v);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline std::vector<double> parse_doubles(const std::string& key,
                                         const std::string& v, std::size_t n) {
    auto toks = split_ws(v);
    if (n != 0 && toks.size() != n)
        throw ConfigError("expected " + std::to_string(n) + " values for " + key);
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(parse_double(key, t));
    return out;
}

inline std::vector<std::string> split_colon(const std::string& t) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t p = t.find(':', start);
        if (p == std::string::npos) {
            out.push_back(t.substr(start));
            break;
        }
        out.push_back(t.substr(start, p - start));
        start = p + 1;
    }
    return out;
}

}  // namespace detail

// Applies one `key = value` assignment (also used for CLI --set overrides).
inline void apply_config_entry(RunConfig& c, const std::string& key,
                               const std::string& value) {
    using detail::parse_double;
    using detail::parse_doubles;
    using detail::parse_int;
    const std::string& k = key;
    const std::string& v = value;

    if (k == "volume.nx") c.vol_nx = parse_int(k, v);
    else if (k == "volume.ny") c.vol_ny = parse_int(k, v);
    else if (k == "volume.nz") c.vol_nz = parse_int(k, v);
    else if (k == "volume.spacing_mm") c.vol_spacing_mm = parse_double(k, v);
    else if (k == "colon.radius_mm") c.colon.radius_mm = parse_double(k, v);
    else if (k == "colon.length_mm") c.colon.length_mm = parse_double(k, v);
    else if (k == "colon.fold_amplitude_mm") c.colon.fold_amplitude_mm = parse_double(k, v);
    else if (k == "colon.fold_period_mm") c.colon.fold_period_mm = parse_double(k, v);
    else if (k == "colon.curvature") c.colon.centerline_curvature = parse_double(k, v);
    else if (k == "colon.wall_thickness_mm") c.colon.wall_thickness_mm = parse_double(k, v);
    else if (k == "camera.width") c.camera.width = parse_int(k, v);
    else if (k == "camera.height") c.camera.height = parse_int(k, v);
    else if (k == "camera.fov_deg") c.camera.fov_deg = parse_double(k, v);
    else if (k == "camera.k1") c.camera.k1 = parse_double(k, v);
    else if (k == "lights.power") c.light_power = parse_double(k, v);
    else if (k == "trajectory.poses_per_scene") c.poses_per_scene = parse_int(k, v);
    else if (k == "trajectory.jitter_scale") c.jitter_scale = parse_double(k, v);
    else if (k == "raster.iso") c.raster.surface_iso = parse_double(k, v);
    else if (k == "raster.albedo") c.raster.surface_albedo = parse_double(k, v);
    else if (k == "raster.exposure") c.raster.exposure = parse_double(k, v);
    else if (k == "path.spp") c.path.spp = parse_int(k, v);
    else if (k == "path.max_bounces") c.path.max_bounces = parse_int(k, v);
    else if (k == "path.rr_start_bounce") c.path.rr_start_bounce = parse_int(k, v);
    else if (k == "path.opacity_threshold") c.path.opacity_threshold = parse_double(k, v);
    else if (k == "transfer.profile") {
        auto toks = detail::split_ws(v);
        if (toks.size() < 2) throw ConfigError("transfer.profile needs >= 2 points");
        c.extinction.points.clear();
        for (const auto& t : toks) {
            auto parts = detail::split_colon(t);
            if (parts.size() != 2)
                throw ConfigError("transfer.profile entries are density:sigma_t");
            c.extinction.points.emplace_back(parse_double(k, parts[0]),
                                             parse_double(k, parts[1]));
        }
    } else if (k == "styles.count") {
        // Resets the style list to the first n built-in defaults, so set
        // styles.count before any style.K.* overrides.
        int n = parse_int(k, v);
        if (n < 1 || n > 4) throw ConfigError("styles.count must be in [1,4]");
        RunConfig defaults;
        c.styles.assign(defaults.styles.begin(), defaults.styles.begin() + n);
    } else if (k.rfind("style.", 0) == 0) {
        std::size_t dot = k.find('.', 6);
        if (dot == std::string::npos) throw ConfigError("unknown config key: " + k);
        int idx = parse_int(k, k.substr(6, dot - 6));
        if (idx < 1 || idx > 4) throw ConfigError("style index must be 1..4: " + k);
        std::string f = k.substr(dot + 1);
        std::size_t si = static_cast<std::size_t>(idx - 1);
        if (si >= c.styles.size())
            throw ConfigError("style index exceeds styles.count: " + k);
        StyleConfig& s = c.styles[si];
        if (f == "albedo") {
            auto a = parse_doubles(k, v, 3);
            s.albedo = {a[0], a[1], a[2]};
        } else if (f == "scatter_fraction") s.scatter_fraction = parse_double(k, v);
        else if (f == "phase_g") s.phase_g = parse_double(k, v);
        else if (f == "roughness") s.roughness = parse_double(k, v);
        else if (f == "specular") s.specular = parse_double(k, v);
        else if (f == "exposure") s.exposure = parse_double(k, v);
        else if (f == "light_color") {
            auto a = parse_doubles(k, v, 3);
            s.light_color = {a[0], a[1], a[2]};
        } else throw ConfigError("unknown config key: " + k);
    } else if (k == "superpixels.count") c.superpixels.count = parse_int(k, v);
    else if (k == "superpixels.compactness") c.superpixels.compactness = parse_double(k, v);
    else if (k == "superpixels.hist_bins") c.superpixels.hist_bins = parse_int(k, v);
    else if (k == "superpixels.gamma1") c.superpixels.gamma1 = parse_double(k, v);
    else if (k == "superpixels.gamma2") c.superpixels.gamma2 = parse_double(k, v);
    else if (k == "network.patch_size") c.network.patch_size = parse_int(k, v);
    else if (k == "network.init_output_bias") c.network.init_output_bias = parse_double(k, v);
    else if (k == "network.conv") {
        auto toks = detail::split_ws(v);
        if (toks.empty()) throw ConfigError("network.conv must be non-empty");
        c.network.conv.clear();
        for (const auto& t : toks) {
            auto parts = detail::split_colon(t);
            if (parts.size() != 4)
                throw ConfigError("network.conv entries are oc:k:stride:pool");
            ConvLayerSpec cl;
            cl.out_channels = parse_int(k, parts[0]);
            cl.kernel = parse_int(k, parts[1]);
            cl.stride = parse_int(k, parts[2]);
            cl.pool = parse_int(k, parts[3]);
            c.network.conv.push_back(cl);
        }
    } else if (k == "network.fc") {
        auto a = parse_doubles(k, v, 0);
        if (a.empty()) throw ConfigError("network.fc must be non-empty");
        c.network.fc.clear();
        for (double x : a) c.network.fc.push_back(static_cast<int>(x));
    } else if (k == "train.lr0") c.hyper.lr0 = parse_double(k, v);
    else if (k == "train.momentum") c.hyper.momentum = parse_double(k, v);
    else if (k == "train.weight_decay") c.hyper.weight_decay = parse_double(k, v);
    else if (k == "train.epochs") c.hyper.epochs = parse_int(k, v);
    else if (k == "train.lr_decay_start") c.hyper.lr_decay_start_epoch = parse_int(k, v);
    else if (k == "train.batch_size") c.hyper.batch_size = parse_int(k, v);
    else if (k == "train.beta_lr_scale") c.beta_lr_scale = parse_double(k, v);
    else if (k == "train.val_fraction") c.val_fraction = parse_double(k, v);
    else if (k == "finetune.lr_scale") c.finetune_lr_scale = parse_double(k, v);
    else if (k == "finetune.epochs") c.finetune_epochs = parse_int(k, v);
    else if (k == "crf.beta") {
        auto a = parse_doubles(k, v, kSimilarityKinds);
        c.crf.beta = a;
    } else if (k == "crf.lambda_theta") c.crf.lambda_theta = parse_double(k, v);
    else if (k == "crf.lambda_beta") c.crf.lambda_beta = parse_double(k, v);
    else if (k == "threads") c.threads = parse_int(k, v);
    else throw ConfigError("unknown config key: " + k);
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              " is not key = value: " + line);
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty config key at line " +
                                           std::to_string(lineno));
        apply_config_entry(c, key, value);
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

// Canonical dump: every field, fixed order, %.9g floats. Equal configs have
// equal dumps; the dump feeds the config hash.
inline std::string canonical_config(const RunConfig& c) {
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double val) {
        std::snprintf(buf, sizeof(buf), "%.9g", val);
        os << key << " = " << buf << "\n";
    };
    auto put_i = [&](const char* key, long long val) {
        os << key << " = " << val << "\n";
    };
    auto put_v = [&](const char* key, const Vec3& v) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", v.x, v.y, v.z);
        os << key << " = " << buf << "\n";
    };
    put_i("volume.nx", c.vol_nx);
    put_i("volume.ny", c.vol_ny);
    put_i("volume.nz", c.vol_nz);
    put("volume.spacing_mm", c.vol_spacing_mm);
    put("colon.radius_mm", c.colon.radius_mm);
    put("colon.length_mm", c.colon.length_mm);
    put("colon.fold_amplitude_mm", c.colon.fold_amplitude_mm);
    put("colon.fold_period_mm", c.colon.fold_period_mm);
    put("colon.curvature", c.colon.centerline_curvature);
    put("colon.wall_thickness_mm", c.colon.wall_thickness_mm);
    put_i("camera.width", c.camera.width);
    put_i("camera.height", c.camera.height);
    put("camera.fov_deg", c.camera.fov_deg);
    put("camera.k1", c.camera.k1);
    put("lights.power", c.light_power);
    put_i("trajectory.poses_per_scene", c.poses_per_scene);
    put("trajectory.jitter_scale", c.jitter_scale);
    put("raster.iso", c.raster.surface_iso);
    put("raster.albedo", c.raster.surface_albedo);
    put("raster.exposure", c.raster.exposure);
    put_i("path.spp", c.path.spp);
    put_i("path.max_bounces", c.path.max_bounces);
    put_i("path.rr_start_bounce", c.path.rr_start_bounce);
    put("path.opacity_threshold", c.path.opacity_threshold);
    os << "transfer.profile =";
    for (const auto& [d, st] : c.extinction.points) {
        std::snprintf(buf, sizeof(buf), " %.9g:%.9g", d, st);
        os << buf;
    }
    os << "\n";
    put_i("styles.count", static_cast<long long>(c.styles.size()));
    for (std::size_t i = 0; i < c.styles.size(); ++i) {
        std::string p = "style." + std::to_string(i + 1) + ".";
        const StyleConfig& s = c.styles[i];
        put_v((p + "albedo").c_str(), s.albedo);
        put((p + "scatter_fraction").c_str(), s.scatter_fraction);
        put((p + "phase_g").c_str(), s.phase_g);
        put((p + "roughness").c_str(), s.roughness);
        put((p + "specular").c_str(), s.specular);
        put((p + "exposure").c_str(), s.exposure);
        put_v((p + "light_color").c_str(), s.light_color);
    }
    put_i("superpixels.count", c.superpixels.count);
    put("superpixels.compactness", c.superpixels.compactness);
    put_i("superpixels.hist_bins", c.superpixels.hist_bins);
    put("superpixels.gamma1", c.superpixels.gamma1);
    put("superpixels.gamma2", c.superpixels.gamma2);
    put_i("network.patch_size", c.network.patch_size);
    put("network.init_output_bias", c.network.init_output_bias);
    os << "network.conv =";
    for (const auto& cl : c.network.conv) {
        std::snprintf(buf, sizeof(buf), " %d:%d:%d:%d", cl.out_channels,
                      cl.kernel, cl.stride, cl.pool);
        os << buf;
    }
    os << "\n";
    os << "network.fc =";
    for (int w : c.network.fc) os << ' ' << w;
    os << "\n";
    put("train.lr0", c.hyper.lr0);
    put("train.momentum", c.hyper.momentum);
    put("train.weight_decay", c.hyper.weight_decay);
    put_i("train.epochs", c.hyper.epochs);
    put_i("train.lr_decay_start", c.hyper.lr_decay_start_epoch);
    put_i("train.batch_size", c.hyper.batch_size);
    put("train.beta_lr_scale", c.beta_lr_scale);
    put("train.val_fraction", c.val_fraction);
    put("finetune.lr_scale", c.finetune_lr_scale);
    put_i("finetune.epochs", c.finetune_epochs);
    os << "crf.beta =";
    for (double b : c.crf.beta) {
        std::snprintf(buf, sizeof(buf), " %.9g", b);
        os << buf;
    }
    os << "\n";
    put("crf.lambda_theta", c.crf.lambda_theta);
    put("crf.lambda_beta", c.crf.lambda_beta);
    return os.str();
}

// 64-bit FNV-1a over the canonical dump, as 16 hex digits. Note: `threads`
// is deliberately excluded from the canonical dump (it never affects
// outputs).
inline std::string config_hash(const RunConfig& c) {
    std::string text = canonical_config(c);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

// Per-scene volume: the colon phases derive from (seed, scene_id).
inline DensityVolume make_scene_volume(const RunConfig& c, std::uint64_t seed,
                                       int scene_id) {
    ColonParams p = c.colon;
    p.seed = hash_combine(hash_combine(seed, 0x766f6c756d65ULL),
                          static_cast<std::uint64_t>(scene_id));
    return make_colon_volume(p, c.vol_nx, c.vol_ny, c.vol_nz, c.vol_spacing_mm);
}

inline std::vector<Pose> make_scene_trajectory(const RunConfig& c,
                                               std::uint64_t seed,
                                               int scene_id) {
    ColonParams p = c.colon;
    p.seed = hash_combine(hash_combine(seed, 0x766f6c756d65ULL),
                          static_cast<std::uint64_t>(scene_id));
    std::uint64_t tseed = hash_combine(hash_combine(seed, 0x7472616a31ULL),
                                       static_cast<std::uint64_t>(scene_id));
    return make_trajectory(p, c.poses_per_scene, tseed, c.jitter_scale);
}

}  // namespace endo
