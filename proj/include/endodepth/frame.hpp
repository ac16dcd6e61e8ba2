// The dataset atom: one rendered view, its depth map, and identifiers.
#pragma once

#include <cstdint>
#include <memory>

#include "endodepth/image.hpp"

namespace endo {

enum class RendererKind { raster, cinematic };

// Style sets share one depth map between images, hence the shared_ptr: the
// frames of a set literally reference the identical DepthMap object.
struct Frame {
    ImageRGB image;
    std::shared_ptr<const DepthMap> depth;
    int scene_id = 0;
    int style_id = 0;  // 0 = raster/synthetic
    int pose_index = 0;
    RendererKind renderer = RendererKind::raster;
    std::uint64_t seed = 0;
};

}  // namespace endo
