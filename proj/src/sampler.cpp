#include "vsad/sampler.hpp"

#include <cmath>
#include <string>

namespace vsad {

std::vector<PatchRect> sample_grid(int image_side, const std::vector<int>& scales, int grid,
                                   bool with_flips) {
    if (scales.empty()) throw Error(ErrorCode::EmptyScales, "no scales given");
    if (grid < 1) throw Error(ErrorCode::InvalidConfig, "grid must be >= 1");
    for (int s : scales) {
        if (s < 1 || s > image_side)
            throw Error(ErrorCode::ScaleTooLarge,
                        "scale " + std::to_string(s) + " does not fit image side " +
                            std::to_string(image_side));
    }

    std::vector<PatchRect> rects;
    rects.reserve(scales.size() * static_cast<std::size_t>(grid) * grid * (with_flips ? 2 : 1));
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const int s = scales[si];
        std::vector<int> offsets(static_cast<std::size_t>(grid));
        for (int i = 0; i < grid; ++i) {
            offsets[static_cast<std::size_t>(i)] =
                grid == 1 ? 0
                          : static_cast<int>(std::round(static_cast<double>(i) * (image_side - s) /
                                                        (grid - 1)));
        }
        for (int yi = 0; yi < grid; ++yi) {
            for (int xi = 0; xi < grid; ++xi) {
                PatchRect r;
                r.x = offsets[static_cast<std::size_t>(xi)];
                r.y = offsets[static_cast<std::size_t>(yi)];
                r.side = s;
                r.scale_index = static_cast<int>(si);
                rects.push_back(r);
                if (with_flips) {
                    r.flipped = true;
                    rects.push_back(r);
                }
            }
        }
    }
    return rects;
}

}  // namespace vsad
