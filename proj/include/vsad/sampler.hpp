#ifndef VSAD_SAMPLER_HPP
#define VSAD_SAMPLER_HPP

#include <vector>

#include "vsad/error.hpp"

namespace vsad {

// One square patch location in a resized image. Flips are geometric
// metadata only; descriptor providers decide what flipping means.
struct PatchRect {
    int x = 0;
    int y = 0;
    int side = 0;
    bool flipped = false;
    int scale_index = 0;
};

// Multi-scale dense sampling grid. For each scale s, offsets along each
// axis are x_i = round(i * (image_side - s) / (grid - 1)) for i in [0, grid)
// with round-half-away-from-zero; grid = 1 places the patch at offset 0.
// With flips on, each rectangle is emitted twice (unflipped then flipped).
// Total count is |scales| * grid^2 * (1 + with_flips).
std::vector<PatchRect> sample_grid(int image_side, const std::vector<int>& scales, int grid,
                                   bool with_flips);

}  // namespace vsad

#endif
