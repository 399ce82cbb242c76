#pragma once

#include "starmap/core.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace starmap {

struct PlotSpec {
    int width = 800;
    int height = 800;
    double point_radius = 1.5;
    bool show_stars = true;
    double margin = 0.05;  // fraction of width/height left blank on each side
};

/// Fixed 20-color cycle; label c uses palette()[c % 20].
const std::array<const char*, 20>& palette();

/**
 * Data-to-pixel map shared by all markers. Aspect ratio is preserved, the
 * bounding box is centered in the viewport, and the y axis points up.
 */
class Viewport {
public:
    Viewport(const PlotSpec& spec, double min_x, double max_x, double min_y, double max_y);

    std::pair<double, double> operator()(double x, double y) const noexcept;

private:
    double cx_, cy_, scale_, half_w_, half_h_;
};

/// One <circle> per point (colored by label when given) and, on top, one star <polygon> per star.
std::string render_svg(const DataMatrix& Y, const std::vector<int>* labels, const DataMatrix* stars,
                       const PlotSpec& spec = {});

}  // namespace starmap
