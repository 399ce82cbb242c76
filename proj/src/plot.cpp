#include "starmap/plot.hpp"

#include "starmap/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace starmap {

const std::array<const char*, 20>& palette() {
    static const std::array<const char*, 20> colors = {
        "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
        "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5"};
    return colors;
}

Viewport::Viewport(const PlotSpec& spec, double min_x, double max_x, double min_y, double max_y)
    : cx_(0.5 * (min_x + max_x)),
      cy_(0.5 * (min_y + max_y)),
      scale_(1.0),
      half_w_(0.5 * spec.width),
      half_h_(0.5 * spec.height) {
    const double avail_w = spec.width * (1.0 - 2.0 * spec.margin);
    const double avail_h = spec.height * (1.0 - 2.0 * spec.margin);
    const double rx = max_x - min_x;
    const double ry = max_y - min_y;
    double s = std::numeric_limits<double>::infinity();
    if (rx > 0.0) {
        s = std::min(s, avail_w / rx);
    }
    if (ry > 0.0) {
        s = std::min(s, avail_h / ry);
    }
    if (std::isfinite(s)) {
        scale_ = s;
    }
}

std::pair<double, double> Viewport::operator()(double x, double y) const noexcept {
    return {half_w_ + (x - cx_) * scale_, half_h_ - (y - cy_) * scale_};
}

namespace {

std::string star_points(double x, double y, double outer) {
    const double inner = outer * 0.4;
    std::string s;
    for (int v = 0; v < 10; ++v) {
        const double r = v % 2 == 0 ? outer : inner;
        const double ang = std::numbers::pi / 2.0 + v * std::numbers::pi / 5.0;
        if (v) {
            s += ' ';
        }
        s += format_real(std::round((x + r * std::cos(ang)) * 100.0) / 100.0) + ',' +
             format_real(std::round((y - r * std::sin(ang)) * 100.0) / 100.0);
    }
    return s;
}

std::string px(double v) { return format_real(std::round(v * 100.0) / 100.0); }

}  // namespace

std::string render_svg(const DataMatrix& Y, const std::vector<int>* labels, const DataMatrix* stars,
                       const PlotSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) {
        throw InvalidArgument("plot: width and height must be positive");
    }
    if (Y.cols() != 2) {
        throw InvalidArgument("plot: embedding must be 2-D (got " + std::to_string(Y.cols()) + " columns)");
    }
    if (labels && labels->size() != Y.rows()) {
        throw InvalidArgument("plot: label count != N");
    }
    const bool draw_stars = stars != nullptr && spec.show_stars;
    if (draw_stars && stars->cols() != 2) {
        throw InvalidArgument("plot: stars must be 2-D");
    }

    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    auto extend = [&](const DataMatrix& M) {
        for (std::size_t i = 0; i < M.rows(); ++i) {
            min_x = std::min(min_x, M(i, 0));
            max_x = std::max(max_x, M(i, 0));
            min_y = std::min(min_y, M(i, 1));
            max_y = std::max(max_y, M(i, 1));
        }
    };
    extend(Y);
    if (draw_stars) {
        extend(*stars);
    }
    const Viewport view(spec, min_x, max_x, min_y, max_y);
    const auto& colors = palette();

    std::string svg;
    svg.reserve(64 * (Y.rows() + 8));
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
           std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
           std::to_string(spec.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g stroke=\"none\">\n";
    const std::string r = px(spec.point_radius);
    for (std::size_t i = 0; i < Y.rows(); ++i) {
        const auto [x, y] = view(Y(i, 0), Y(i, 1));
        const char* fill = labels ? colors[static_cast<std::size_t>((*labels)[i]) % colors.size()] : "#333333";
        svg += "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"" + r + "\" fill=\"" + fill + "\"/>\n";
    }
    svg += "</g>\n";
    if (draw_stars) {
        svg += "<g fill=\"gold\" stroke=\"black\" stroke-width=\"0.8\">\n";
        const double outer = std::max(6.0, 4.0 * spec.point_radius);
        for (std::size_t c = 0; c < stars->rows(); ++c) {
            const auto [x, y] = view((*stars)(c, 0), (*stars)(c, 1));
            svg += "<polygon class=\"star\" points=\"" + star_points(x, y, outer) + "\"/>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace starmap
