#pragma once

#include <string>
#include <vector>

#include "lavlab/mat.hpp"

// Minimal static SVG 1.1 emitter for the figure set: reference
// configuration, deformed strip boundaries, scaling curves.

namespace lavlab {

class SvgCanvas {
public:
    SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width_px = 640);

    void polyline(const std::vector<Vec>& pts, const std::string& stroke, double stroke_width = 1.5,
                  const std::string& fill = "none");
    void line(double x0, double y0, double x1, double y1, const std::string& stroke,
              double stroke_width = 1.0);
    void text(double x, double y, const std::string& s, int size_px = 12);
    std::string finish() const;

private:
    double tx(double x) const;
    double ty(double y) const;
    double x_min_, x_max_, y_min_, y_max_;
    int w_, h_;
    std::string body_;
};

/// Closed boundary polyline of one strip image under a family, sampled at
/// `samples` points per edge.
std::vector<Vec> strip_image_boundary(const struct DeformationFamily& family,
                                      const struct StripeDomain& dom, int strip, int samples);

}  // namespace lavlab
