#include "lavlab/svg.hpp"

#include <cstdio>

#include "lavlab/deformations.hpp"

namespace lavlab {

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}
}  // namespace

SvgCanvas::SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width_px)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), w_(width_px) {
    const double aspect = (y_max_ - y_min_) / (x_max_ - x_min_);
    h_ = static_cast<int>(w_ * aspect + 0.5);
}

double SvgCanvas::tx(double x) const { return (x - x_min_) / (x_max_ - x_min_) * w_; }
double SvgCanvas::ty(double y) const { return h_ - (y - y_min_) / (y_max_ - y_min_) * h_; }

void SvgCanvas::polyline(const std::vector<Vec>& pts, const std::string& stroke, double stroke_width,
                         const std::string& fill) {
    body_ += "<polyline points=\"";
    for (const Vec& p : pts) body_ += fmt(tx(p[0])) + "," + fmt(ty(p[1])) + " ";
    body_ += "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(stroke_width) + "\"/>\n";
}

void SvgCanvas::line(double x0, double y0, double x1, double y1, const std::string& stroke,
                     double stroke_width) {
    body_ += "<line x1=\"" + fmt(tx(x0)) + "\" y1=\"" + fmt(ty(y0)) + "\" x2=\"" + fmt(tx(x1)) +
             "\" y2=\"" + fmt(ty(y1)) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt(stroke_width) + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int size_px) {
    body_ += "<text x=\"" + fmt(tx(x)) + "\" y=\"" + fmt(ty(y)) + "\" font-size=\"" +
             std::to_string(size_px) + "\" font-family=\"sans-serif\">" + s + "</text>\n";
}

std::string SvgCanvas::finish() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(w_) +
           "\" height=\"" + std::to_string(h_) + "\" viewBox=\"0 0 " + std::to_string(w_) + " " +
           std::to_string(h_) + "\">\n";
    out += body_;
    out += "</svg>\n";
    return out;
}

std::vector<Vec> strip_image_boundary(const DeformationFamily& family, const StripeDomain& dom,
                                      int strip, int samples) {
    // 2D only: walk the rectangle boundary in parameter space and map it
    Vec lo, hi;
    component_box(dom, strip, lo, hi);
    std::vector<Vec> pts;
    auto push_edge = [&](Vec a, Vec b) {
        for (int i = 0; i <= samples; ++i) {
            const double t = static_cast<double>(i) / samples;
            Vec x = a + t * (b - a);
            pts.push_back(evaluate(family, x, dom).y);
        }
    };
    push_edge(Vec(lo[0], lo[1]), Vec(hi[0], lo[1]));
    push_edge(Vec(hi[0], lo[1]), Vec(hi[0], hi[1]));
    push_edge(Vec(hi[0], hi[1]), Vec(lo[0], hi[1]));
    push_edge(Vec(lo[0], hi[1]), Vec(lo[0], lo[1]));
    return pts;
}

}  // namespace lavlab
