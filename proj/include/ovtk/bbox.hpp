#pragma once

#include <cmath>

namespace ovtk {

/// Axis-aligned box in absolute pixels, (left, top, width, height).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }

    bool finite() const
    {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
    }
    bool valid() const { return finite() && w > 0.0 && h > 0.0; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Intersection over union. Boxes are closed regions; degenerate or
/// edge-touching overlap gives 0.
inline double iou(const BBox& a, const BBox& b)
{
    if (a == b) return a.valid() ? 1.0 : 0.0;
    const double iw = std::fmin(a.right(), b.right()) - std::fmax(a.x, b.x);
    const double ih = std::fmin(a.bottom(), b.bottom()) - std::fmax(a.y, b.y);
    if (!(iw > 0.0) || !(ih > 0.0)) return 0.0;
    const double area_a = a.w > 0.0 && a.h > 0.0 ? a.area() : 0.0;
    const double area_b = b.w > 0.0 && b.h > 0.0 ? b.area() : 0.0;
    const double inter = iw * ih;
    const double uni = area_a + area_b - inter;
    if (!(uni > 0.0)) return 0.0;
    const double r = inter / uni;
    return r > 1.0 ? 1.0 : r;
}

}  // namespace ovtk
