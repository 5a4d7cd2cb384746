#pragma once

#include <string>
#include <vector>

#include "hmlab/geometry.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Minimal SVG writer for inspection artifacts.
class SvgCanvas {
  public:
    SvgCanvas(Box2 view, int pixels = 900);

    void line(Vec2 a, Vec2 b, const std::string& color, double width = 1.0);
    void rect(const Box2& b, const std::string& stroke, const std::string& fill = "none",
              double width = 1.0);
    void circle(Vec2 c, double r, const std::string& stroke,
                const std::string& fill = "none", double width = 1.0);
    void arc(Vec2 c, double r, double a0, double a1, const std::string& color,
             double width = 1.0);
    void dot(Vec2 p, double r, const std::string& fill);
    void polyline(const std::vector<Vec2>& pts, const std::string& color, double width = 1.0);
    void text(Vec2 p, const std::string& s, double size, const std::string& color);

    void draw_domain(const Domain& dom);

    std::string finish() const;

  private:
    Box2 view_;
    double scale_;
    int w_, h_;
    std::string body_;
    Vec2 map(Vec2 p) const;
};

} // namespace hmlab
