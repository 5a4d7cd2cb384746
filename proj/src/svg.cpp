#include "hmlab/svg.hpp"

#include <cmath>
#include <sstream>

namespace hmlab {

namespace {
std::string num(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}
} // namespace

SvgCanvas::SvgCanvas(Box2 view, int pixels) : view_(view) {
    double wx = view.width(), wy = view.height();
    scale_ = pixels / std::max(wx, wy);
    w_ = static_cast<int>(std::ceil(wx * scale_));
    h_ = static_cast<int>(std::ceil(wy * scale_));
}

Vec2 SvgCanvas::map(Vec2 p) const {
    return {(p.x - view_.lo.x) * scale_, (view_.hi.y - p.y) * scale_};
}

void SvgCanvas::line(Vec2 a, Vec2 b, const std::string& color, double width) {
    Vec2 ma = map(a), mb = map(b);
    body_ += "<line x1='" + num(ma.x) + "' y1='" + num(ma.y) + "' x2='" + num(mb.x) +
             "' y2='" + num(mb.y) + "' stroke='" + color + "' stroke-width='" + num(width) +
             "'/>\n";
}

void SvgCanvas::rect(const Box2& b, const std::string& stroke, const std::string& fill,
                     double width) {
    Vec2 lo = map({b.lo.x, b.hi.y});
    body_ += "<rect x='" + num(lo.x) + "' y='" + num(lo.y) + "' width='" +
             num(b.width() * scale_) + "' height='" + num(b.height() * scale_) +
             "' stroke='" + stroke + "' fill='" + fill + "' stroke-width='" + num(width) +
             "'/>\n";
}

void SvgCanvas::circle(Vec2 c, double r, const std::string& stroke, const std::string& fill,
                       double width) {
    Vec2 m = map(c);
    body_ += "<circle cx='" + num(m.x) + "' cy='" + num(m.y) + "' r='" + num(r * scale_) +
             "' stroke='" + stroke + "' fill='" + fill + "' stroke-width='" + num(width) +
             "'/>\n";
}

void SvgCanvas::arc(Vec2 c, double r, double a0, double a1, const std::string& color,
                    double width) {
    int n = std::max(8, static_cast<int>((a1 - a0) / 0.05));
    std::vector<Vec2> pts;
    for (int i = 0; i <= n; ++i) {
        double a = a0 + (a1 - a0) * i / n;
        pts.push_back(c + Vec2{std::cos(a), std::sin(a)} * r);
    }
    polyline(pts, color, width);
}

void SvgCanvas::dot(Vec2 p, double r, const std::string& fill) {
    Vec2 m = map(p);
    body_ += "<circle cx='" + num(m.x) + "' cy='" + num(m.y) + "' r='" + num(r) +
             "' fill='" + fill + "'/>\n";
}

void SvgCanvas::polyline(const std::vector<Vec2>& pts, const std::string& color, double width) {
    body_ += "<polyline fill='none' stroke='" + color + "' stroke-width='" + num(width) +
             "' points='";
    for (Vec2 p : pts) {
        Vec2 m = map(p);
        body_ += num(m.x) + "," + num(m.y) + " ";
    }
    body_ += "'/>\n";
}

void SvgCanvas::text(Vec2 p, const std::string& s, double size, const std::string& color) {
    Vec2 m = map(p);
    body_ += "<text x='" + num(m.x) + "' y='" + num(m.y) + "' font-size='" + num(size) +
             "' fill='" + color + "'>" + s + "</text>\n";
}

void SvgCanvas::draw_domain(const Domain& dom) {
    for (const Piece& p : dom.pieces) {
        std::string color = p.is_window ? "#999999" : (p.cap_host >= 0 ? "#cc2222" : "#222222");
        switch (p.kind) {
            case Piece::Kind::Segment: line(p.a, p.b, color, 1.0); break;
            case Piece::Kind::Circle: circle(p.center, p.radius, color); break;
            case Piece::Kind::Arc: arc(p.center, p.radius, p.ang0, p.ang1, color, 1.2); break;
            case Piece::Kind::Dot: dot(p.a, 2.0, color); break;
        }
    }
}

std::string SvgCanvas::finish() const {
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w_ << "' height='" << h_
       << "' viewBox='0 0 " << w_ << " " << h_ << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n"
       << body_ << "</svg>\n";
    return os.str();
}

} // namespace hmlab
