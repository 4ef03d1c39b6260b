#include "satgeo/surface.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "satgeo/error.h"

namespace satgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distance from (x, y) to the boundary of an axis-aligned rectangle.
double rect_boundary_distance(double x, double y, double x0, double x1, double y0, double y1) {
  const double dx = std::max({x0 - x, 0.0, x - x1});
  const double dy = std::max({y0 - y, 0.0, y - y1});
  if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
  return std::min({x - x0, x1 - x, y - y0, y1 - y});
}

bool inside(double x, double y, double x0, double x1, double y0, double y1) {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

class Plane final : public Surface {
 public:
  Plane(double z0, double gx, double gy) : z0_(z0), gx_(gx), gy_(gy) {}
  double height(double x, double y) const override { return z0_ + gx_ * x + gy_ * y; }
  double discontinuity_distance(double, double) const override { return kInf; }
  nlohmann::json to_json() const override {
    return {{"type", "plane"}, {"z0", z0_}, {"gx", gx_}, {"gy", gy_}};
  }

 private:
  double z0_, gx_, gy_;
};

class Step final : public Surface {
 public:
  Step(double edge, double low, double high) : edge_(edge), low_(low), high_(high) {}
  double height(double x, double) const override { return x < edge_ ? low_ : high_; }
  double discontinuity_distance(double x, double) const override { return std::abs(x - edge_); }
  nlohmann::json to_json() const override {
    return {{"type", "step"}, {"edge_x", edge_}, {"low", low_}, {"high", high_}};
  }

 private:
  double edge_, low_, high_;
};

class Box final : public Surface {
 public:
  Box(double x0, double x1, double y0, double y1, double base, double top)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), base_(base), top_(top) {}
  double height(double x, double y) const override {
    return inside(x, y, x0_, x1_, y0_, y1_) ? top_ : base_;
  }
  double discontinuity_distance(double x, double y) const override {
    return rect_boundary_distance(x, y, x0_, x1_, y0_, y1_);
  }
  nlohmann::json to_json() const override {
    return {{"type", "box"}, {"x", {x0_, x1_}}, {"y", {y0_, y1_}}, {"base", base_}, {"top", top_}};
  }

 private:
  double x0_, x1_, y0_, y1_, base_, top_;
};

class Gable final : public Surface {
 public:
  Gable(double x0, double x1, double y0, double y1, double base, double eave, double ridge)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), base_(base), eave_(eave), ridge_(ridge) {}
  double height(double x, double y) const override {
    if (!inside(x, y, x0_, x1_, y0_, y1_)) return base_;
    const double half = 0.5 * (x1_ - x0_);
    const double t = 1.0 - std::abs(x - 0.5 * (x0_ + x1_)) / half;
    return base_ + eave_ + (ridge_ - eave_) * t;
  }
  double discontinuity_distance(double x, double y) const override {
    return eave_ != 0.0 ? rect_boundary_distance(x, y, x0_, x1_, y0_, y1_) : kInf;
  }
  nlohmann::json to_json() const override {
    return {{"type", "gable"}, {"x", {x0_, x1_}}, {"y", {y0_, y1_}},
            {"base", base_},   {"eave", eave_},    {"ridge", ridge_}};
  }

 private:
  double x0_, x1_, y0_, y1_, base_, eave_, ridge_;
};

class Composite final : public Surface {
 public:
  explicit Composite(std::vector<SurfacePtr> parts) : parts_(std::move(parts)) {}
  double height(double x, double y) const override {
    double z = -kInf;
    for (const auto& p : parts_) z = std::max(z, p->height(x, y));
    return z;
  }
  double discontinuity_distance(double x, double y) const override {
    double d = kInf;
    for (const auto& p : parts_) d = std::min(d, p->discontinuity_distance(x, y));
    return d;
  }
  nlohmann::json to_json() const override {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : parts_) parts.push_back(p->to_json());
    return {{"type", "composite"}, {"parts", parts}};
  }

 private:
  std::vector<SurfacePtr> parts_;
};

void require_rect(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw Error(ErrorKind::kDomain, "surface footprint must have positive extent");
}

}  // namespace

SurfacePtr make_plane(double z0, double gx, double gy) { return std::make_shared<Plane>(z0, gx, gy); }

SurfacePtr make_step(double edge_x, double low, double high) {
  return std::make_shared<Step>(edge_x, low, high);
}

SurfacePtr make_box(double x0, double x1, double y0, double y1, double base, double top) {
  require_rect(x0, x1, y0, y1);
  return std::make_shared<Box>(x0, x1, y0, y1, base, top);
}

SurfacePtr make_gable(double x0, double x1, double y0, double y1, double base, double eave, double ridge) {
  require_rect(x0, x1, y0, y1);
  return std::make_shared<Gable>(x0, x1, y0, y1, base, eave, ridge);
}

SurfacePtr make_composite(std::vector<SurfacePtr> parts) {
  if (parts.empty()) throw Error(ErrorKind::kDomain, "composite surface needs at least one part");
  return std::make_shared<Composite>(std::move(parts));
}

SurfacePtr surface_from_json(const nlohmann::json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "plane") return make_plane(j.at("z0"), j.value("gx", 0.0), j.value("gy", 0.0));
    if (type == "step") return make_step(j.at("edge_x"), j.at("low"), j.at("high"));
    if (type == "box") {
      return make_box(j.at("x").at(0), j.at("x").at(1), j.at("y").at(0), j.at("y").at(1),
                      j.value("base", 0.0), j.at("top"));
    }
    if (type == "gable") {
      return make_gable(j.at("x").at(0), j.at("x").at(1), j.at("y").at(0), j.at("y").at(1),
                        j.value("base", 0.0), j.at("eave"), j.at("ridge"));
    }
    if (type == "composite") {
      std::vector<SurfacePtr> parts;
      for (const auto& p : j.at("parts")) parts.push_back(surface_from_json(p));
      return make_composite(std::move(parts));
    }
    throw Error(ErrorKind::kConfig, "unknown surface type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad surface: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDomain) throw Error(ErrorKind::kConfig, e.what());
    throw;
  }
}

}  // namespace satgeo
