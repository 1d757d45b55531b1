#include "ingrasp/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace ingrasp {

ConvexShape ConvexShape::sphere(double radius, const Eigen::Isometry3d& pose,
                                std::string label) {
  ConvexShape s;
  s.kind = Kind::Sphere;
  s.radius = radius;
  s.pose = pose;
  s.label = std::move(label);
  return s;
}

ConvexShape ConvexShape::box(const Eigen::Vector3d& half_extents,
                             const Eigen::Isometry3d& pose, std::string label) {
  ConvexShape s;
  s.kind = Kind::Box;
  s.half_extents = half_extents;
  s.pose = pose;
  s.label = std::move(label);
  return s;
}

ConvexShape ConvexShape::hull(std::vector<Eigen::Vector3d> vertices,
                              const Eigen::Isometry3d& pose,
                              std::string label) {
  ConvexShape s;
  s.kind = Kind::Hull;
  s.vertices = std::move(vertices);
  s.pose = pose;
  s.label = std::move(label);
  return s;
}

double ConvexShape::margin() const {
  return kind == Kind::Sphere ? radius : 0.0;
}

Eigen::Vector3d ConvexShape::support(const Eigen::Vector3d& direction) const {
  switch (kind) {
    case Kind::Sphere:
      return pose.translation();
    case Kind::Box: {
      const Eigen::Vector3d d = pose.linear().transpose() * direction;
      Eigen::Vector3d p;
      for (int i = 0; i < 3; ++i) {
        p[i] = d[i] >= 0.0 ? half_extents[i] : -half_extents[i];
      }
      return pose * p;
    }
    case Kind::Hull: {
      const Eigen::Vector3d d = pose.linear().transpose() * direction;
      double best = -std::numeric_limits<double>::infinity();
      size_t arg = 0;
      for (size_t i = 0; i < vertices.size(); ++i) {
        const double dot = vertices[i].dot(d);
        if (dot > best) {
          best = dot;
          arg = i;
        }
      }
      return pose * vertices[arg];
    }
  }
  return pose.translation();
}

namespace {

constexpr int kGjkMaxIterations = 256;
constexpr int kEpaMaxExpansions = 128;
constexpr double kEpaTolerance = 1e-8;
constexpr double kTouchTolerance = 1e-10;

struct SupportPoint {
  Eigen::Vector3d w;  // a - b in the Minkowski difference
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

SupportPoint minkowski_support(const ConvexShape& sa, const ConvexShape& sb,
                               const Eigen::Vector3d& dir) {
  SupportPoint s;
  s.a = sa.support(dir);
  s.b = sb.support(-dir);
  s.w = s.a - s.b;
  return s;
}

struct Simplex {
  std::array<SupportPoint, 4> pts;
  std::array<double, 4> bary{};
  int n = 0;

  // Index lists are ascending, so the forward in-place copy is safe.
  void keep(std::initializer_list<int> idx,
            std::initializer_list<double> lambdas) {
    int k = 0;
    for (int i : idx) {
      pts[k] = pts[i];
      ++k;
    }
    auto it = lambdas.begin();
    for (int i = 0; i < k; ++i) bary[i] = *it++;
    n = k;
  }

  Eigen::Vector3d blend_w() const {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) v += bary[i] * pts[i].w;
    return v;
  }
  Eigen::Vector3d blend_a() const {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) v += bary[i] * pts[i].a;
    return v;
  }
  Eigen::Vector3d blend_b() const {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) v += bary[i] * pts[i].b;
    return v;
  }
};

// Closest point to the origin on segment (p, q) with barycentric weights.
void closest_on_segment(Simplex& s) {
  const Eigen::Vector3d& p = s.pts[0].w;
  const Eigen::Vector3d& q = s.pts[1].w;
  const Eigen::Vector3d d = q - p;
  const double dd = d.squaredNorm();
  double t = dd > 0.0 ? -p.dot(d) / dd : 0.0;
  if (t <= 0.0) {
    s.keep({0}, {1.0});
  } else if (t >= 1.0) {
    s.keep({1}, {1.0});
  } else {
    s.keep({0, 1}, {1.0 - t, t});
  }
}

// Closest point to the origin on triangle (a, b, c); reduces the simplex to
// the supporting feature. Follows the Voronoi-region case analysis.
void closest_on_triangle(Simplex& s) {
  const Eigen::Vector3d& a = s.pts[0].w;
  const Eigen::Vector3d& b = s.pts[1].w;
  const Eigen::Vector3d& c = s.pts[2].w;
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = -a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    s.keep({0}, {1.0});
    return;
  }
  const Eigen::Vector3d bp = -b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    s.keep({1}, {1.0});
    return;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    s.keep({0, 1}, {1.0 - v, v});
    return;
  }
  const Eigen::Vector3d cp = -c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    s.keep({2}, {1.0});
    return;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    s.keep({0, 2}, {1.0 - w, w});
    return;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    s.keep({1, 2}, {1.0 - w, w});
    return;
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  s.keep({0, 1, 2}, {1.0 - v - w, v, w});
}

// Closest point to the origin on tetrahedron; returns true when the origin
// is contained. Reduces the simplex to the closest face otherwise.
bool closest_on_tetrahedron(Simplex& s) {
  const auto outside = [&](int i0, int i1, int i2, int i3) {
    const Eigen::Vector3d& a = s.pts[i0].w;
    const Eigen::Vector3d n =
        (s.pts[i1].w - a).cross(s.pts[i2].w - a);
    const double signp = (-a).dot(n);
    const double signd = (s.pts[i3].w - a).dot(n);
    if (std::abs(signd) < 1e-16) return true;  // degenerate: force reduction
    return signp * signd < 0.0;
  };

  struct Candidate {
    Simplex simplex;
    double dist2;
  };
  bool any_outside = false;
  Candidate best{Simplex{}, std::numeric_limits<double>::infinity()};
  const std::array<std::array<int, 4>, 4> faces = {
      {{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 3, 1}, {1, 2, 3, 0}}};
  for (const auto& f : faces) {
    if (!outside(f[0], f[1], f[2], f[3])) continue;
    any_outside = true;
    Simplex t = s;
    t.keep({f[0], f[1], f[2]}, {1.0, 0.0, 0.0});
    t.n = 3;
    closest_on_triangle(t);
    const double d2 = t.blend_w().squaredNorm();
    if (d2 < best.dist2) best = {t, d2};
  }
  if (!any_outside) return true;
  s = best.simplex;
  return false;
}

// One reduction step: closest point on the current simplex, dropping
// non-supporting vertices. Returns true when the origin is enclosed.
bool reduce_simplex(Simplex& s) {
  switch (s.n) {
    case 1:
      s.bary[0] = 1.0;
      return false;
    case 2:
      closest_on_segment(s);
      return false;
    case 3:
      closest_on_triangle(s);
      return false;
    case 4:
      return closest_on_tetrahedron(s);
    default:
      return false;
  }
}

std::string pair_label(const ConvexShape& a, const ConvexShape& b) {
  return "'" + a.label + "' vs '" + b.label + "'";
}

// Distance GJK. Returns true when the shapes' cores intersect (simplex then
// holds an enclosing tetrahedron or a touching sub-simplex); false when
// separated, with the closest point in the simplex blend.
bool gjk(const ConvexShape& sa, const ConvexShape& sb, Simplex& s) {
  Eigen::Vector3d d0 = sa.pose.translation() - sb.pose.translation();
  if (d0.squaredNorm() < 1e-20) d0 = Eigen::Vector3d::UnitX();
  s.pts[0] = minkowski_support(sa, sb, d0);
  s.bary[0] = 1.0;
  s.n = 1;

  Eigen::Vector3d v = s.pts[0].w;
  for (int iter = 0; iter < kGjkMaxIterations; ++iter) {
    const double vv = v.squaredNorm();
    if (vv < kTouchTolerance * kTouchTolerance) return true;

    const SupportPoint w = minkowski_support(sa, sb, -v);
    // No further progress possible: v is within tolerance of the true
    // closest point (duality gap vv - v.w bounds the error).
    if (vv - v.dot(w.w) <= 1e-12 * std::max(1.0, vv)) return false;
    bool duplicate = false;
    for (int i = 0; i < s.n; ++i) {
      if ((s.pts[i].w - w.w).squaredNorm() < 1e-24) duplicate = true;
    }
    if (duplicate) return false;

    s.pts[s.n] = w;
    s.bary[s.n] = 0.0;
    ++s.n;
    if (reduce_simplex(s)) return true;
    v = s.blend_w();
  }
  throw GeometryError("signed_distance: GJK failed to converge for " +
                      pair_label(sa, sb));
}

// Expands a degenerate simplex to a full tetrahedron for EPA seeding.
// Throws when the Minkowski difference is flat to machine precision.
void inflate_to_tetrahedron(const ConvexShape& sa, const ConvexShape& sb,
                            Simplex& s) {
  const auto try_add = [&](const Eigen::Vector3d& dir) {
    const SupportPoint w = minkowski_support(sa, sb, dir);
    for (int i = 0; i < s.n; ++i) {
      if ((s.pts[i].w - w.w).squaredNorm() < 1e-20) return;
    }
    if (s.n == 3) {
      // Reject points coplanar with the existing triangle.
      const Eigen::Vector3d n = (s.pts[1].w - s.pts[0].w)
                                    .cross(s.pts[2].w - s.pts[0].w);
      if (std::abs(n.dot(w.w - s.pts[0].w)) < 1e-18) return;
    }
    if (s.n == 2) {
      const Eigen::Vector3d d = s.pts[1].w - s.pts[0].w;
      if (d.cross(w.w - s.pts[0].w).squaredNorm() < 1e-24) return;
    }
    s.pts[s.n] = w;
    s.bary[s.n] = 0.0;
    ++s.n;
  };

  const std::array<Eigen::Vector3d, 6> axes = {
      Eigen::Vector3d::UnitX(),  -Eigen::Vector3d::UnitX(),
      Eigen::Vector3d::UnitY(),  -Eigen::Vector3d::UnitY(),
      Eigen::Vector3d::UnitZ(),  -Eigen::Vector3d::UnitZ()};

  while (s.n == 1) {
    for (const auto& d : axes) {
      if (s.n > 1) break;
      try_add(d);
    }
    if (s.n == 1) {
      throw GeometryError("signed_distance: degenerate contact for " +
                          pair_label(sa, sb));
    }
  }
  if (s.n == 2) {
    const Eigen::Vector3d d = (s.pts[1].w - s.pts[0].w).normalized();
    int least = 0;
    d.cwiseAbs().minCoeff(&least);
    const Eigen::Vector3d t1 = d.cross(Eigen::Vector3d::Unit(least)).normalized();
    const Eigen::Vector3d t2 = d.cross(t1);
    const std::array<Eigen::Vector3d, 4> dirs = {t1, -t1, t2, -t2};
    for (const auto& dir : dirs) {
      if (s.n > 2) break;
      try_add(dir);
    }
    if (s.n == 2) {
      throw GeometryError("signed_distance: degenerate contact for " +
                          pair_label(sa, sb));
    }
  }
  if (s.n == 3) {
    const Eigen::Vector3d n =
        (s.pts[1].w - s.pts[0].w).cross(s.pts[2].w - s.pts[0].w).normalized();
    try_add(n);
    if (s.n == 3) try_add(-n);
    if (s.n == 3) {
      throw GeometryError("signed_distance: degenerate contact for " +
                          pair_label(sa, sb));
    }
  }
}

struct EpaResult {
  double depth = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // outward face normal
  Eigen::Vector3d witness_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d witness_b = Eigen::Vector3d::Zero();
};

// Expanding polytope algorithm on the Minkowski difference. The simplex
// must be a tetrahedron containing the origin (boundary contact allowed).
EpaResult epa(const ConvexShape& sa, const ConvexShape& sb, Simplex& s) {
  struct Face {
    int i0, i1, i2;
    Eigen::Vector3d n;  // unit, oriented away from the polytope interior
    double d;           // distance of the face plane from the origin
  };

  std::vector<SupportPoint> verts(s.pts.begin(), s.pts.begin() + 4);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : verts) centroid += 0.25 * p.w;

  std::vector<Face> faces;
  const auto make_face = [&](int i0, int i1, int i2) {
    Face f{i0, i1, i2, Eigen::Vector3d::Zero(), 0.0};
    Eigen::Vector3d n = (verts[i1].w - verts[i0].w)
                            .cross(verts[i2].w - verts[i0].w);
    const double len = n.norm();
    if (len < 1e-18) return;  // sliver; neighbors cover the area
    n /= len;
    if (n.dot(verts[i0].w - centroid) < 0.0) {
      std::swap(f.i1, f.i2);
      n = -n;
    }
    f.n = n;
    f.d = n.dot(verts[i0].w);
    faces.push_back(f);
  };
  make_face(0, 1, 2);
  make_face(0, 1, 3);
  make_face(0, 2, 3);
  make_face(1, 2, 3);
  if (faces.empty()) {
    throw GeometryError("signed_distance: EPA seed degenerate for " +
                        pair_label(sa, sb));
  }

  const auto closest_face = [&]() {
    size_t arg = 0;
    for (size_t i = 1; i < faces.size(); ++i) {
      if (faces[i].d < faces[arg].d) arg = i;
    }
    return arg;
  };

  size_t best = closest_face();
  for (int iter = 0; iter < kEpaMaxExpansions; ++iter) {
    best = closest_face();
    const Face f = faces[best];
    const SupportPoint p = minkowski_support(sa, sb, f.n);
    if (f.n.dot(p.w) - f.d <= kEpaTolerance) break;

    // Remove faces visible from p; collect the horizon.
    std::vector<std::pair<int, int>> horizon;
    const auto add_edge = [&](int a, int b) {
      for (auto it = horizon.begin(); it != horizon.end(); ++it) {
        if (it->first == b && it->second == a) {
          horizon.erase(it);
          return;
        }
      }
      horizon.emplace_back(a, b);
    };
    bool any_visible = false;
    for (auto it = faces.begin(); it != faces.end();) {
      if (it->n.dot(p.w - verts[it->i0].w) > 1e-12) {
        any_visible = true;
        add_edge(it->i0, it->i1);
        add_edge(it->i1, it->i2);
        add_edge(it->i2, it->i0);
        it = faces.erase(it);
      } else {
        ++it;
      }
    }
    if (!any_visible) break;
    verts.push_back(p);
    const int pi = static_cast<int>(verts.size()) - 1;
    for (const auto& e : horizon) make_face(e.first, e.second, pi);
    if (faces.empty()) {
      throw GeometryError("signed_distance: EPA lost the polytope for " +
                          pair_label(sa, sb));
    }
  }

  const Face& f = faces[best];
  EpaResult out;
  out.depth = std::max(0.0, f.d);
  out.normal = f.n;

  // Witnesses from the barycentric coordinates of the projection of the
  // origin onto the closest face.
  const Eigen::Vector3d x = f.d * f.n;
  const Eigen::Vector3d& a = verts[f.i0].w;
  const Eigen::Vector3d& b = verts[f.i1].w;
  const Eigen::Vector3d& c = verts[f.i2].w;
  const Eigen::Vector3d v0 = b - a, v1 = c - a, v2 = x - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double denom = d00 * d11 - d01 * d01;
  double l1 = 1.0 / 3.0, l2 = 1.0 / 3.0;
  if (std::abs(denom) > 1e-18) {
    l1 = (d11 * d20 - d01 * d21) / denom;
    l2 = (d00 * d21 - d01 * d20) / denom;
  }
  const double l0 = 1.0 - l1 - l2;
  out.witness_a = l0 * verts[f.i0].a + l1 * verts[f.i1].a + l2 * verts[f.i2].a;
  out.witness_b = l0 * verts[f.i0].b + l1 * verts[f.i1].b + l2 * verts[f.i2].b;
  return out;
}

}  // namespace

DistanceResult signed_distance(const ConvexShape& a, const ConvexShape& b) {
  const double margin = a.margin() + b.margin();
  Simplex s;
  const bool cores_intersect = gjk(a, b, s);

  DistanceResult out;
  if (!cores_intersect) {
    const Eigen::Vector3d v = s.blend_w();
    const double dist = v.norm();
    if (dist > kTouchTolerance) {
      out.normal = v / dist;
      out.signed_distance = dist - margin;
      out.witness_a = s.blend_a() - a.margin() * out.normal;
      out.witness_b = s.blend_b() + b.margin() * out.normal;
      return out;
    }
    // Fall through: grazing contact of the cores.
  }

  if (a.kind == ConvexShape::Kind::Sphere &&
      b.kind == ConvexShape::Kind::Sphere) {
    // Point cores can only intersect by coinciding; the direction is
    // arbitrary but must be deterministic.
    out.normal = Eigen::Vector3d::UnitX();
    out.signed_distance = -margin;
    out.witness_a = a.pose.translation() - a.margin() * out.normal;
    out.witness_b = b.pose.translation() + b.margin() * out.normal;
    return out;
  }

  inflate_to_tetrahedron(a, b, s);
  const EpaResult pen = epa(a, b, s);
  out.normal = -pen.normal;
  out.signed_distance = -pen.depth - margin;
  out.witness_a = pen.witness_a - a.margin() * out.normal;
  out.witness_b = pen.witness_b + b.margin() * out.normal;
  return out;
}

std::vector<SceneDistance> scene_distances(const CollisionScene& scene,
                                           const Pose& object_pose) {
  std::vector<SceneDistance> out;
  if (scene.object_pieces.empty()) {
    return out;  // nothing can collide, so nothing to report
  }
  out.reserve(scene.obstacles.size());
  const Eigen::Isometry3d world_from_object = object_pose.transform();
  for (const auto& obstacle : scene.obstacles) {
    SceneDistance best;
    best.signed_distance = std::numeric_limits<double>::infinity();
    for (size_t p = 0; p < scene.object_pieces.size(); ++p) {
      ConvexShape piece = scene.object_pieces[p];
      piece.pose = world_from_object * piece.pose;
      const DistanceResult r = signed_distance(piece, obstacle);
      if (r.signed_distance < best.signed_distance) {
        best.signed_distance = r.signed_distance;
        best.piece = static_cast<int>(p);
        best.detail = r;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace ingrasp
