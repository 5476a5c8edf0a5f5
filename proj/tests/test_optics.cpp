#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aberrasim/core/random.hpp"
#include "aberrasim/optics/chief_ray.hpp"
#include "aberrasim/optics/prescription.hpp"
#include "aberrasim/optics/surface.hpp"
#include "aberrasim/optics/trace.hpp"

using namespace aberrasim;

namespace {

Surface<double> spherical(double c, double semi, double th,
                          std::vector<std::pair<double, double>> idx = {}) {
  Surface<double> s;
  s.kind = SurfaceKind::Spherical;
  s.curvature = c;
  s.semi_diameter = semi;
  s.thickness = th;
  s.index_after = std::move(idx);
  return s;
}

Surface<double> aspheric(double c, std::vector<std::pair<int, double>> terms,
                         double semi, double th,
                         std::vector<std::pair<double, double>> idx = {}) {
  Surface<double> s = spherical(c, semi, th, std::move(idx));
  s.kind = SurfaceKind::Aspheric;
  s.aspheric = std::move(terms);
  return s;
}

Surface<double> stop(double semi, double th) {
  Surface<double> s;
  s.kind = SurfaceKind::Stop;
  s.semi_diameter = semi;
  s.thickness = th;
  return s;
}

Surface<double> image_plane(double semi = 100.0) {
  Surface<double> s;
  s.kind = SurfaceKind::ImagePlane;
  s.semi_diameter = semi;
  return s;
}

/// Symmetric biconvex singlet used by several cases: vertex at z=0,
/// glass thickness 3 mm, image plane 10 mm behind the rear vertex.
LensPrescription<double> biconvex() {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.01, 8.0, 3.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(-0.01, 8.0, 10.0));
  p.surfaces.push_back(image_plane());
  return p;
}

/// Plane-parallel plate, n = 1.5, 3 mm thick, image plane 2 mm after.
LensPrescription<double> plate() {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.0, 10.0, 3.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(0.0, 10.0, 2.0));
  p.surfaces.push_back(image_plane());
  return p;
}

}  // namespace

TEST_CASE("sag of a sphere matches the closed form") {
  Surface<double> s = spherical(0.1, 10.0, 0.0);
  // z = c s^2 / (1 + sqrt(1 - c^2 s^2)) at s = 1
  CHECK(sag(s, 1.0) == doctest::Approx(0.0501256289338003).epsilon(1e-12));
  CHECK(sag(s, 0.0) == 0.0);
  // pure polynomial surface: z = 0.04 s^2 exactly
  Surface<double> poly = aspheric(0.0, {{2, 0.04}}, 10.0, 0.0);
  CHECK(poly.kind == SurfaceKind::Aspheric);
  CHECK(sag(poly, 1.0) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(sag(poly, 2.0) == doctest::Approx(0.16).epsilon(1e-15));
}

TEST_CASE("sag is an even function and matches direct polynomial evaluation") {
  Surface<double> s =
      aspheric(0.02, {{4, -3e-5}, {6, 2e-8}, {8, -5e-11}}, 10.0, 0.0);
  for (double r : {0.3, 1.7, 4.2, 7.9}) {
    CHECK(sag(s, r) == sag(s, -r));
    const double base =
        0.02 * r * r / (1.0 + std::sqrt(1.0 - 0.02 * 0.02 * r * r));
    const double extra = -3e-5 * std::pow(r, 4) + 2e-8 * std::pow(r, 6) -
                         5e-11 * std::pow(r, 8);
    CHECK(sag(s, r) == doctest::Approx(base + extra).epsilon(1e-13));
  }
}

TEST_CASE("sag slope matches a central finite difference") {
  Surface<double> s = aspheric(0.03, {{4, 1e-4}, {6, -2e-7}}, 10.0, 0.0);
  const double h = 1e-6;
  for (double r : {0.5, 2.0, 5.0, 8.0}) {
    const double fd = (sag(s, r + h) - sag(s, r - h)) / (2.0 * h);
    CHECK(sag_slope(s, r) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("sag throws beyond the hemispheric limit") {
  Surface<double> s = spherical(0.1, 20.0, 0.0);  // radius 10 mm
  CHECK_THROWS_AS(sag(s, 10.0), std::domain_error);
  CHECK_THROWS_AS(sag(s, 12.0), std::domain_error);
  CHECK_THROWS_AS(sag_slope(s, 10.0), std::domain_error);
  CHECK_NOTHROW(sag(s, 9.99));
}

TEST_CASE("surface normal is unit length and tilts against the slope") {
  Surface<double> s = spherical(0.05, 15.0, 0.0);
  CHECK((surface_normal(s, 0.0, 0.0) - Vec3<double>(0, 0, 1)).norm() == 0.0);
  Vec3<double> n = surface_normal(s, 3.0, 4.0);
  CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-15));
  // slope is positive for c > 0, so the transverse part points inward
  CHECK(n.x() < 0.0);
  CHECK(n.y() < 0.0);
  CHECK(n.z() > 0.0);
  // rotational symmetry: normal at (5,0) mirrors the one at (0,5)
  Vec3<double> nx = surface_normal(s, 5.0, 0.0);
  Vec3<double> ny = surface_normal(s, 0.0, 5.0);
  CHECK(nx.x() == doctest::Approx(ny.y()).epsilon(1e-15));
  CHECK(nx.z() == doctest::Approx(ny.z()).epsilon(1e-15));
}

TEST_CASE("index_at interpolates linearly and clamps at the table ends") {
  Surface<double> s = spherical(0.0, 10.0, 1.0,
                                {{486.0, 1.52}, {588.0, 1.50}, {656.0, 1.49}});
  CHECK(s.index_at(588.0) == 1.50);
  CHECK(s.index_at(537.0) == doctest::Approx(1.51).epsilon(1e-12));
  CHECK(s.index_at(400.0) == 1.52);   // clamped low
  CHECK(s.index_at(700.0) == 1.49);   // clamped high
  Surface<double> air = spherical(0.0, 10.0, 1.0);
  CHECK(air.index_at(588.0) == 1.0);
  Surface<double> mono = spherical(0.0, 10.0, 1.0, {{588.0, 1.7}});
  CHECK(mono.index_at(450.0) == 1.7);
}

TEST_CASE("sphere intersection reproduces the hand-computed ray parameter") {
  Surface<double> s = spherical(0.1, 10.0, 0.0);
  Ray<double> ray{Vec3<double>(1, 0, -10), Vec3<double>(0, 0, 1), 0.0};
  SurfaceHit<double> hit = intersect_sphere(ray, s, 0.0);
  REQUIRE(hit.ok());
  // t = 10 + sag(1) for an axial-parallel ray starting 10 mm in front
  CHECK(hit.t == doctest::Approx(10.0501256289338).epsilon(1e-12));
  CHECK(hit.point.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hit.point.z() == doctest::Approx(0.0501256289338003).epsilon(1e-12));
}

TEST_CASE("concave sphere intersection picks the near-vertex branch") {
  // c = -0.1: sphere centred at z = -10; the far branch sits at z ~ -20
  Surface<double> s = spherical(-0.1, 10.0, 0.0);
  Ray<double> ray{Vec3<double>(1, 0, -10), Vec3<double>(0, 0, 1), 0.0};
  SurfaceHit<double> hit = intersect_sphere(ray, s, 0.0);
  REQUIRE(hit.ok());
  CHECK(hit.point.z() == doctest::Approx(-0.0501256289338003).epsilon(1e-12));
  CHECK(hit.t == doctest::Approx(10.0 - 0.0501256289338003).epsilon(1e-12));
}

TEST_CASE("planar intersection and a clean miss") {
  Surface<double> plane = spherical(0.0, 20.0, 0.0);
  Ray<double> ray{Vec3<double>(1, 2, -10), Vec3<double>(0, 0, 1), 0.0};
  SurfaceHit<double> hit = intersect_sphere(ray, plane, 0.0);
  REQUIRE(hit.ok());
  CHECK(hit.t == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(hit.normal.z() == 1.0);

  // ray passing outside the full sphere (radius 10, transverse offset 15)
  Surface<double> s = spherical(0.1, 10.0, 0.0);
  Ray<double> wide{Vec3<double>(15, 0, -10), Vec3<double>(0, 0, 1), 0.0};
  CHECK(intersect_sphere(wide, s, 0.0).fate == RayFate::Miss);
}

TEST_CASE("aspheric intersection reduces to the sphere when terms vanish") {
  Surface<double> sph = spherical(0.04, 12.0, 0.0);
  Surface<double> asp = sph;
  asp.kind = SurfaceKind::Aspheric;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(-8.0, 8.0);
  std::uniform_real_distribution<double> ang(-0.08, 0.08);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Ray<double> ray{Vec3<double>(pos(rng), pos(rng), -30.0),
                    Vec3<double>(ang(rng), ang(rng), 1.0).normalized(), 0.0};
    SurfaceHit<double> a = intersect_sphere(ray, sph, 0.0, false);
    SurfaceHit<double> b = intersect_asphere(ray, asp, 0.0, false);
    if (a.fate == RayFate::Miss) continue;
    REQUIRE(b.ok());
    CHECK((a.point - b.point).norm() < 1e-10);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("aspheric intersection agrees with an independent bisection") {
  Surface<double> s = aspheric(0.019721224166,
                               {{4, -4.2599749181e-06}, {6, 2.8337424902e-10}},
                               11.0, 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-9.0, 9.0);
  std::uniform_real_distribution<double> ang(-0.05, 0.05);
  auto residual = [&](const Ray<double>& ray, double t) {
    Vec3<double> p = ray.origin + t * ray.direction;
    return p.z() - sag(s, std::hypot(p.x(), p.y()));
  };
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Ray<double> ray{Vec3<double>(pos(rng), pos(rng), -25.0),
                    Vec3<double>(ang(rng), ang(rng), 1.0).normalized(), 0.0};
    SurfaceHit<double> hit = intersect_asphere(ray, s, 0.0, false);
    if (!hit.ok()) continue;
    // bracket the root around the reported parameter and bisect from scratch
    double lo = hit.t - 1.0, hi = hit.t + 1.0;
    REQUIRE(residual(ray, lo) * residual(ray, hi) < 0.0);
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (residual(ray, lo) * residual(ray, mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(hit.t - 0.5 * (lo + hi)) < 1e-9);
    ++checked;
  }
  CHECK(checked > 250);
}

TEST_CASE("refraction matches the textbook 45-degree case") {
  // n=1 to n=1.5 at 45 degrees: sin t = sin(45)/1.5
  LensPrescription<double> p = plate();
  const double s45 = std::sqrt(0.5);
  Ray<double> ray{Vec3<double>(0, -3, -3), Vec3<double>(0, s45, s45), 0.0};
  TraceResult<double> tr =
      trace_ray(p, ray, 588.0, TraceOptions{true, 0});
  REQUIRE(tr.ok());
  const double sin_t = s45 / 1.5;
  const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
  CHECK(tr.exit_direction.y() == doctest::Approx(sin_t).epsilon(1e-12));
  CHECK(tr.exit_direction.z() == doctest::Approx(cos_t).epsilon(1e-12));
  CHECK(tr.exit_direction.y() == doctest::Approx(0.4714045208).epsilon(1e-9));
  CHECK(tr.exit_direction.z() == doctest::Approx(0.8819171037).epsilon(1e-9));
}

TEST_CASE("plane-parallel plate: path length and lateral displacement") {
  LensPrescription<double> p = plate();

  // axial ray: opl = 5 (air) + 1.5 * 3 (glass) + 2 (air)
  Ray<double> axial{Vec3<double>(0, 0, -5), Vec3<double>(0, 0, 1), 0.0};
  TraceResult<double> tr = trace_ray(p, axial, 588.0);
  REQUIRE(tr.ok());
  CHECK(tr.opl == doctest::Approx(11.5).epsilon(1e-14));
  REQUIRE(tr.hit_points.size() == 3);
  CHECK(tr.hit_points[2].z() == doctest::Approx(5.0).epsilon(1e-14));

  // 30-degree ray: exit parallel to entry, displaced by
  // D = t sin(i) (1 - cos(i) / sqrt(n^2 - sin^2 i))
  const double sin_i = 0.5, cos_i = std::sqrt(3.0) / 2.0, n = 1.5, t = 3.0;
  Ray<double> tilted{Vec3<double>(0, 0, -5), Vec3<double>(sin_i, 0, cos_i), 0.0};
  TraceResult<double> tt = trace_ray(p, tilted, 588.0);
  REQUIRE(tt.ok());
  CHECK((tt.exit_direction - tilted.direction).norm() < 1e-13);
  // compare the exit line against the undisturbed straight line at z = 3
  const double x_straight = 8.0 * sin_i / cos_i;
  const double x_exit = tt.hit_points[1].x();
  const double displacement = (x_straight - x_exit) * cos_i;
  const double expected =
      t * sin_i * (1.0 - cos_i / std::sqrt(n * n - sin_i * sin_i));
  CHECK(displacement == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("Snell holds in vector form at a curved surface") {
  // n1 sin(i) = n2 sin(t) expressed as equal tangential components:
  // n1 (d_in x N) = n2 (d_out x N)
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.05, 10.0, 10.0, {{588.0, 1.6}}));
  p.surfaces.push_back(image_plane());
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-6.0, 6.0);
  std::uniform_real_distribution<double> ang(-0.1, 0.1);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Ray<double> ray{Vec3<double>(pos(rng), pos(rng), -20.0),
                    Vec3<double>(ang(rng), ang(rng), 1.0).normalized(), 0.0};
    TraceResult<double> tr = trace_ray(p, ray, 588.0);
    if (!tr.ok()) continue;
    REQUIRE(tr.hit_points.size() == 2);
    const Vec3<double> hit = tr.hit_points[0];
    const Vec3<double> N = surface_normal(p.surfaces[0], hit.x(), hit.y());
    const Vec3<double> d_out =
        (tr.hit_points[1] - tr.hit_points[0]).normalized();
    const Vec3<double> lhs = 1.0 * ray.direction.cross(N);
    const Vec3<double> rhs = 1.6 * d_out.cross(N);
    CHECK((lhs - rhs).norm() < 1e-12);
    CHECK(d_out.norm() == doctest::Approx(1.0).epsilon(1e-14));
    ++checked;
  }
  CHECK(checked > 800);
}

TEST_CASE("exit directions stay unit length through a full train") {
  LensPrescription<double> p = biconvex();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    Ray<double> ray{Vec3<double>(pos(rng), pos(rng), -15.0),
                    Vec3<double>(0.01 * pos(rng), 0.01 * pos(rng), 1.0)
                        .normalized(),
                    0.0};
    TraceResult<double> tr = trace_ray(p, ray, 588.0);
    if (!tr.ok()) continue;
    CHECK(std::abs(tr.exit_direction.norm() - 1.0) < 1e-13);
  }
}

TEST_CASE("ray path is reciprocal through a symmetric lens") {
  // The biconvex singlet is mirror-symmetric about the middle of the
  // glass (z = 1.5).  Reversing an exit ray and mirroring it through
  // that plane must retrace the original path.
  LensPrescription<double> p = biconvex();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec3<double> origin(pos(rng), pos(rng), -5.0);
    const Vec3<double> dir =
        Vec3<double>(0.02 * pos(rng), 0.02 * pos(rng), 1.0).normalized();
    TraceResult<double> fwd = trace_ray(p, Ray<double>{origin, dir, 0.0}, 588.0);
    if (!fwd.ok()) continue;
    const Vec3<double> pE = fwd.hit_points.back();
    const Vec3<double> dE = fwd.exit_direction;
    // mirror z -> 3 - z, reverse the direction of travel
    Ray<double> back{Vec3<double>(pE.x(), pE.y(), 3.0 - pE.z()),
                     Vec3<double>(-dE.x(), -dE.y(), dE.z()), 0.0};
    TraceResult<double> rev = trace_ray(p, back, 588.0);
    REQUIRE(rev.ok());
    CHECK((rev.exit_direction -
           Vec3<double>(-dir.x(), -dir.y(), dir.z())).norm() < 1e-8);
    // the reversed exit line passes through the mirrored launch point
    const Vec3<double> mirrored(origin.x(), origin.y(), 3.0 - origin.z());
    const Vec3<double> pR = rev.hit_points.back();
    const Vec3<double> dR = rev.exit_direction;
    const double t = (mirrored.z() - pR.z()) / dR.z();
    CHECK((pR + t * dR - mirrored).norm() < 1e-8);
    // optical path length is identical in both directions
    CHECK(rev.opl ==
          doctest::Approx(fwd.opl +
                          ((back.origin - pE).norm() -
                           (origin - fwd.hit_points.front()).norm()))
              .epsilon(1e-10));
    ++checked;
  }
  CHECK(checked > 60);
}

TEST_CASE("total internal reflection is reported, not silently refracted") {
  // Strongly curved exit face: a parallel ray at height 4 meets the
  // rear sphere (|R| = 5) at 53 deg internal incidence, past the 41.8 deg
  // critical angle for n = 1.5.
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.0, 6.0, 5.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(-0.2, 4.95, 5.0));
  p.surfaces.push_back(image_plane());

  Ray<double> steep{Vec3<double>(0, 4, -2), Vec3<double>(0, 0, 1), 0.0};
  TraceResult<double> tr = trace_ray(p, steep, 588.0);
  CHECK(!tr.ok());
  CHECK(tr.fate == RayFate::TotalInternalReflection);
  CHECK(tr.clip_surface == 1);

  Ray<double> shallow{Vec3<double>(0, 1, -2), Vec3<double>(0, 0, 1), 0.0};
  CHECK(trace_ray(p, shallow, 588.0).ok());
}

TEST_CASE("apertures clip and record the offending surface") {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.0, 10.0, 3.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(0.0, 10.0, 2.0));
  p.surfaces.push_back(stop(1.0, 2.0));
  p.surfaces.push_back(image_plane());

  Ray<double> blocked{Vec3<double>(2, 0, -5), Vec3<double>(0, 0, 1), 0.0};
  TraceResult<double> tr = trace_ray(p, blocked, 588.0);
  CHECK(!tr.ok());
  CHECK(tr.fate == RayFate::Vignetted);
  CHECK(tr.clip_surface == 2);
  CHECK(tr.hit_points.size() == 2);  // both plate faces were recorded

  // with apertures disabled the same ray sails through
  TraceResult<double> open =
      trace_ray(p, blocked, 588.0, TraceOptions{false, -1});
  CHECK(open.ok());
  CHECK(open.hit_points.size() == 4);
  // the stop never bends the ray
  CHECK((open.exit_direction - blocked.direction).norm() < 1e-15);
}

TEST_CASE("stop_after truncates the trace") {
  LensPrescription<double> p = plate();
  Ray<double> ray{Vec3<double>(0.5, 0, -5), Vec3<double>(0, 0, 1), 0.0};
  TraceResult<double> tr =
      trace_ray(p, ray, 588.0, TraceOptions{true, 0});
  REQUIRE(tr.ok());
  CHECK(tr.hit_points.size() == 1);
  CHECK(tr.opl == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("accumulated_opl seeds the path length total") {
  LensPrescription<double> p = plate();
  Ray<double> ray{Vec3<double>(0, 0, -5), Vec3<double>(0, 0, 1), 2.5};
  TraceResult<double> tr = trace_ray(p, ray, 588.0);
  REQUIRE(tr.ok());
  CHECK(tr.opl == doctest::Approx(14.0).epsilon(1e-14));
}

TEST_CASE("chief ray passes through the stop centre") {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.02, 10.0, 2.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(-0.02, 10.0, 3.0));
  p.surfaces.push_back(stop(3.0, 20.0));
  p.surfaces.push_back(image_plane());
  p.stop_index = 2;
  p.object_distance = 200.0;

  const Vec3<double> field(0.0, 5.0, p.object_z(0.0));
  Ray<double> chief = find_chief_ray(p, field, 588.0);
  CHECK((chief.origin - field).norm() < 1e-12);
  CHECK(chief.direction.norm() == doctest::Approx(1.0).epsilon(1e-14));

  TraceResult<double> tr = trace_ray(p, chief, 588.0);
  REQUIRE(tr.ok());
  const Vec3<double> at_stop = tr.hit_points[2];
  CHECK(std::hypot(at_stop.x(), at_stop.y()) < 1e-7);
}

TEST_CASE("chief ray slope matches an independent bisection solve") {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.02, 10.0, 2.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(-0.02, 10.0, 3.0));
  p.surfaces.push_back(stop(3.0, 20.0));
  p.surfaces.push_back(image_plane());
  p.stop_index = 2;
  p.object_distance = 200.0;

  const Vec3<double> field(0.0, 5.0, p.object_z(0.0));
  auto y_at_stop = [&](double b) {
    Ray<double> ray{field, Vec3<double>(0, b, 1).normalized(), 0.0};
    TraceResult<double> tr =
        trace_ray(p, ray, 588.0, TraceOptions{false, 2});
    REQUIRE(tr.hit_points.size() == 3);
    return tr.hit_points[2].y();
  };
  double lo = -0.1, hi = 0.1;
  REQUIRE(y_at_stop(lo) * y_at_stop(hi) < 0.0);
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (y_at_stop(lo) * y_at_stop(mid) <= 0.0 ? hi : lo) = mid;
  }
  const double b_oracle = 0.5 * (lo + hi);

  Ray<double> chief = find_chief_ray(p, field, 588.0);
  const double b_found = chief.direction.y() / chief.direction.z();
  CHECK(b_found == doctest::Approx(b_oracle).epsilon(1e-6));
  // on-axis symmetry: meridional field keeps the sagittal slope at zero
  CHECK(std::abs(chief.direction.x()) < 1e-10);
}

TEST_CASE("chief ray search reports unreachable fields") {
  LensPrescription<double> p;
  p.surfaces.push_back(spherical(0.02, 2.0, 2.0, {{588.0, 1.5}}));
  p.surfaces.push_back(spherical(-0.02, 2.0, 3.0));
  p.surfaces.push_back(stop(1.0, 20.0));
  p.surfaces.push_back(image_plane());
  p.stop_index = 2;
  p.object_distance = 100.0;
  // a field far outside the lens aperture cannot reach the stop centre
  const Vec3<double> field(0.0, 500.0, p.object_z(0.0));
  CHECK_THROWS_AS(find_chief_ray(p, field, 588.0), std::runtime_error);
}

TEST_CASE("prescription geometry helpers") {
  LensPrescription<double> p = plate();
  CHECK(p.vertex_z(0) == 0.0);
  CHECK(p.vertex_z(1) == 3.0);
  CHECK(p.vertex_z(2) == 5.0);
  CHECK(p.image_plane_z() == 5.0);
  p.object_distance = 100.0;
  CHECK(p.object_z() == -100.0);
  CHECK(p.object_z(25.0) == -125.0);
  CHECK(p.object_z(-25.0) == -75.0);
}

TEST_CASE("channel_count spans the highest assigned channel") {
  LensPrescription<double> p;
  p.wavelengths = {{656.0, 0, 1.0}, {588.0, 1, 1.0}, {486.0, 2, 1.0}};
  CHECK(p.channel_count() == 3);
  p.wavelengths = {{550.0, 0, 1.0}};
  CHECK(p.channel_count() == 1);
}

TEST_CASE("validation flags structural errors by field name") {
  auto valid = [] {
    LensPrescription<double> p;
    p.surfaces.push_back(spherical(0.02, 10.0, 2.0, {{588.0, 1.5}}));
    p.surfaces.push_back(spherical(-0.02, 10.0, 3.0));
    p.surfaces.push_back(stop(3.0, 20.0));
    p.surfaces.push_back(image_plane());
    p.stop_index = 2;
    p.wavelengths = {{588.0, 0, 1.0}};
    return p;
  };
  CHECK_NOTHROW(validate(valid()));

  LensPrescription<double> p = valid();
  p.surfaces.clear();
  CHECK_THROWS_WITH_AS(validate(p), "surfaces: prescription has no surfaces",
                       std::invalid_argument);

  p = valid();
  p.surfaces[0].aspheric = {{4, 1e-5}};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);  // spherical + terms

  p = valid();
  p.surfaces[0].kind = SurfaceKind::Aspheric;
  p.surfaces[0].aspheric = {{3, 1e-5}};
  CHECK_THROWS_WITH_AS(
      validate(p),
      "surfaces[0].aspheric: orders must be even, between 2 and 12",
      std::invalid_argument);

  p = valid();
  p.surfaces[0].semi_diameter = 0.0;
  CHECK_THROWS_WITH_AS(
      validate(p),
      "surfaces[0].semi_diameter: must be > 0 for refracting surfaces",
      std::invalid_argument);

  p = valid();
  p.surfaces[1].index_after = {{588.0, -1.0}};
  CHECK_THROWS_WITH_AS(validate(p),
                       "surfaces[1].index: refractive index must be > 0",
                       std::invalid_argument);

  p = valid();
  p.surfaces[2].kind = SurfaceKind::Spherical;  // no stop left
  CHECK_THROWS_WITH_AS(validate(p),
                       "stop_index: exactly one stop surface required",
                       std::invalid_argument);

  p = valid();
  p.stop_index = 1;
  CHECK_THROWS_WITH_AS(validate(p),
                       "stop_index: does not point at the stop surface",
                       std::invalid_argument);

  p = valid();
  p.surfaces.push_back(stop(3.0, 1.0));  // after the image plane; two stops
  CHECK_THROWS_AS(validate(p), std::invalid_argument);

  p = valid();
  p.surfaces[3].kind = SurfaceKind::Spherical;
  p.surfaces[3].semi_diameter = 10.0;
  CHECK_THROWS_WITH_AS(validate(p),
                       "surfaces: last surface must be the image plane",
                       std::invalid_argument);

  p = valid();
  p.wavelengths.clear();
  CHECK_THROWS_WITH_AS(validate(p),
                       "wavelengths: at least one design wavelength",
                       std::invalid_argument);

  p = valid();
  p.wavelengths = {{588.0, 0, 0.5}, {486.0, 0, 0.3}};
  CHECK_THROWS_WITH_AS(validate(p),
                       "wavelengths.weight: channel 0 weights must sum to 1",
                       std::invalid_argument);

  p = valid();
  p.wavelengths[0].channel = -1;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);

  p = valid();
  p.pixel_pitch = 0.0;
  CHECK_THROWS_WITH_AS(validate(p), "pixel_pitch: must be > 0",
                       std::invalid_argument);

  p = valid();
  p.object_distance = -5.0;
  CHECK_THROWS_WITH_AS(validate(p), "object_distance: must be > 0",
                       std::invalid_argument);
}

TEST_CASE("seed mixing decorrelates streams and normals are deterministic") {
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
  CHECK(mix_seed(123, 45) == mix_seed(123, 45));

  NormalSampler a(mix_seed(9, 0)), b(mix_seed(9, 0)), c(mix_seed(9, 1));
  bool diverged = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a();
    CHECK(va == b());
    if (va != c()) diverged = true;
  }
  CHECK(diverged);

  // moments of a large deterministic sample
  NormalSampler s(42);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = s();
    sum += v;
    sum2 += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}
