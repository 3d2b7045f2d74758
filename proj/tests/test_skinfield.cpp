#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "skinft/delaunay.hpp"
#include "skinft/skinfield.hpp"

using namespace skinft;

namespace {

PressureFrame uniformFrame(const SkinPatch& p, double pressure) {
    return {p.linkName, std::vector<double>(p.taxels.size(), pressure), 0.0};
}

}  // namespace

TEST_CASE("triangulation covers the hull and locates points") {
    std::vector<Eigen::Vector2d> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const auto tri = Triangulation::build(pts);
    CHECK(tri.triangles().size() == 4);
    CHECK(tri.hullArea() == doctest::Approx(1.0).epsilon(1e-12));

    const int t = tri.locate(0.5, 0.25);
    REQUIRE(t >= 0);
    const Eigen::Vector3d bc = tri.barycentric(t, 0.5, 0.25);
    CHECK(bc.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bc.minCoeff() >= -1e-12);
    // reconstruct the query point from the barycentric weights
    Eigen::Vector2d rec = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) rec += bc[i] * tri.points()[tri.triangles()[t].v[i]];
    CHECK((rec - Eigen::Vector2d(0.5, 0.25)).norm() < 1e-12);

    CHECK(tri.locate(1.5, 0.5) == -1);
    CHECK(tri.locate(-0.1, -0.1) == -1);
}

TEST_CASE("triangulation locate agrees with exhaustive barycentric checks") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 60; ++i) pts.emplace_back(d(rng), d(rng));
    const auto tri = Triangulation::build(pts);

    int hint = 0;
    for (int i = 0; i < 500; ++i) {
        const double u = d(rng) * 1.2 - 0.1, v = d(rng) * 1.2 - 0.1;
        const int t = tri.locate(u, v, hint);
        if (t >= 0) hint = t;
        bool containedSomewhere = false;
        for (size_t k = 0; k < tri.triangles().size(); ++k) {
            const Eigen::Vector3d bc = tri.barycentric(static_cast<int>(k), u, v);
            if (bc.minCoeff() >= 1e-10) containedSomewhere = true;
        }
        if (t >= 0) {
            const Eigen::Vector3d bc = tri.barycentric(t, u, v);
            CHECK(bc.minCoeff() >= -1e-9);
        } else {
            CHECK_FALSE(containedSomewhere);
        }
    }
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(Triangulation::build({{0, 0}, {1, 0}}), TriangulationError);
    CHECK_THROWS_AS(Triangulation::build({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), TriangulationError);
}

TEST_CASE("empty delaunay property holds on random points") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 40; ++i) pts.emplace_back(d(rng), d(rng));
    const auto tri = Triangulation::build(pts);
    for (const auto& t : tri.triangles()) {
        const Eigen::Vector2d a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
        // circumcenter via perpendicular bisector intersection
        const Eigen::Vector2d ab = b - a, ac = c - a;
        const double d2 = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
        const double abl = ab.squaredNorm(), acl = ac.squaredNorm();
        const Eigen::Vector2d cc =
            a + Eigen::Vector2d(ac.y() * abl - ab.y() * acl, ab.x() * acl - ac.x() * abl) / d2;
        const double r = (a - cc).norm();
        for (size_t k = 0; k < pts.size(); ++k) {
            if (static_cast<int>(k) == t.v[0] || static_cast<int>(k) == t.v[1] ||
                static_cast<int>(k) == t.v[2])
                continue;
            CHECK((pts[k] - cc).norm() >= r - 1e-9);
        }
    }
}

TEST_CASE("field interpolation reproduces node data exactly") {
    const SkinPatch patch = fix::makeGridPatch("shin", 5, 5, 0.01, 0.002);
    PressureFrame frame = uniformFrame(patch, 0.0);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> d(100.0, 5000.0);
    for (auto& p : frame.pressure) p = d(rng);

    const auto fields = buildFields(sampleTaxelDisks(patch, frame));
    for (size_t i = 0; i < patch.taxels.size(); ++i) {
        const auto& t = patch.taxels[i];
        CHECK(fields.pressureAt(t.u, t.v) == frame.pressure[i]);
        CHECK((fields.positionAt(t.u, t.v) - t.position).norm() == 0.0);
        CHECK((fields.normalAt(t.u, t.v) - t.normal).norm() == 0.0);
    }
    CHECK(fields.pressureAt(10.0, 10.0) == 0.0);          // outside hull
    CHECK_THROWS_AS(fields.positionAt(10.0, 10.0), SkinError);
}

TEST_CASE("duplicate samples keep the maximum pressure") {
    std::vector<FieldPoint> pts;
    for (int i = 0; i < 3; ++i) {
        FieldPoint p;
        p.u = static_cast<double>(i);
        p.v = 0.5 * i * i;  // non-collinear
        p.p = 100.0;
        pts.push_back(p);
    }
    FieldPoint dup = pts[0];
    dup.p = 900.0;
    pts.push_back(dup);
    const auto fields = buildFields(pts);
    CHECK(fields.points().size() == 3);
    CHECK(fields.pressureAt(0.0, 0.0) == 900.0);
}

TEST_CASE("uniform pressure integrates to P times the hull area") {
    const SkinPatch patch = fix::makeGridPatch("shin", 8, 8, 0.01, 0.002);
    const double P = 2000.0;
    const auto fields = buildFields(sampleTaxelDisks(patch, uniformFrame(patch, P)));
    const Vec3 f = integrateForce(fields, patch.chartBounds);
    const double expect = P * fields.hullArea();
    CHECK(f.z() == doctest::Approx(expect).epsilon(0.02));
    CHECK(std::abs(f.x()) < 1e-9 * expect);
    CHECK(std::abs(f.y()) < 1e-9 * expect);
}

TEST_CASE("integration is linear in the pressure field") {
    const SkinPatch patch = fix::makeGridPatch("shin", 6, 6, 0.01, 0.002);
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> d(0.0, 4000.0);
    PressureFrame a = uniformFrame(patch, 0.0), b = uniformFrame(patch, 0.0);
    for (size_t i = 0; i < a.pressure.size(); ++i) {
        a.pressure[i] = d(rng);
        b.pressure[i] = d(rng);
    }
    PressureFrame sum = a;
    for (size_t i = 0; i < sum.pressure.size(); ++i) sum.pressure[i] += b.pressure[i];
    PressureFrame scaled = a;
    for (auto& p : scaled.pressure) p *= 3.0;

    const auto fa = buildFields(sampleTaxelDisks(patch, a));
    const auto fb = buildFields(sampleTaxelDisks(patch, b));
    const auto fsum = buildFields(sampleTaxelDisks(patch, sum));
    const auto fscaled = buildFields(sampleTaxelDisks(patch, scaled));
    const auto& bounds = patch.chartBounds;
    CHECK((integrateForce(fsum, bounds) - integrateForce(fa, bounds) - integrateForce(fb, bounds))
              .norm() < 1e-10);
    CHECK((integrateForce(fscaled, bounds) - 3.0 * integrateForce(fa, bounds)).norm() < 1e-10);
    CHECK((integrateTorque(fsum, bounds) - integrateTorque(fa, bounds) - integrateTorque(fb, bounds))
              .norm() < 1e-10);
}

TEST_CASE("quadrature matches the closed form for piecewise-linear fields") {
    // p(u,v) interpolated linearly and positions mapping (u,v) -> (u,v,0) with
    // +z normals: integral of p over each triangle is area * mean vertex value.
    const SkinPatch patch = fix::makeGridPatch("shin", 4, 4, 0.02, 0.004);
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> d(500.0, 3000.0);
    PressureFrame frame = uniformFrame(patch, 0.0);
    for (auto& p : frame.pressure) p = d(rng);
    const auto fields = buildFields(sampleTaxelDisks(patch, frame));

    double exact = 0.0;
    const auto& tri = fields.triangulation();
    for (const auto& t : tri.triangles()) {
        const auto& pts = tri.points();
        const Eigen::Vector2d a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
        const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
        const double mean = (fields.points()[t.v[0]].p + fields.points()[t.v[1]].p +
                             fields.points()[t.v[2]].p) / 3.0;
        exact += area * mean;
    }
    const Vec3 f = integrateForce(fields, patch.chartBounds, {400, false});
    CHECK(f.z() == doctest::Approx(exact).epsilon(0.005));

    // torque about the origin for the same flat geometry: mu = r x (p z) with
    // r = (u, v, 0), so mu_x = integral of v*p, mu_y = -integral of u*p
    Vec3 muExact = Vec3::Zero();
    const int res = 800;
    const auto& bd = patch.chartBounds;
    const double du = (bd[1] - bd[0]) / res, dv = (bd[3] - bd[2]) / res;
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
            const double u = bd[0] + (i + 0.5) * du, v = bd[2] + (j + 0.5) * dv;
            const double p = fields.pressureAt(u, v);
            muExact += Vec3(u, v, 0).cross(Vec3(0, 0, p)) * du * dv;
        }
    const Vec3 mu = integrateTorque(fields, patch.chartBounds, {400, false});
    CHECK((mu - muExact).norm() < 0.01 * muExact.norm());
}

TEST_CASE("metric factor scales the integral by the surface stretch") {
    // positions stretched to (2u, v, 0): the chart underestimates the surface
    // area by 2x, which the metric factor recovers
    // zero taxel radius collapses the disk samples so the position field is
    // exactly linear in the chart, making the expected stretch exact
    SkinPatch patch = fix::makeGridPatch("shin", 5, 5, 0.01, 0.002);
    for (auto& t : patch.taxels) {
        t.position = Vec3(2.0 * t.u, t.v, 0.0);
        t.radius = 0.0;
    }
    const auto fields = buildFields(sampleTaxelDisks(patch, uniformFrame(patch, 1000.0)));
    const Vec3 plain = integrateForce(fields, patch.chartBounds, {200, false});
    const Vec3 metric = integrateForce(fields, patch.chartBounds, {200, true});
    CHECK(metric.z() == doctest::Approx(2.0 * plain.z()).epsilon(0.01));
}

TEST_CASE("simplifiedForce is the taxel-area weighted pressure sum") {
    const SkinPatch patch = fix::makeGridPatch("shin", 3, 3, 0.01, 0.002);
    PressureFrame frame = uniformFrame(patch, 0.0);
    frame.pressure = {100, 0, 0, 0, 200, 0, 0, 0, 400};
    const double A = patch.taxels.front().area;
    CHECK(simplifiedForce(patch, frame) == doctest::Approx(700.0 * A).epsilon(1e-12));
}

TEST_CASE("detectContacts separates disjoint pressure blobs") {
    const SkinPatch patch = fix::makeGridPatch("shin", 10, 10, 0.01, 0.002);
    PressureFrame frame = uniformFrame(patch, 0.0);
    auto at = [&](int i, int j) -> double& { return frame.pressure[j * 10 + i]; };
    // blob A around (2,2), blob B around (7,7)
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            at(2 + di, 2 + dj) = 5000.0;
            at(7 + di, 7 + dj) = 8000.0;
        }
    const auto fields = buildFields(sampleTaxelDisks(patch, frame));
    auto contacts = detectContacts(patch, frame, fields, 1000.0, {200, false});
    REQUIRE(contacts.size() == 2);
    std::sort(contacts.begin(), contacts.end(),
              [](const auto& a, const auto& b) { return a.location.x() < b.location.x(); });
    CHECK((contacts[0].location.head<2>() - Eigen::Vector2d(0.02, 0.02)).norm() < 0.003);
    CHECK((contacts[1].location.head<2>() - Eigen::Vector2d(0.07, 0.07)).norm() < 0.003);
    CHECK(contacts[0].activatedTaxels.size() == 9);
    CHECK(contacts[1].activatedTaxels.size() == 9);
    CHECK(contacts[0].wrench.force.z() > 0.0);
    CHECK(contacts[1].wrench.force.z() > contacts[0].wrench.force.z());

    // the component wrenches together recover the whole-field integral
    const Vec3 total = integrateForce(fields, patch.chartBounds, {200, false});
    const Vec3 split = contacts[0].wrench.force + contacts[1].wrench.force;
    CHECK((split - total).norm() < 0.05 * total.norm());
}

TEST_CASE("interpolation outperforms the simplified estimate on gap loads") {
    // a single smooth footprint centred between taxels: the area-weighted sum
    // under-reads while interpolation tracks the analytic integral
    const SkinPatch patch = fix::makeGridPatch("shin", 10, 10, 0.01, 0.002);
    const double sigma = 0.007, peak = 20e3;
    const double cu = 0.045, cv = 0.045;  // inter-taxel gap centre
    PressureFrame frame = uniformFrame(patch, 0.0);
    for (size_t i = 0; i < patch.taxels.size(); ++i) {
        const double du = patch.taxels[i].u - cu, dv = patch.taxels[i].v - cv;
        frame.pressure[i] = peak * std::exp(-0.5 * (du * du + dv * dv) / (sigma * sigma));
    }
    const double truth = 2.0 * M_PI * sigma * sigma * peak;
    const auto fields = buildFields(sampleTaxelDisks(patch, frame));
    const double interp = integrateForce(fields, patch.chartBounds).norm();
    const double simplified = simplifiedForce(patch, frame);
    CHECK(std::abs(interp - truth) < std::abs(simplified - truth));
    CHECK(simplified < truth);
}
