#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skinft/delaunay.hpp"
#include "skinft/spatial.hpp"

namespace skinft {

struct SkinError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Taxel {
    int id = 0;
    double u = 0.0, v = 0.0;   // chart coordinates, metres
    Vec3 position = Vec3::Zero();  // link frame
    Vec3 normal = Vec3::UnitZ();   // link frame, unit
    double radius = 0.0;
    double area = 0.0;
};

struct SkinPatch {
    std::string linkName;
    std::vector<Taxel> taxels;
    // [u1, u2, v1, v2]
    std::array<double, 4> chartBounds{0.0, 0.0, 0.0, 0.0};
};

struct PressureFrame {
    std::string linkName;
    std::vector<double> pressure;  // Pa, one per taxel
    double timestamp = 0.0;
};

// One interpolation data point: a taxel disk sample.
struct FieldPoint {
    double u = 0.0, v = 0.0;
    double p = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    int taxelIndex = -1;
};

struct SkinContact {
    std::string linkName;
    Vec3 location = Vec3::Zero();  // link frame
    Wrench wrench;                 // link frame, moment about link origin
    std::vector<int> activatedTaxels;  // taxel ids
};

// Piecewise-linear fields over a Delaunay triangulation of the UV samples.
class InterpolatedFields {
public:
    explicit InterpolatedFields(std::vector<FieldPoint> points);

    // 0 outside the convex hull; reproduces the datum exactly at data points.
    double pressureAt(double u, double v) const;
    // Throw SkinError outside the hull.
    Vec3 positionAt(double u, double v) const;
    // Renormalized interpolated normal; throws on out-of-hull or degenerate normal.
    Vec3 normalAt(double u, double v) const;

    bool insideHull(double u, double v) const { return tri_.locate(u, v) >= 0; }

    const Triangulation& triangulation() const { return tri_; }
    const std::vector<FieldPoint>& points() const { return pts_; }
    double hullArea() const { return tri_.hullArea(); }

    // Internal query with a location hint and no exceptions, used by the integrators.
    struct Sample {
        bool inside = false;
        double p = 0.0;
        Vec3 position = Vec3::Zero();
        Vec3 rawNormal = Vec3::Zero();
        int tri = -1;
        int componentOwner = -1;  // lowest taxel index among triangle vertices
    };
    Sample sampleAt(double u, double v, int hint) const;

private:
    std::vector<FieldPoint> pts_;
    Triangulation tri_;
};

// 9 samples per taxel: disk centre plus 8 equally spaced boundary points.
std::vector<FieldPoint> sampleTaxelDisks(const SkinPatch& patch, const PressureFrame& frame);

// Triangulates the samples after near-duplicate removal (keep max pressure).
InterpolatedFields buildFields(std::vector<FieldPoint> points);

struct QuadratureOptions {
    int resolution = 200;      // cells per axis
    bool metricFactor = false;  // multiply by |dr/du x dr/dv| (finite differences)
};

// f = integral of p(u,v) n(u,v) du dv over the chart bounds (midpoint rule).
Vec3 integrateForce(const InterpolatedFields& fields, const std::array<double, 4>& bounds,
                    const QuadratureOptions& opt = {});

// mu = integral of r(u,v) x (p(u,v) n(u,v)) du dv, moment about the link origin.
Vec3 integrateTorque(const InterpolatedFields& fields, const std::array<double, 4>& bounds,
                     const QuadratureOptions& opt = {});

// || A sum p_i n_i ||, the no-interpolation baseline; all taxels share area A.
double simplifiedForce(const SkinPatch& patch, const PressureFrame& frame);

// Activated taxels grouped into connected components via triangulation edges;
// one contact per component with pressure-weighted centroid and integrated wrench.
std::vector<SkinContact> detectContacts(const SkinPatch& patch, const PressureFrame& frame,
                                        const InterpolatedFields& fields, double threshold,
                                        const QuadratureOptions& opt = {});

}  // namespace skinft
