#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

namespace skinft {

struct TriangulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 2D Delaunay triangulation (Bowyer-Watson) with walk-based point location.
// Built once, then queried concurrently; all query methods are const.
class Triangulation {
public:
    struct Tri {
        std::array<int, 3> v;    // vertex indices, CCW
        std::array<int, 3> nbr;  // nbr[i] shares the edge opposite v[i], -1 on hull
    };

    // Throws TriangulationError if fewer than 3 points or all collinear.
    static Triangulation build(const std::vector<Eigen::Vector2d>& pts);

    // Triangle containing (u, v), or -1 outside the convex hull. `hint` is a
    // starting triangle for the walk; pass a previous result for nearby queries.
    int locate(double u, double v, int hint = 0) const;

    // Barycentric coordinates of (u, v) w.r.t. triangle t.
    Eigen::Vector3d barycentric(int t, double u, double v) const;

    const std::vector<Tri>& triangles() const { return tris_; }
    const std::vector<Eigen::Vector2d>& points() const { return pts_; }

    // Area of the convex hull (sum of triangle areas), in input units.
    double hullArea() const;

    // Unique vertex-index pairs (a < b) over all triangle edges.
    std::vector<std::pair<int, int>> edges() const;

private:
    std::vector<Eigen::Vector2d> pts_;  // original coordinates
    std::vector<Tri> tris_;
};

}  // namespace skinft
