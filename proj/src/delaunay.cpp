#include "skinft/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace skinft {

namespace {

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a, b, c).
// Ties (co-circular within rounding) count as outside.
bool inCircumcircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                       ad * (bdx * cdy - bdy * cdx);
    const double mag = std::abs(adx * bdy * cd) + std::abs(adx * bd * cdy) +
                       std::abs(ady * bdx * cd) + std::abs(ady * bd * cdx) +
                       std::abs(ad * bdx * cdy) + std::abs(ad * bdy * cdx);
    return det > 1e-12 * mag;
}

struct Builder {
    std::vector<Eigen::Vector2d> p;  // normalized points + 3 super vertices
    std::vector<Triangulation::Tri> tris;
    std::vector<char> alive;
    int firstSuper = 0;

    bool isSuper(int v) const { return v >= firstSuper; }

    int locateWalk(const Eigen::Vector2d& q, int hint) const {
        int t = hint;
        if (t < 0 || t >= static_cast<int>(tris.size()) || !alive[t]) t = -1;
        if (t < 0) {
            for (int i = 0; i < static_cast<int>(tris.size()); ++i)
                if (alive[i]) { t = i; break; }
        }
        const int cap = 4 * static_cast<int>(tris.size()) + 16;
        for (int step = 0; step < cap && t >= 0; ++step) {
            const auto& tr = tris[t];
            int worst = -1;
            double worstVal = -1e-13;
            for (int i = 0; i < 3; ++i) {
                // signed area against edge opposite vertex i
                const double o = orient2d(p[tr.v[(i + 1) % 3]], p[tr.v[(i + 2) % 3]], q);
                if (o < worstVal) { worstVal = o; worst = i; }
            }
            if (worst < 0) return t;
            t = tr.nbr[worst];
        }
        // walk failed (degenerate geometry); exhaustive scan
        for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
            if (!alive[i]) continue;
            const auto& tr = tris[i];
            bool ok = true;
            for (int k = 0; k < 3 && ok; ++k)
                ok = orient2d(p[tr.v[(k + 1) % 3]], p[tr.v[(k + 2) % 3]], q) >= -1e-12;
            if (ok) return i;
        }
        throw TriangulationError("point location failed");
    }

    void insert(int vi) {
        const Eigen::Vector2d q = p[vi];
        const int start = locateWalk(q, static_cast<int>(tris.size()) - 1);

        // flood-fill the cavity of triangles whose circumcircle contains q
        std::vector<int> cavity{start};
        std::vector<char> inCavity(tris.size(), 0);
        inCavity[start] = 1;
        for (size_t k = 0; k < cavity.size(); ++k) {
            const auto& tr = tris[cavity[k]];
            for (int i = 0; i < 3; ++i) {
                const int n = tr.nbr[i];
                if (n < 0 || inCavity[n]) continue;
                const auto& nt = tris[n];
                if (inCircumcircle(p[nt.v[0]], p[nt.v[1]], p[nt.v[2]], q)) {
                    inCavity[n] = 1;
                    cavity.push_back(n);
                }
            }
        }

        // boundary edges, directed as they appear in their cavity triangle (CCW)
        struct Edge { int a, b, outer; };
        std::vector<Edge> boundary;
        for (int t : cavity) {
            const auto& tr = tris[t];
            for (int i = 0; i < 3; ++i) {
                const int n = tr.nbr[i];
                if (n >= 0 && inCavity[n]) continue;
                boundary.push_back({tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], n});
            }
        }

        for (int t : cavity) alive[t] = 0;

        // retriangulate the cavity as a fan around vi
        std::map<int, int> byStart, byEnd;  // boundary edge start/end vertex -> new tri
        std::vector<int> created;
        for (const auto& e : boundary) {
            Triangulation::Tri nt;
            nt.v = {vi, e.a, e.b};
            nt.nbr = {e.outer, -1, -1};
            const int idx = static_cast<int>(tris.size());
            tris.push_back(nt);
            alive.push_back(1);
            created.push_back(idx);
            if (e.outer >= 0) {
                auto& ot = tris[e.outer];
                for (int i = 0; i < 3; ++i)
                    if (ot.v[(i + 1) % 3] == e.b && ot.v[(i + 2) % 3] == e.a) ot.nbr[i] = idx;
            }
            byStart[e.a] = idx;
            byEnd[e.b] = idx;
        }
        for (int idx : created) {
            auto& tr = tris[idx];
            // edge (vi, a) opposite v[2]=b pairs with the fan tri whose edge ends at a;
            // edge (b, vi) opposite v[1]=a pairs with the one whose edge starts at b
            auto itA = byEnd.find(tr.v[1]);
            if (itA != byEnd.end()) tr.nbr[2] = itA->second;
            auto itB = byStart.find(tr.v[2]);
            if (itB != byStart.end()) tr.nbr[1] = itB->second;
        }
    }
};

}  // namespace

Triangulation Triangulation::build(const std::vector<Eigen::Vector2d>& src) {
    if (src.size() < 3) throw TriangulationError("need at least 3 points");

    // normalize to a centred unit-scale box for predicate conditioning
    Eigen::Vector2d lo = src[0], hi = src[0];
    for (const auto& q : src) {
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }
    const Eigen::Vector2d center = 0.5 * (lo + hi);
    double span = (hi - lo).maxCoeff();
    if (span <= 0.0) span = 1.0;

    Builder b;
    b.p.reserve(src.size() + 3);
    for (const auto& q : src) b.p.push_back((q - center) / span);
    b.firstSuper = static_cast<int>(src.size());

    bool collinear = true;
    for (size_t i = 2; i < b.p.size() && collinear; ++i)
        if (std::abs(orient2d(b.p[0], b.p[1], b.p[i])) > 1e-12) collinear = false;
    if (collinear) throw TriangulationError("all points are collinear");

    const double r = 40.0;
    b.p.emplace_back(0.0, 3.0 * r);
    b.p.emplace_back(-2.6 * r, -1.5 * r);
    b.p.emplace_back(2.6 * r, -1.5 * r);
    Triangulation::Tri super;
    super.v = {b.firstSuper, b.firstSuper + 1, b.firstSuper + 2};
    if (orient2d(b.p[super.v[0]], b.p[super.v[1]], b.p[super.v[2]]) < 0) std::swap(super.v[1], super.v[2]);
    super.nbr = {-1, -1, -1};
    b.tris.push_back(super);
    b.alive.push_back(1);

    for (int i = 0; i < b.firstSuper; ++i) b.insert(i);

    // keep real triangles, rebuild adjacency on compacted indices
    Triangulation out;
    out.pts_ = src;
    std::map<std::pair<int, int>, std::pair<int, int>> edgeOwner;  // undirected edge -> (tri, slot)
    for (size_t t = 0; t < b.tris.size(); ++t) {
        if (!b.alive[t]) continue;
        const auto& tr = b.tris[t];
        if (b.isSuper(tr.v[0]) || b.isSuper(tr.v[1]) || b.isSuper(tr.v[2])) continue;
        if (std::abs(orient2d(b.p[tr.v[0]], b.p[tr.v[1]], b.p[tr.v[2]])) < 1e-14) continue;
        Tri nt;
        nt.v = tr.v;
        nt.nbr = {-1, -1, -1};
        out.tris_.push_back(nt);
    }
    if (out.tris_.empty()) throw TriangulationError("degenerate point set");
    for (size_t t = 0; t < out.tris_.size(); ++t) {
        auto& tr = out.tris_[t];
        for (int i = 0; i < 3; ++i) {
            int a = tr.v[(i + 1) % 3], bb = tr.v[(i + 2) % 3];
            if (a > bb) std::swap(a, bb);
            auto it = edgeOwner.find({a, bb});
            if (it == edgeOwner.end()) {
                edgeOwner[{a, bb}] = {static_cast<int>(t), i};
            } else {
                tr.nbr[i] = it->second.first;
                out.tris_[it->second.first].nbr[it->second.second] = static_cast<int>(t);
            }
        }
    }
    return out;
}

int Triangulation::locate(double u, double v, int hint) const {
    const Eigen::Vector2d q(u, v);
    int t = (hint >= 0 && hint < static_cast<int>(tris_.size())) ? hint : 0;
    const int cap = 4 * static_cast<int>(tris_.size()) + 16;
    for (int step = 0; step < cap; ++step) {
        const auto& tr = tris_[t];
        const double area = orient2d(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]]);
        int worst = -1;
        double worstVal = -1e-12 * std::abs(area);
        for (int i = 0; i < 3; ++i) {
            const double o = orient2d(pts_[tr.v[(i + 1) % 3]], pts_[tr.v[(i + 2) % 3]], q);
            if (o < worstVal) {
                worstVal = o;
                worst = i;
            }
        }
        if (worst < 0) return t;
        if (tr.nbr[worst] < 0) {
            // possibly a grazing exit; confirm with an exhaustive scan only
            // when the point is close to this triangle
            break;
        }
        t = tr.nbr[worst];
    }
    for (size_t i = 0; i < tris_.size(); ++i) {
        const auto& tr = tris_[i];
        const double area = std::abs(orient2d(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]]));
        bool ok = area > 0;
        for (int k = 0; k < 3 && ok; ++k)
            ok = orient2d(pts_[tr.v[(k + 1) % 3]], pts_[tr.v[(k + 2) % 3]], q) >= -1e-12 * area - 1e-300;
        if (ok) return static_cast<int>(i);
    }
    return -1;
}

Eigen::Vector3d Triangulation::barycentric(int t, double u, double v) const {
    const auto& tr = tris_[t];
    const Eigen::Vector2d& a = pts_[tr.v[0]];
    const Eigen::Vector2d& b = pts_[tr.v[1]];
    const Eigen::Vector2d& c = pts_[tr.v[2]];
    const Eigen::Vector2d q(u, v);
    const double area = orient2d(a, b, c);
    Eigen::Vector3d w;
    w[0] = orient2d(q, b, c) / area;
    w[1] = orient2d(a, q, c) / area;
    w[2] = 1.0 - w[0] - w[1];
    return w;
}

double Triangulation::hullArea() const {
    double total = 0.0;
    for (const auto& tr : tris_)
        total += 0.5 * std::abs(orient2d(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]]));
    return total;
}

std::vector<std::pair<int, int>> Triangulation::edges() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& tr : tris_) {
        for (int i = 0; i < 3; ++i) {
            int a = tr.v[i], b = tr.v[(i + 1) % 3];
            if (a > b) std::swap(a, b);
            out.emplace_back(a, b);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace skinft
