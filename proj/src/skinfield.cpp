#include "skinft/skinfield.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace skinft {

std::vector<FieldPoint> sampleTaxelDisks(const SkinPatch& patch, const PressureFrame& frame) {
    if (frame.linkName != patch.linkName)
        throw SkinError("pressure frame link '" + frame.linkName + "' does not match patch '" +
                        patch.linkName + "'");
    if (frame.pressure.size() != patch.taxels.size())
        throw SkinError("pressure frame size does not match taxel count");

    std::vector<FieldPoint> out;
    out.reserve(patch.taxels.size() * 9);
    for (size_t i = 0; i < patch.taxels.size(); ++i) {
        const Taxel& t = patch.taxels[i];
        const double p = frame.pressure[i];
        if (!std::isfinite(p)) throw SkinError("non-finite pressure sample");
        FieldPoint c{t.u, t.v, p, t.position, t.normal, static_cast<int>(i)};
        out.push_back(c);
        for (int k = 0; k < 8; ++k) {
            const double a = 2.0 * M_PI * k / 8.0;
            FieldPoint b = c;
            b.u = t.u + t.radius * std::cos(a);
            b.v = t.v + t.radius * std::sin(a);
            out.push_back(b);
        }
    }
    return out;
}

InterpolatedFields::InterpolatedFields(std::vector<FieldPoint> points)
    : pts_(std::move(points)),
      tri_([this] {
          std::vector<Eigen::Vector2d> uv;
          uv.reserve(pts_.size());
          for (const auto& p : pts_) uv.emplace_back(p.u, p.v);
          return Triangulation::build(uv);
      }()) {}

InterpolatedFields buildFields(std::vector<FieldPoint> points) {
    if (points.size() < 3) throw SkinError("need at least 3 interpolation points");
    // near-duplicate UV points keep the maximum-pressure datum
    std::vector<FieldPoint> kept;
    kept.reserve(points.size());
    constexpr double kDupTol = 1e-9;
    for (const auto& p : points) {
        bool dup = false;
        for (auto& q : kept) {
            if (std::abs(p.u - q.u) < kDupTol && std::abs(p.v - q.v) < kDupTol) {
                if (p.p > q.p) q = p;
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(p);
    }
    return InterpolatedFields(std::move(kept));
}

InterpolatedFields::Sample InterpolatedFields::sampleAt(double u, double v, int hint) const {
    Sample s;
    const int t = tri_.locate(u, v, hint);
    if (t < 0) return s;
    s.inside = true;
    s.tri = t;
    Eigen::Vector3d w = tri_.barycentric(t, u, v);
    const auto& tr = tri_.triangles()[t];
    // snap to a vertex datum when the query coincides with a data point
    for (int i = 0; i < 3; ++i) {
        if (w[i] >= 1.0 - 1e-12) {
            const FieldPoint& fp = pts_[tr.v[i]];
            s.p = fp.p;
            s.position = fp.position;
            s.rawNormal = fp.normal;
            s.componentOwner = fp.taxelIndex;
            return s;
        }
    }
    s.p = 0.0;
    s.position.setZero();
    s.rawNormal.setZero();
    s.componentOwner = std::numeric_limits<int>::max();
    for (int i = 0; i < 3; ++i) {
        const FieldPoint& fp = pts_[tr.v[i]];
        s.p += w[i] * fp.p;
        s.position += w[i] * fp.position;
        s.rawNormal += w[i] * fp.normal;
        s.componentOwner = std::min(s.componentOwner, fp.taxelIndex);
    }
    return s;
}

double InterpolatedFields::pressureAt(double u, double v) const {
    const Sample s = sampleAt(u, v, 0);
    return s.inside ? s.p : 0.0;
}

Vec3 InterpolatedFields::positionAt(double u, double v) const {
    const Sample s = sampleAt(u, v, 0);
    if (!s.inside) throw SkinError("position query outside the interpolation hull");
    return s.position;
}

Vec3 InterpolatedFields::normalAt(double u, double v) const {
    const Sample s = sampleAt(u, v, 0);
    if (!s.inside) throw SkinError("normal query outside the interpolation hull");
    const double n = s.rawNormal.norm();
    if (n < 1e-8) throw SkinError("degenerate interpolated normal");
    return s.rawNormal / n;
}

namespace {

// Shared midpoint-rule sweep for force and torque.
template <typename CellFn>
void quadratureSweep(const InterpolatedFields& fields, const std::array<double, 4>& bounds,
                     const QuadratureOptions& opt, CellFn&& cell) {
    if (opt.resolution < 2) throw SkinError("quadrature resolution must be at least 2");
    const double u1 = bounds[0], u2 = bounds[1], v1 = bounds[2], v2 = bounds[3];
    const int n = opt.resolution;
    const double du = (u2 - u1) / n;
    const double dv = (v2 - v1) / n;
    const double dA = du * dv;
    int hint = 0;
    for (int j = 0; j < n; ++j) {
        const double v = v1 + (j + 0.5) * dv;
        for (int i = 0; i < n; ++i) {
            const double u = u1 + (i + 0.5) * du;
            const auto s = fields.sampleAt(u, v, hint);
            if (!s.inside) continue;
            hint = s.tri;
            if (s.p == 0.0) continue;
            const double nn = s.rawNormal.norm();
            if (nn < 1e-8) throw SkinError("degenerate interpolated normal in quadrature");
            double metric = 1.0;
            if (opt.metricFactor) {
                const double h = 0.25 * std::min(du, dv);
                const auto su0 = fields.sampleAt(u - h, v, s.tri);
                const auto su1 = fields.sampleAt(u + h, v, s.tri);
                const auto sv0 = fields.sampleAt(u, v - h, s.tri);
                const auto sv1 = fields.sampleAt(u, v + h, s.tri);
                if (su0.inside && su1.inside && sv0.inside && sv1.inside) {
                    const Vec3 ru = (su1.position - su0.position) / (2.0 * h);
                    const Vec3 rv = (sv1.position - sv0.position) / (2.0 * h);
                    metric = ru.cross(rv).norm();
                }
            }
            cell(s, s.rawNormal / nn, metric * dA);
        }
    }
}

}  // namespace

Vec3 integrateForce(const InterpolatedFields& fields, const std::array<double, 4>& bounds,
                    const QuadratureOptions& opt) {
    Vec3 f = Vec3::Zero();
    quadratureSweep(fields, bounds, opt,
                    [&](const InterpolatedFields::Sample& s, const Vec3& n, double dA) {
                        f += s.p * n * dA;
                    });
    return f;
}

Vec3 integrateTorque(const InterpolatedFields& fields, const std::array<double, 4>& bounds,
                     const QuadratureOptions& opt) {
    Vec3 mu = Vec3::Zero();
    quadratureSweep(fields, bounds, opt,
                    [&](const InterpolatedFields::Sample& s, const Vec3& n, double dA) {
                        mu += s.position.cross(s.p * n) * dA;
                    });
    return mu;
}

double simplifiedForce(const SkinPatch& patch, const PressureFrame& frame) {
    if (frame.pressure.size() != patch.taxels.size())
        throw SkinError("pressure frame size does not match taxel count");
    if (patch.taxels.empty()) return 0.0;
    const double area = patch.taxels.front().area;
    Vec3 sum = Vec3::Zero();
    for (size_t i = 0; i < patch.taxels.size(); ++i)
        sum += frame.pressure[i] * patch.taxels[i].normal;
    return (area * sum).norm();
}

std::vector<SkinContact> detectContacts(const SkinPatch& patch, const PressureFrame& frame,
                                        const InterpolatedFields& fields, double threshold,
                                        const QuadratureOptions& opt) {
    const size_t nTaxels = patch.taxels.size();
    std::vector<char> active(nTaxels, 0);
    for (size_t i = 0; i < nTaxels; ++i) active[i] = frame.pressure[i] > threshold;

    // taxel adjacency from triangulation edges between their sample points
    std::vector<std::vector<int>> adj(nTaxels);
    for (const auto& [a, b] : fields.triangulation().edges()) {
        const int ta = fields.points()[a].taxelIndex;
        const int tb = fields.points()[b].taxelIndex;
        if (ta == tb || ta < 0 || tb < 0) continue;
        adj[ta].push_back(tb);
        adj[tb].push_back(ta);
    }

    std::vector<int> component(nTaxels, -1);
    int nComp = 0;
    for (size_t seed = 0; seed < nTaxels; ++seed) {
        if (!active[seed] || component[seed] >= 0) continue;
        std::vector<int> stack{static_cast<int>(seed)};
        component[seed] = nComp;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int n : adj[t]) {
                if (active[n] && component[n] < 0) {
                    component[n] = nComp;
                    stack.push_back(n);
                }
            }
        }
        ++nComp;
    }
    if (nComp == 0) return {};

    std::vector<SkinContact> contacts(nComp);
    std::vector<double> pressureSum(nComp, 0.0);
    for (auto& c : contacts) {
        c.linkName = patch.linkName;
        c.wrench.frame = patch.linkName;
    }
    for (size_t i = 0; i < nTaxels; ++i) {
        if (component[i] < 0) continue;
        SkinContact& c = contacts[component[i]];
        c.activatedTaxels.push_back(patch.taxels[i].id);
        c.location += frame.pressure[i] * patch.taxels[i].position;
        pressureSum[component[i]] += frame.pressure[i];
    }
    for (int k = 0; k < nComp; ++k)
        if (pressureSum[k] > 0.0) contacts[k].location /= pressureSum[k];

    // quadrature restricted to cells whose triangle touches the component's taxels
    std::vector<Vec3> force(nComp, Vec3::Zero()), torque(nComp, Vec3::Zero());
    quadratureSweep(fields, patch.chartBounds, opt,
                    [&](const InterpolatedFields::Sample& s, const Vec3& n, double dA) {
                        const auto& tr = fields.triangulation().triangles()[s.tri];
                        int comp = -1;
                        for (int i = 0; i < 3 && comp < 0; ++i) {
                            const int tx = fields.points()[tr.v[i]].taxelIndex;
                            if (tx >= 0 && component[tx] >= 0) comp = component[tx];
                        }
                        if (comp < 0) return;
                        force[comp] += s.p * n * dA;
                        torque[comp] += s.position.cross(s.p * n) * dA;
                    });
    for (int k = 0; k < nComp; ++k) {
        contacts[k].wrench.force = force[k];
        contacts[k].wrench.moment = torque[k];
    }
    return contacts;
}

}  // namespace skinft
