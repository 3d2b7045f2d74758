#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace skinft {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct FrameMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Mat3 skew(const Vec3& u) {
    Mat3 s;
    s << 0.0, -u.z(), u.y(),
         u.z(), 0.0, -u.x(),
        -u.y(), u.x(), 0.0;
    return s;
}

// 6D force, ordered [force; moment].
struct Wrench {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
    std::string frame;

    Vec6 vec() const {
        Vec6 v;
        v << force, moment;
        return v;
    }
    static Wrench fromVec(const Vec6& v, std::string frame) {
        return {v.head<3>(), v.tail<3>(), std::move(frame)};
    }
};

// 6D velocity, ordered [linear; angular].
struct Twist {
    Vec3 linear = Vec3::Zero();
    Vec3 angular = Vec3::Zero();
    std::string frame;
};

// Rigid transform carrying wrenches and twists from frame `from` to frame `to`.
struct SpatialTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    std::string from;
    std::string to;

    SpatialTransform() = default;
    SpatialTransform(const Mat3& R, const Vec3& o, std::string from_, std::string to_)
        : rotation(R), translation(o), from(std::move(from_)), to(std::move(to_)) {
        if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-10)
            throw ModelError("rotation is not orthonormal");
        if (std::abs(R.determinant() - 1.0) > 1e-10)
            throw ModelError("rotation determinant is not +1");
    }

    static SpatialTransform identity(const std::string& frame) {
        return SpatialTransform(Mat3::Identity(), Vec3::Zero(), frame, frame);
    }

    SpatialTransform inverse() const {
        return SpatialTransform(rotation.transpose(),
                                -(rotation.transpose() * translation), to, from);
    }

    // 6x6 wrench transform matrix [R 0; o^ R  R].
    Mat6 forceMatrix() const {
        Mat6 x = Mat6::Zero();
        x.topLeftCorner<3, 3>() = rotation;
        x.bottomLeftCorner<3, 3>() = skew(translation) * rotation;
        x.bottomRightCorner<3, 3>() = rotation;
        return x;
    }
};

// Mass, center of mass and 3D inertia about the link-frame origin.
struct SpatialInertia {
    double mass = 0.0;
    Vec3 com = Vec3::Zero();
    Mat3 inertia = Mat3::Zero();

    SpatialInertia() = default;
    SpatialInertia(double m, const Vec3& c, const Mat3& rot) : mass(m), com(c), inertia(rot) {
        if (m < 0.0) throw ModelError("negative mass");
        if ((rot - rot.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ModelError("inertia matrix is not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat3> es(rot);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw ModelError("inertia matrix is not positive semidefinite");
    }

    // Assembled 6x6 inertia, [m 1  -m c^; m c^  I].
    Mat6 matrix() const {
        Mat6 m = Mat6::Zero();
        m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
        m.topRightCorner<3, 3>() = -mass * skew(com);
        m.bottomLeftCorner<3, 3>() = mass * skew(com);
        m.bottomRightCorner<3, 3>() = inertia;
        return m;
    }
};

// Proper acceleration [linear - gravity; angular] plus angular velocity, all in `frame`.
struct ProperKinematics {
    Vec6 properAcc = Vec6::Zero();
    Vec3 angVel = Vec3::Zero();
    std::string frame;
};

inline void requireFrame(const std::string& got, const std::string& want, const char* where) {
    if (got != want)
        throw FrameMismatch(std::string(where) + ": expected frame '" + want + "', got '" + got + "'");
}

inline Wrench transformWrench(const SpatialTransform& x, const Wrench& f) {
    requireFrame(f.frame, x.from, "transformWrench");
    Wrench out;
    out.force = x.rotation * f.force;
    out.moment = x.translation.cross(x.rotation * f.force) + x.rotation * f.moment;
    out.frame = x.to;
    return out;
}

inline Twist transformTwist(const SpatialTransform& x, const Twist& v) {
    requireFrame(v.frame, x.from, "transformTwist");
    Twist out;
    out.angular = x.rotation * v.angular;
    out.linear = x.rotation * v.linear + x.translation.cross(x.rotation * v.angular);
    out.frame = x.to;
    return out;
}

inline SpatialTransform composeTransform(const SpatialTransform& x1, const SpatialTransform& x2) {
    requireFrame(x2.to, x1.from, "composeTransform");
    return SpatialTransform(x1.rotation * x2.rotation,
                            x1.translation + x1.rotation * x2.translation, x2.from, x1.to);
}

// Dual cross product v x* f, ordered for [force; moment] wrenches.
inline Wrench dualCross(const Twist& v, const Wrench& f) {
    requireFrame(f.frame, v.frame, "dualCross");
    Wrench out;
    out.force = v.angular.cross(f.force);
    out.moment = v.linear.cross(f.force) + v.angular.cross(f.moment);
    out.frame = f.frame;
    return out;
}

// Wrench produced by a proper acceleration through the rigid-body inertia.
// Frame is left empty; callers stamp it.
inline Wrench applyInertia(const SpatialInertia& m, const Vec6& a) {
    const Vec3 lin = a.head<3>();
    const Vec3 ang = a.tail<3>();
    Wrench out;
    out.force = m.mass * lin - m.mass * m.com.cross(ang);
    out.moment = m.mass * m.com.cross(lin) + m.inertia * ang;
    return out;
}

inline double powerPairing(const Wrench& f, const Twist& v) {
    requireFrame(f.frame, v.frame, "powerPairing");
    return f.force.dot(v.linear) + f.moment.dot(v.angular);
}

}  // namespace skinft
