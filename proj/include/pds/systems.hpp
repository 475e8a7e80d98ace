#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pds/errors.hpp"

namespace pds {

/// Restoring-force law of the attachment spring.
///
/// The piecewise variant is linear with slope k0 on the center band
/// |z| <= knee, and slopes alpha_pos / alpha_neg beyond it; the offsets
/// that make the force continuous at the knees are implied, never stored.
struct SpringLaw {
    enum class Kind { linear, cubic, piecewise };

    Kind kind = Kind::linear;
    double k = 0.0;          // linear coefficient (k for linear, k of cubic, k0 for piecewise)
    double c = 0.0;          // cubic coefficient
    double alpha_pos = 0.0;  // piecewise slope for z >= +knee
    double alpha_neg = 0.0;  // piecewise slope for z <= -knee
    double knee = 0.0;       // half-width of the center band (resolved 4*sigma_zeta)

    static SpringLaw linear(double k) { return {Kind::linear, k, 0, 0, 0, 0}; }
    static SpringLaw cubic(double k, double c) { return {Kind::cubic, k, c, 0, 0, 0}; }
    static SpringLaw piecewise(double k0, double alpha_pos, double alpha_neg,
                               double knee) {
        if (alpha_pos < 0 || alpha_neg < 0 || !(knee > 0))
            throw ConfigError("SpringLaw: piecewise needs alpha >= 0 and knee > 0");
        return {Kind::piecewise, k0, 0, alpha_pos, alpha_neg, knee};
    }

    double force(double z) const {
        switch (kind) {
            case Kind::linear: return k * z;
            case Kind::cubic: return k * z + c * z * z * z;
            case Kind::piecewise:
                if (z > knee) return alpha_pos * z + (k - alpha_pos) * knee;
                if (z < -knee) return alpha_neg * z - (k - alpha_neg) * knee;
                return k * z;
        }
        return 0.0;
    }

    /// Potential energy (integral of the restoring force from 0 to z).
    double energy(double z) const {
        switch (kind) {
            case Kind::cubic:
                return 0.5 * k * z * z + 0.25 * c * z * z * z * z;
            case Kind::piecewise: {
                const double az = std::abs(z);
                if (az <= knee) return 0.5 * k * z * z;
                const double a = (z > 0) ? alpha_pos : alpha_neg;
                const double beta = (k - a) * knee;
                return 0.5 * k * knee * knee + 0.5 * a * (az * az - knee * knee) +
                       beta * (az - knee);
            }
            case Kind::linear: default:
                return 0.5 * k * z * z;
        }
    }

    /// Stiffness used by the statistical-linearization stage for the
    /// background band (piecewise springs are linear there by construction).
    double background_stiffness() const { return k; }
    double background_cubic() const { return kind == Kind::cubic ? c : 0.0; }
};

enum class Topology { sdof, seat2dof, deckseat3dof };

/// Which velocities jump when an impulse arrives.
enum class ImpulsePattern { primary_only, all_dofs };

/// Base-excited oscillator in relative coordinates.
///
/// seat2dof:      state (x, x', v, v'),        primary DOF = seat x
/// deckseat3dof:  state (y, y', x, x', v, v'), primary DOF = deck y
/// sdof:          state (x, x'), no attachment (baseline / oracle runs)
struct SystemModel {
    Topology topology = Topology::seat2dof;
    double m_s = 1.0, lambda_s = 0.01, k_s = 1.0;
    double m_a = 0.0, lambda_a = 0.0;
    double m_h = 0.0, lambda_h = 0.0, k_h = 0.0;
    SpringLaw spring;

    std::size_t n_dof() const {
        switch (topology) {
            case Topology::sdof: return 1;
            case Topology::seat2dof: return 2;
            case Topology::deckseat3dof: return 3;
        }
        return 0;
    }
    std::size_t state_size() const { return 2 * n_dof(); }

    double primary_mass() const {
        return topology == Topology::deckseat3dof ? m_h : m_s;
    }
    double primary_stiffness() const {
        return topology == Topology::deckseat3dof ? k_h : k_s;
    }
    double primary_damping() const {
        return topology == Topology::deckseat3dof ? lambda_h : lambda_s;
    }

    void validate() const {
        if (!(m_s > 0) || !(k_s > 0) || lambda_s < 0)
            throw ConfigError("SystemModel: invalid primary parameters");
        if (topology != Topology::sdof && (!(m_a > 0) || lambda_a < 0))
            throw ConfigError("SystemModel: invalid attachment parameters");
        if (topology == Topology::deckseat3dof &&
            (!(m_h > 0) || !(k_h > 0) || lambda_h < 0))
            throw ConfigError("SystemModel: invalid hull parameters");
    }
};

/// A response quantity: which DOF and which time derivative (0 = displacement,
/// 1 = velocity, 2 = acceleration).
struct Quantity {
    std::size_t dof = 0;
    std::size_t deriv = 0;
    bool operator==(const Quantity&) const = default;
};

/// Short label like "x", "xdot", "vddot" (2DOF: x, v; 3DOF: y, x, v).
std::string quantity_label(Topology topology, Quantity q);

/// All (dof, derivative) pairs of a model, displacement-first per DOF.
std::vector<Quantity> all_quantities(const SystemModel& model);

/// Flat state vector (positions and velocities interleaved per DOF) plus time.
struct State {
    std::array<double, 6> u{};  // [z0, z0', z1, z1', z2, z2']
    double t = 0.0;
};

/// Time derivative of the state under the given base acceleration.
/// Every equation's right-hand side receives -(its mass) * base_accel.
void rhs(const SystemModel& model, const double* u, double base_accel,
         double* dudt);

/// Accelerations of every DOF for the given state (convenience wrapper).
std::array<double, 3> accelerations(const SystemModel& model, const double* u,
                                    double base_accel);

/// Increment the selected velocity components by n; displacements and time
/// are untouched.
State apply_impulse(const SystemModel& model, State s, double n,
                    ImpulsePattern pattern);

/// Kinetic plus potential energy (relative coordinates, no base forcing).
double mechanical_energy(const SystemModel& model, const double* u);

} // namespace pds
