#include "pds/systems.hpp"

#include <cmath>

namespace pds {

void rhs(const SystemModel& model, const double* u, double base_accel,
         double* dudt) {
    switch (model.topology) {
        case Topology::sdof: {
            const double x = u[0], xd = u[1];
            dudt[0] = xd;
            dudt[1] =
                (-model.lambda_s * xd - model.k_s * x) / model.m_s - base_accel;
            break;
        }
        case Topology::seat2dof: {
            const double x = u[0], xd = u[1], v = u[2], vd = u[3];
            const double fa = model.spring.force(x - v);
            dudt[0] = xd;
            dudt[1] = (-model.lambda_s * xd - model.k_s * x -
                       model.lambda_a * (xd - vd) - fa) /
                          model.m_s -
                      base_accel;
            dudt[2] = vd;
            dudt[3] = (-model.lambda_a * (vd - xd) + fa) / model.m_a - base_accel;
            break;
        }
        case Topology::deckseat3dof: {
            const double y = u[0], yd = u[1];
            const double x = u[2], xd = u[3];
            const double v = u[4], vd = u[5];
            const double fa = model.spring.force(y - v);
            dudt[0] = yd;
            dudt[1] = (-model.lambda_h * yd - model.k_h * y -
                       model.lambda_s * (yd - xd) - model.k_s * (y - x) -
                       model.lambda_a * (yd - vd) - fa) /
                          model.m_h -
                      base_accel;
            dudt[2] = xd;
            dudt[3] = (-model.lambda_s * (xd - yd) - model.k_s * (x - y)) /
                          model.m_s -
                      base_accel;
            dudt[4] = vd;
            dudt[5] = (-model.lambda_a * (vd - yd) + fa) / model.m_a - base_accel;
            break;
        }
    }
}

std::string quantity_label(Topology topology, Quantity q) {
    static const char* names2[] = {"x", "v"};
    static const char* names3[] = {"y", "x", "v"};
    const char* base = "x";
    if (topology == Topology::seat2dof && q.dof < 2) base = names2[q.dof];
    if (topology == Topology::deckseat3dof && q.dof < 3) base = names3[q.dof];
    static const char* suffix[] = {"", "dot", "ddot"};
    return std::string(base) + (q.deriv < 3 ? suffix[q.deriv] : "?");
}

std::vector<Quantity> all_quantities(const SystemModel& model) {
    std::vector<Quantity> qs;
    for (std::size_t dof = 0; dof < model.n_dof(); ++dof)
        for (std::size_t deriv = 0; deriv < 3; ++deriv)
            qs.push_back({dof, deriv});
    return qs;
}

std::array<double, 3> accelerations(const SystemModel& model, const double* u,
                                    double base_accel) {
    double dudt[6];
    rhs(model, u, base_accel, dudt);
    std::array<double, 3> a{};
    for (std::size_t i = 0; i < model.n_dof(); ++i) a[i] = dudt[2 * i + 1];
    return a;
}

State apply_impulse(const SystemModel& model, State s, double n,
                    ImpulsePattern pattern) {
    if (pattern == ImpulsePattern::all_dofs) {
        for (std::size_t i = 0; i < model.n_dof(); ++i) s.u[2 * i + 1] += n;
    } else {
        s.u[1] += n;
    }
    return s;
}

double mechanical_energy(const SystemModel& model, const double* u) {
    switch (model.topology) {
        case Topology::sdof:
            return 0.5 * model.m_s * u[1] * u[1] +
                   0.5 * model.k_s * u[0] * u[0];
        case Topology::seat2dof:
            return 0.5 * model.m_s * u[1] * u[1] +
                   0.5 * model.m_a * u[3] * u[3] +
                   0.5 * model.k_s * u[0] * u[0] +
                   model.spring.energy(u[0] - u[2]);
        case Topology::deckseat3dof:
            return 0.5 * model.m_h * u[1] * u[1] +
                   0.5 * model.m_s * u[3] * u[3] +
                   0.5 * model.m_a * u[5] * u[5] +
                   0.5 * model.k_h * u[0] * u[0] +
                   0.5 * model.k_s * (u[0] - u[2]) * (u[0] - u[2]) +
                   model.spring.energy(u[0] - u[4]);
    }
    return 0.0;
}

} // namespace pds
