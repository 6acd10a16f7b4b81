#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgwave/dg_basis.hpp"
#include "sgwave/gpc.hpp"
#include "sgwave/mesh.hpp"

namespace sgwave {

/// Coefficient tensor over (cell, gPC mode, local dof). Coefficients are
/// taken against the physically orthonormal local basis, so the L2(D)
/// norm of the represented function is the plain 2-norm of the data.
class DgScalarField {
public:
    DgScalarField() = default;
    DgScalarField(int cells, int modes, int dofs)
        : cells_(cells), modes_(modes), dofs_(dofs),
          data_(static_cast<std::size_t>(cells) * modes * dofs, 0.0) {}

    int cells() const { return cells_; }
    int modes() const { return modes_; }
    int dofs() const { return dofs_; }

    double& at(int cell, int m, int j) { return data_[offset(cell, m, j)]; }
    double at(int cell, int m, int j) const { return data_[offset(cell, m, j)]; }

    /// Contiguous modes*dofs block of one cell, mode-major.
    std::span<double> cell_block(int cell) {
        return {data_.data() + offset(cell, 0, 0), static_cast<std::size_t>(modes_) * dofs_};
    }
    std::span<const double> cell_block(int cell) const {
        return {data_.data() + offset(cell, 0, 0), static_cast<std::size_t>(modes_) * dofs_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const DgScalarField& o) const {
        return cells_ == o.cells_ && modes_ == o.modes_ && dofs_ == o.dofs_;
    }

    double squared_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return s;
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : data_) s = std::max(s, std::abs(v));
        return s;
    }

private:
    std::size_t offset(int cell, int m, int j) const {
        return (static_cast<std::size_t>(cell) * modes_ + m) * dofs_ + j;
    }

    int cells_ = 0, modes_ = 0, dofs_ = 0;
    std::vector<double> data_;
};

struct DgVectorField {
    DgScalarField x, z;
    double squared_norm() const { return x.squared_norm() + z.squared_norm(); }
};

inline double dot(const DgScalarField& a, const DgScalarField& b) {
    double s = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
    return s;
}

inline double dot(const DgVectorField& a, const DgVectorField& b) {
    return dot(a.x, b.x) + dot(a.z, b.z);
}

/// Per-mode one-sided values of the field at a point of a cell edge.
/// `along` is the physical coordinate along the edge. Boundary edges only
/// expose the interior side.
inline void trace_modes(const DgScalarField& f, const Mesh2D& mesh, const LocalBasis& basis,
                        const EdgeRef& edge, Side side, double along, std::span<double> out) {
    const int cell = mesh.edge_cell(edge, side);
    if (cell < 0)
        throw std::invalid_argument("trace_modes: requested side lies outside the domain");
    const int k1 = basis.degree() + 1;
    const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
    // reference coordinates of the point within `cell`
    double xi, eta;
    if (edge.axis == Axis::x) {
        xi = (side == Side::minus) ? 1.0 : -1.0;
        eta = mesh.to_ref_z(mesh.cell_iz(cell), along);
    } else {
        eta = (side == Side::minus) ? 1.0 : -1.0;
        xi = mesh.to_ref_x(mesh.cell_ix(cell), along);
    }
    std::vector<double> vx(k1), vz(k1);
    for (int p = 0; p < k1; ++p) {
        vx[p] = LocalBasis::eval1(p, xi);
        vz[p] = LocalBasis::eval1(p, eta);
    }
    for (int m = 0; m < f.modes(); ++m) {
        double s = 0.0;
        for (int pz = 0; pz < k1; ++pz)
            for (int px = 0; px < k1; ++px)
                s += f.at(cell, m, basis.dof(px, pz)) * vx[px] * vz[pz];
        out[m] = s * scale;
    }
}

/// Point value of the expansion sum_m v_m(x) Phi_m(y). On interior mesh
/// lines a side selector is required for the corresponding direction.
inline double evaluate_field(const DgScalarField& f, const Mesh2D& mesh, const LocalBasis& basis,
                             const GpcBasis& gpc, double x, double z, const double* y,
                             std::optional<Side> side_x = {}, std::optional<Side> side_z = {}) {
    const int ix = mesh.locate_x(x, side_x);
    const int iz = mesh.locate_z(z, side_z);
    const int cell = mesh.cell_index(ix, iz);
    const int k1 = basis.degree() + 1;
    const double xi = mesh.to_ref_x(ix, x);
    const double eta = mesh.to_ref_z(iz, z);
    const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
    std::vector<double> vx(k1), vz(k1);
    for (int p = 0; p < k1; ++p) {
        vx[p] = LocalBasis::eval1(p, xi);
        vz[p] = LocalBasis::eval1(p, eta);
    }
    double total = 0.0;
    for (int m = 0; m < f.modes(); ++m) {
        double s = 0.0;
        for (int pz = 0; pz < k1; ++pz)
            for (int px = 0; px < k1; ++px)
                s += f.at(cell, m, basis.dof(px, pz)) * vx[px] * vz[pz];
        total += s * scale * gpc.eval(m, y);
    }
    return total;
}

}  // namespace sgwave
