#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgwave/dg_basis.hpp"
#include "sgwave/gpc.hpp"
#include "sgwave/mesh.hpp"

namespace sgwave {

/// Random wave-speed coefficient a(x,y), piecewise smooth on an axis-
/// aligned region grid cut by interface lines. Evaluators receive the
/// resolved region index so one-sided limits at interfaces are explicit.
/// The stored field is a^2 (what the problem definitions provide); a is
/// its positive square root.
struct CoefficientModel {
    std::vector<double> interfaces_x;  // sorted, strictly interior vertical lines
    std::vector<double> interfaces_z;

    /// a^2(x, z, y) on the given region.
    std::function<double(double, double, const double*, int)> a2;
    /// Spatial gradient of a (not a^2) on the given region; may be empty
    /// when x_independent.
    std::function<std::array<double, 2>(double, double, const double*, int)> grad_a;

    /// a constant in (x,z) within every region; gradients vanish.
    bool x_independent = true;
    double a_min = 0.0;
    double a_max = 0.0;

    int regions_x() const { return static_cast<int>(interfaces_x.size()) + 1; }
    int regions_z() const { return static_cast<int>(interfaces_z.size()) + 1; }
    int region_count() const { return regions_x() * regions_z(); }
    int region_index(int rx, int rz) const { return rz * regions_x() + rx; }

    int region_of(double x, double z, std::optional<Side> side_x = {},
                  std::optional<Side> side_z = {}) const {
        return region_index(band(x, interfaces_x, side_x), band(z, interfaces_z, side_z));
    }

    double a(double x, double z, const double* y, std::optional<Side> side_x = {},
             std::optional<Side> side_z = {}) const {
        const double v = a2(x, z, y, region_of(x, z, side_x, side_z));
        if (!(v > 0.0))
            throw std::domain_error("CoefficientModel: a^2 must be positive everywhere sampled");
        return std::sqrt(v);
    }

    std::array<double, 2> grad(double x, double z, const double* y,
                               std::optional<Side> side_x = {},
                               std::optional<Side> side_z = {}) const {
        if (!grad_a) return {0.0, 0.0};
        return grad_a(x, z, y, region_of(x, z, side_x, side_z));
    }

private:
    static int band(double v, const std::vector<double>& lines, std::optional<Side> side) {
        int b = 0;
        for (double line : lines) {
            if (std::abs(v - line) < 1e-12) {
                if (!side)
                    throw std::invalid_argument(
                        "CoefficientModel: point on a region interface; side selector required");
                return (*side == Side::minus) ? b : b + 1;
            }
            if (v > line) ++b;
        }
        return b;
    }
};

/// Galerkin coefficient matrix A(x)_kj = E[a(x,.) Phi_k Phi_j], by the
/// basis quadrature. Symmetric positive definite for positive a.
inline Eigen::MatrixXd assemble_A(const CoefficientModel& model, const GpcBasis& gpc, double x,
                                  double z, std::optional<Side> side_x = {},
                                  std::optional<Side> side_z = {}) {
    const int region = model.region_of(x, z, side_x, side_z);
    const int m_count = gpc.size();
    const auto& quad = gpc.quadrature();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(
        gpc.phi_table().data(), quad.size(), m_count);
    Eigen::VectorXd s(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double v = model.a2(x, z, quad.node(q), region);
        if (!(v > 0.0))
            throw std::domain_error("assemble_A: a^2 must be positive everywhere sampled");
        s[q] = quad.weights[q] * std::sqrt(v);
    }
    return B.transpose() * s.asDiagonal() * B;
}

/// (A_x, A_z): entrywise spatial gradient matrices of A.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_grad_A(
    const CoefficientModel& model, const GpcBasis& gpc, double x, double z,
    std::optional<Side> side_x = {}, std::optional<Side> side_z = {}) {
    const int m_count = gpc.size();
    if (model.x_independent || !model.grad_a)
        return {Eigen::MatrixXd::Zero(m_count, m_count), Eigen::MatrixXd::Zero(m_count, m_count)};
    const int region = model.region_of(x, z, side_x, side_z);
    const auto& quad = gpc.quadrature();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(
        gpc.phi_table().data(), quad.size(), m_count);
    Eigen::VectorXd sx(quad.size()), sz(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) {
        auto g = model.grad_a(x, z, quad.node(q), region);
        sx[q] = quad.weights[q] * g[0];
        sz[q] = quad.weights[q] * g[1];
    }
    return {B.transpose() * sx.asDiagonal() * B, B.transpose() * sz.asDiagonal() * B};
}

/// A and its gradient matrices evaluated at every volume and edge
/// quadrature point of a mesh, with one-sided limits resolved by the
/// owning cell. For x-independent coefficients a single matrix per
/// region is stored.
class GalerkinCoeffField {
public:
    GalerkinCoeffField() = default;

    GalerkinCoeffField(CoefficientModel model, GpcBasis gpc, Mesh2D mesh, LocalBasis basis)
        : model_(std::move(model)), gpc_(std::move(gpc)), mesh_(std::move(mesh)),
          basis_(std::move(basis)) {
        const int cells = mesh_.cell_count();
        cell_region_.resize(cells);
        for (int c = 0; c < cells; ++c)
            cell_region_[c] =
                model_.region_of(mesh_.cell_x_center(mesh_.cell_ix(c)),
                                 mesh_.cell_z_center(mesh_.cell_iz(c)));
        zero_ = Eigen::MatrixXd::Zero(gpc_.size(), gpc_.size());

        if (model_.x_independent) {
            region_A_.resize(model_.region_count());
            std::vector<bool> done(model_.region_count(), false);
            for (int c = 0; c < cells; ++c) {
                int r = cell_region_[c];
                if (done[r]) continue;
                region_A_[r] = assemble_A(model_, gpc_, mesh_.cell_x_center(mesh_.cell_ix(c)),
                                          mesh_.cell_z_center(mesh_.cell_iz(c)));
                done[r] = true;
            }
            // regions not hit by any cell stay empty; they are never read
            return;
        }

        const int nv = basis_.volume_pts();
        const int ne = basis_.edge_pts();
        vol_A_.resize(static_cast<std::size_t>(cells) * nv * nv);
        vol_Ax_.resize(vol_A_.size());
        vol_Az_.resize(vol_A_.size());
        edge_A_.resize(static_cast<std::size_t>(cells) * 4 * ne);
        for (int c = 0; c < cells; ++c) {
            const int ix = mesh_.cell_ix(c), iz = mesh_.cell_iz(c);
            const double xl = mesh_.x_line(ix), zl = mesh_.z_line(iz);
            for (int b = 0; b < nv; ++b) {
                const double zq = zl + 0.5 * (basis_.line_rule().nodes[b] + 1.0) * mesh_.hz();
                for (int a = 0; a < nv; ++a) {
                    const double xq = xl + 0.5 * (basis_.line_rule().nodes[a] + 1.0) * mesh_.hx();
                    const std::size_t idx = vol_index(c, b * nv + a);
                    vol_A_[idx] = assemble_at(xq, zq, c);
                    auto [gx, gz] = grad_at(xq, zq, c);
                    vol_Ax_[idx] = std::move(gx);
                    vol_Az_[idx] = std::move(gz);
                }
            }
            for (int e = 0; e < ne; ++e) {
                const double t = basis_.edge_rule().nodes[e];
                const double xq = xl + 0.5 * (t + 1.0) * mesh_.hx();
                const double zq = zl + 0.5 * (t + 1.0) * mesh_.hz();
                edge_A_[edge_index(c, CellEdge::left, e)] = assemble_at(mesh_.x_line(ix), zq, c);
                edge_A_[edge_index(c, CellEdge::right, e)] =
                    assemble_at(mesh_.x_line(ix + 1), zq, c);
                edge_A_[edge_index(c, CellEdge::bottom, e)] = assemble_at(xq, mesh_.z_line(iz), c);
                edge_A_[edge_index(c, CellEdge::top, e)] = assemble_at(xq, mesh_.z_line(iz + 1), c);
            }
        }
    }

    const CoefficientModel& model() const { return model_; }
    const GpcBasis& gpc() const { return gpc_; }
    const Mesh2D& mesh() const { return mesh_; }
    const LocalBasis& basis() const { return basis_; }

    bool per_region() const { return model_.x_independent; }
    bool grad_zero() const { return model_.x_independent; }
    int cell_region(int cell) const { return cell_region_[cell]; }

    const Eigen::MatrixXd& volume_A(int cell, int q) const {
        return per_region() ? region_A_[cell_region_[cell]] : vol_A_[vol_index(cell, q)];
    }
    const Eigen::MatrixXd& volume_Ax(int cell, int q) const {
        return per_region() ? zero_ : vol_Ax_[vol_index(cell, q)];
    }
    const Eigen::MatrixXd& volume_Az(int cell, int q) const {
        return per_region() ? zero_ : vol_Az_[vol_index(cell, q)];
    }
    /// Trace of A on a cell edge, from inside that cell.
    const Eigen::MatrixXd& edge_A(int cell, CellEdge e, int pt) const {
        return per_region() ? region_A_[cell_region_[cell]] : edge_A_[edge_index(cell, e, pt)];
    }

    /// A at an arbitrary point of a cell, one-sided limits resolved by
    /// that cell's region.
    Eigen::MatrixXd A_in_cell(int cell, double x, double z) const {
        if (per_region()) return region_A_[cell_region_[cell]];
        return assemble_at(x, z, cell);
    }

private:
    Eigen::MatrixXd assemble_at(double x, double z, int cell) const {
        std::optional<Side> sx, sz;
        resolve_sides(cell, x, z, sx, sz);
        return assemble_A(model_, gpc_, x, z, sx, sz);
    }
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> grad_at(double x, double z, int cell) const {
        std::optional<Side> sx, sz;
        resolve_sides(cell, x, z, sx, sz);
        return assemble_grad_A(model_, gpc_, x, z, sx, sz);
    }
    void resolve_sides(int cell, double x, double z, std::optional<Side>& sx,
                       std::optional<Side>& sz) const {
        // pick the side placing the point in the owning cell's region
        const double xc = mesh_.cell_x_center(mesh_.cell_ix(cell));
        const double zc = mesh_.cell_z_center(mesh_.cell_iz(cell));
        sx = (x > xc) ? Side::minus : Side::plus;
        sz = (z > zc) ? Side::minus : Side::plus;
    }

    std::size_t vol_index(int cell, int q) const {
        return static_cast<std::size_t>(cell) * basis_.volume_pts() * basis_.volume_pts() + q;
    }
    std::size_t edge_index(int cell, CellEdge e, int pt) const {
        return (static_cast<std::size_t>(cell) * 4 + static_cast<int>(e)) * basis_.edge_pts() + pt;
    }

    CoefficientModel model_;
    GpcBasis gpc_;
    Mesh2D mesh_;
    LocalBasis basis_;
    std::vector<int> cell_region_;
    std::vector<Eigen::MatrixXd> region_A_;
    std::vector<Eigen::MatrixXd> vol_A_, vol_Ax_, vol_Az_, edge_A_;
    Eigen::MatrixXd zero_;
};

}  // namespace sgwave
