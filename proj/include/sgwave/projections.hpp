#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgwave/coefficient.hpp"
#include "sgwave/fields.hpp"
#include "sgwave/ldg.hpp"

namespace sgwave {

/// Evaluator of the gPC mode coefficients of a scalar function of
/// (x, z, y) at a physical point; the owning cell fixes one-sided limits.
using ModeCoeffFn = std::function<void(double x, double z, int cell, std::span<double> out)>;

/// Mode coefficients of f(x,z,y) (region-resolved) by the basis quadrature.
inline ModeCoeffFn mode_coeffs(std::function<double(double, double, const double*, int)> f,
                               const GalerkinCoeffField& coeff) {
    return [f = std::move(f), &coeff](double x, double z, int cell, std::span<double> out) {
        const int region = coeff.cell_region(cell);
        coeff.gpc().project([&](const double* y) { return f(x, z, y, region); }, out);
    };
}

namespace detail {

/// Shared machinery for the per-cell projection solves. Conditions are
/// assembled as rows of a square system; identical cells (same region
/// when the coefficient is x-independent) share one factorization.
class CellProjector {
public:
    CellProjector(const GalerkinCoeffField& coeff, int quad_pts)
        : coeff_(coeff), nq_(quad_pts < 0 ? coeff.basis().degree() + 4 : quad_pts),
          line_(gauss_legendre(nq_)) {
        const auto& basis = coeff.basis();
        const auto& mesh = coeff.mesh();
        const int k1 = basis.degree() + 1;
        const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
        val_.resize(basis.dofs(), nq_ * nq_);
        for (int b = 0; b < nq_; ++b)
            for (int a = 0; a < nq_; ++a)
                for (int pz = 0; pz < k1; ++pz)
                    for (int px = 0; px < k1; ++px)
                        val_(basis.dof(px, pz), b * nq_ + a) = LocalBasis::eval1(px, line_.nodes[a]) *
                                                               LocalBasis::eval1(pz, line_.nodes[b]) *
                                                               scale;
    }

    int nq() const { return nq_; }
    const Quad1D& line() const { return line_; }
    /// Physical basis values at the tensor quadrature points (dofs x nq^2).
    const Eigen::MatrixXd& values() const { return val_; }

    double point_x(int cell, int a) const {
        const auto& mesh = coeff_.mesh();
        return mesh.x_line(mesh.cell_ix(cell)) + 0.5 * (line_.nodes[a] + 1.0) * mesh.hx();
    }
    double point_z(int cell, int b) const {
        const auto& mesh = coeff_.mesh();
        return mesh.z_line(mesh.cell_iz(cell)) + 0.5 * (line_.nodes[b] + 1.0) * mesh.hz();
    }

    /// u-mode values at all quadrature points of a cell (modes x nq^2).
    void sample(const ModeCoeffFn& u, int cell, Eigen::MatrixXd& out) const {
        std::vector<double> m(coeff_.gpc().size());
        for (int b = 0; b < nq_; ++b)
            for (int a = 0; a < nq_; ++a) {
                u(point_x(cell, a), point_z(cell, b), cell, std::span<double>(m));
                for (int i = 0; i < static_cast<int>(m.size()); ++i) out(i, b * nq_ + a) = m[i];
            }
    }

protected:
    const GalerkinCoeffField& coeff_;
    int nq_;
    Quad1D line_;
    Eigen::MatrixXd val_;
};

}  // namespace detail

/// The plain A-weighted projection: per cell, (P u - u, A v) = 0 for all
/// v in the local space. Reduces to the component-wise L2 projection when
/// A is constant on the cell.
inline DgScalarField project_plain(const ModeCoeffFn& u, const GalerkinCoeffField& coeff,
                                   int quad_pts = -1) {
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    const int m_count = coeff.gpc().size();
    const int nloc = basis.dofs();
    const int n_unk = m_count * nloc;
    detail::CellProjector proj(coeff, quad_pts);
    const int nq = proj.nq();
    const double jac = 0.25 * mesh.hx() * mesh.hz();

    DgScalarField out(mesh.cell_count(), m_count, nloc);
    std::map<int, Eigen::LLT<Eigen::MatrixXd>> factors;  // keyed by region (or cell)
    Eigen::MatrixXd U(m_count, nq * nq);
    Eigen::VectorXd rhs(n_unk);

    for (int c = 0; c < mesh.cell_count(); ++c) {
        const int key = coeff.per_region() ? coeff.cell_region(c) : c;
        auto it = factors.find(key);
        if (it == factors.end()) {
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n_unk, n_unk);
            for (int b = 0; b < nq; ++b)
                for (int a = 0; a < nq; ++a) {
                    const double w = proj.line().weights[a] * proj.line().weights[b] * jac;
                    const Eigen::MatrixXd A =
                        coeff.A_in_cell(c, proj.point_x(c, a), proj.point_z(c, b));
                    const auto phi = proj.values().col(b * nq + a);
                    for (int mp = 0; mp < m_count; ++mp)
                        for (int m = 0; m < m_count; ++m)
                            G.block(mp * nloc, m * nloc, nloc, nloc).noalias() +=
                                (w * A(mp, m)) * phi * phi.transpose();
                }
            it = factors.emplace(key, Eigen::LLT<Eigen::MatrixXd>(G)).first;
            if (it->second.info() != Eigen::Success)
                throw std::runtime_error("project_plain: local Gram matrix not SPD");
        }

        proj.sample(u, c, U);
        rhs.setZero();
        for (int b = 0; b < nq; ++b)
            for (int a = 0; a < nq; ++a) {
                const int q = b * nq + a;
                const double w = proj.line().weights[a] * proj.line().weights[b] * jac;
                const Eigen::MatrixXd A = coeff.A_in_cell(c, proj.point_x(c, a), proj.point_z(c, b));
                Eigen::VectorXd Au = A * U.col(q);
                const auto phi = proj.values().col(q);
                for (int mp = 0; mp < m_count; ++mp)
                    rhs.segment(mp * nloc, nloc).noalias() += (w * Au(mp)) * phi;
            }
        Eigen::VectorXd cvec = it->second.solve(rhs);
        auto block = out.cell_block(c);
        for (int i = 0; i < n_unk; ++i) block[i] = cvec[i];
    }
    return out;
}

/// The initial-data projection P_h^+ (composition of the one-dimensional
/// trace-matching projections): per cell, A-weighted moment matching
/// against the degree-(k-1) tensor space, A-weighted trace moments on the
/// two edges whose trace feeds the v-flux of the chosen convention, and
/// the shared corner value.
inline DgScalarField project_plus(const ModeCoeffFn& u, const GalerkinCoeffField& coeff,
                                  FluxConvention conv = {}, int quad_pts = -1) {
    const auto& mesh = coeff.mesh();
    const auto& basis = coeff.basis();
    const int k = basis.degree();
    const int k1 = k + 1;
    const int m_count = coeff.gpc().size();
    const int nloc = basis.dofs();
    const int n_unk = m_count * nloc;
    detail::CellProjector proj(coeff, quad_pts);
    const int nq = proj.nq();
    const double jac = 0.25 * mesh.hx() * mesh.hz();

    // edges carrying the v trace: the plus trace sits on the low side
    const bool x_low = (conv.x == FluxSide::minus_plus);
    const bool z_low = (conv.z == FluxSide::minus_plus);
    const double xi_e = x_low ? -1.0 : 1.0;
    const double eta_e = z_low ? -1.0 : 1.0;

    const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
    // basis traces on the chosen vertical edge: (dofs x nq 1D points)
    Eigen::MatrixXd tx(nloc, nq), tz(nloc, nq);
    Eigen::VectorXd corner(nloc);
    for (int pz = 0; pz < k1; ++pz)
        for (int px = 0; px < k1; ++px) {
            const int j = basis.dof(px, pz);
            for (int q = 0; q < nq; ++q) {
                tx(j, q) =
                    LocalBasis::eval1(px, xi_e) * LocalBasis::eval1(pz, proj.line().nodes[q]) * scale;
                tz(j, q) =
                    LocalBasis::eval1(px, proj.line().nodes[q]) * LocalBasis::eval1(pz, eta_e) * scale;
            }
            corner(j) = LocalBasis::eval1(px, xi_e) * LocalBasis::eval1(pz, eta_e) * scale;
        }

    DgScalarField out(mesh.cell_count(), m_count, nloc);
    std::map<int, Eigen::PartialPivLU<Eigen::MatrixXd>> factors;
    Eigen::MatrixXd U(m_count, nq * nq);
    Eigen::VectorXd rhs(n_unk);
    std::vector<double> modes(m_count);

    auto edge_x_coord = [&](int c) { return mesh.x_line(mesh.cell_ix(c) + (x_low ? 0 : 1)); };
    auto edge_z_coord = [&](int c) { return mesh.z_line(mesh.cell_iz(c) + (z_low ? 0 : 1)); };

    for (int c = 0; c < mesh.cell_count(); ++c) {
        const int key = coeff.per_region() ? coeff.cell_region(c) : c;
        auto it = factors.find(key);
        if (it == factors.end()) {
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n_unk, n_unk);
            int row0 = 0;
            // volume rows: tests with per-direction degree <= k-1
            for (int b = 0; b < nq; ++b)
                for (int a = 0; a < nq; ++a) {
                    const double w = proj.line().weights[a] * proj.line().weights[b] * jac;
                    const Eigen::MatrixXd A =
                        coeff.A_in_cell(c, proj.point_x(c, a), proj.point_z(c, b));
                    const auto phi = proj.values().col(b * nq + a);
                    for (int mp = 0; mp < m_count; ++mp) {
                        int r = mp * (k * k);
                        for (int qz = 0; qz < k; ++qz)
                            for (int qx = 0; qx < k; ++qx, ++r) {
                                const double tv = phi(basis.dof(qx, qz));
                                for (int m = 0; m < m_count; ++m)
                                    G.row(r).segment(m * nloc, nloc).noalias() +=
                                        (w * A(mp, m) * tv) * phi.transpose();
                            }
                    }
                }
            row0 = m_count * k * k;
            // vertical-edge rows: z-moments of the trace, A from inside
            for (int q = 0; q < nq; ++q) {
                const double w = proj.line().weights[q] * 0.5 * mesh.hz();
                const Eigen::MatrixXd A = coeff.A_in_cell(c, edge_x_coord(c), proj.point_z(c, q));
                for (int mp = 0; mp < m_count; ++mp)
                    for (int qz = 0; qz < k; ++qz) {
                        const int r = row0 + mp * k + qz;
                        const double tv = LocalBasis::eval1(qz, proj.line().nodes[q]);
                        for (int m = 0; m < m_count; ++m)
                            G.row(r).segment(m * nloc, nloc).noalias() +=
                                (w * A(mp, m) * tv) * tx.col(q).transpose();
                    }
            }
            row0 += m_count * k;
            // horizontal-edge rows
            for (int q = 0; q < nq; ++q) {
                const double w = proj.line().weights[q] * 0.5 * mesh.hx();
                const Eigen::MatrixXd A = coeff.A_in_cell(c, proj.point_x(c, q), edge_z_coord(c));
                for (int mp = 0; mp < m_count; ++mp)
                    for (int qx = 0; qx < k; ++qx) {
                        const int r = row0 + mp * k + qx;
                        const double tv = LocalBasis::eval1(qx, proj.line().nodes[q]);
                        for (int m = 0; m < m_count; ++m)
                            G.row(r).segment(m * nloc, nloc).noalias() +=
                                (w * A(mp, m) * tv) * tz.col(q).transpose();
                    }
            }
            row0 += m_count * k;
            // corner rows, one per mode
            for (int mp = 0; mp < m_count; ++mp)
                G.row(row0 + mp).segment(mp * nloc, nloc) = corner.transpose();

            it = factors.emplace(key, Eigen::PartialPivLU<Eigen::MatrixXd>(G)).first;
        }

        proj.sample(u, c, U);
        rhs.setZero();
        int row0 = 0;
        for (int b = 0; b < nq; ++b)
            for (int a = 0; a < nq; ++a) {
                const int q = b * nq + a;
                const double w = proj.line().weights[a] * proj.line().weights[b] * jac;
                const Eigen::MatrixXd A = coeff.A_in_cell(c, proj.point_x(c, a), proj.point_z(c, b));
                Eigen::VectorXd Au = A * U.col(q);
                const auto phi = proj.values().col(q);
                for (int mp = 0; mp < m_count; ++mp) {
                    int r = mp * (k * k);
                    for (int qz = 0; qz < k; ++qz)
                        for (int qx = 0; qx < k; ++qx, ++r)
                            rhs(r) += w * Au(mp) * phi(basis.dof(qx, qz));
                }
            }
        row0 = m_count * k * k;
        for (int q = 0; q < nq; ++q) {
            const double w = proj.line().weights[q] * 0.5 * mesh.hz();
            const double x = edge_x_coord(c), z = proj.point_z(c, q);
            const Eigen::MatrixXd A = coeff.A_in_cell(c, x, z);
            u(x, z, c, std::span<double>(modes));
            Eigen::VectorXd Au = A * Eigen::Map<const Eigen::VectorXd>(modes.data(), m_count);
            for (int mp = 0; mp < m_count; ++mp)
                for (int qz = 0; qz < k; ++qz)
                    rhs(row0 + mp * k + qz) +=
                        w * Au(mp) * LocalBasis::eval1(qz, proj.line().nodes[q]);
        }
        row0 += m_count * k;
        for (int q = 0; q < nq; ++q) {
            const double w = proj.line().weights[q] * 0.5 * mesh.hx();
            const double x = proj.point_x(c, q), z = edge_z_coord(c);
            const Eigen::MatrixXd A = coeff.A_in_cell(c, x, z);
            u(x, z, c, std::span<double>(modes));
            Eigen::VectorXd Au = A * Eigen::Map<const Eigen::VectorXd>(modes.data(), m_count);
            for (int mp = 0; mp < m_count; ++mp)
                for (int qx = 0; qx < k; ++qx)
                    rhs(row0 + mp * k + qx) +=
                        w * Au(mp) * LocalBasis::eval1(qx, proj.line().nodes[q]);
        }
        row0 += m_count * k;
        u(edge_x_coord(c), edge_z_coord(c), c, std::span<double>(modes));
        for (int mp = 0; mp < m_count; ++mp) rhs(row0 + mp) = modes[mp];

        Eigen::VectorXd cvec = it->second.solve(rhs);
        if (!cvec.allFinite())
            throw std::runtime_error("project_plus: singular local projection system");
        auto block = out.cell_block(c);
        for (int i = 0; i < n_unk; ++i) block[i] = cvec[i];
    }
    return out;
}

}  // namespace sgwave
