#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgwave/coefficient.hpp"
#include "sgwave/dg_basis.hpp"
#include "sgwave/fields.hpp"
#include "sgwave/gpc.hpp"
#include "sgwave/mesh.hpp"
#include "sgwave/presets.hpp"

namespace sgwave {

/// Pairing of one-sided traces in the numerical fluxes, per direction.
/// minus_plus: flux of A*S takes the minus trace (A^- S^-), the v flux
/// takes the plus trace; plus_minus is the mirrored pair. The two sides
/// are always opposite within a direction.
enum class FluxSide { minus_plus, plus_minus };

struct FluxConvention {
    FluxSide x = FluxSide::minus_plus;
    FluxSide z = FluxSide::minus_plus;
};

/// Dirichlet data for the v-flux on boundary edges. On every boundary
/// edge the v trace is replaced by g and the A*S trace by the interior
/// one-sided value; with g = 0 this reproduces the homogeneous energy
/// cancellation edge by edge.
struct BoundaryData {
    bool homogeneous = true;
    std::function<double(double t, double x, double z, const double* y)> g;
};

inline BoundaryData homogeneous_bc() { return {}; }

inline BoundaryData exact_bc(const ExactSolutionPreset& preset) {
    BoundaryData bc;
    bc.homogeneous = false;
    bc.g = [preset](double t, double x, double z, const double* y) {
        return preset.boundary(t, x, z, y);
    };
    return bc;
}

/// The LDG spatial discretization on one mesh: the auxiliary solve
/// S = S(v) and the acceleration operator (the discrete right-hand side
/// of the second-order-in-time system), both explicit because the local
/// mass matrix is the identity.
class LdgOperator {
    using Mat = Eigen::MatrixXd;
    using RowMajorMap =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using RowMajorMutMap =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

public:
    LdgOperator() = default;

    LdgOperator(GalerkinCoeffField coeff, FluxConvention flux = {}, BoundaryData bc = {})
        : coeff_(std::move(coeff)), flux_(flux), bc_(std::move(bc)) {
        const auto& mesh = coeff_.mesh();
        const auto& basis = coeff_.basis();
        const int k1 = basis.degree() + 1;
        const int nloc = basis.dofs();
        const int nq = basis.volume_pts();
        const int nq2 = nq * nq;
        const int ne = basis.edge_pts();
        const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());
        const double jac = 0.25 * mesh.hx() * mesh.hz();

        bval_.resize(nloc, nq2);
        bdxw_.resize(nloc, nq2);
        bdzw_.resize(nloc, nq2);
        bvalw_.resize(nloc, nq2);
        const auto& lr = basis.line_rule();
        for (int b = 0; b < nq; ++b)
            for (int a = 0; a < nq; ++a) {
                const int q = b * nq + a;
                const double w = lr.weights[a] * lr.weights[b] * jac;
                for (int pz = 0; pz < k1; ++pz)
                    for (int px = 0; px < k1; ++px) {
                        const int j = basis.dof(px, pz);
                        const double v = basis.val1(px, a) * basis.val1(pz, b) * scale;
                        bval_(j, q) = v;
                        bvalw_(j, q) = v * w;
                        bdxw_(j, q) =
                            basis.der1(px, a) * basis.val1(pz, b) * scale * (2.0 / mesh.hx()) * w;
                        bdzw_(j, q) =
                            basis.val1(px, a) * basis.der1(pz, b) * scale * (2.0 / mesh.hz()) * w;
                    }
            }

        for (auto e : {CellEdge::left, CellEdge::right, CellEdge::bottom, CellEdge::top}) {
            Mat t(nloc, ne), tw(nloc, ne);
            const bool vertical = (e == CellEdge::left || e == CellEdge::right);
            const double ejac = 0.5 * (vertical ? mesh.hz() : mesh.hx());
            for (int q = 0; q < ne; ++q)
                for (int pz = 0; pz < k1; ++pz)
                    for (int px = 0; px < k1; ++px) {
                        const int j = basis.dof(px, pz);
                        double v;
                        switch (e) {
                            case CellEdge::left:
                                v = basis.end1(px, Side::minus) * basis.edge1(pz, q);
                                break;
                            case CellEdge::right:
                                v = basis.end1(px, Side::plus) * basis.edge1(pz, q);
                                break;
                            case CellEdge::bottom:
                                v = basis.edge1(px, q) * basis.end1(pz, Side::minus);
                                break;
                            default:
                                v = basis.edge1(px, q) * basis.end1(pz, Side::plus);
                        }
                        t(j, q) = v * scale;
                        tw(j, q) = v * scale * basis.edge_rule().weights[q] * ejac;
                    }
            trace_[static_cast<int>(e)] = std::move(t);
            trace_w_[static_cast<int>(e)] = std::move(tw);
        }
    }

    const GalerkinCoeffField& coeff() const { return coeff_; }
    const Mesh2D& mesh() const { return coeff_.mesh(); }
    const LocalBasis& basis() const { return coeff_.basis(); }
    const GpcBasis& gpc() const { return coeff_.gpc(); }
    const FluxConvention& flux() const { return flux_; }
    const BoundaryData& boundary() const { return bc_; }

    /// Auxiliary solve of the first-order system: S = A grad v in the
    /// weak LDG sense with the alternating v-flux, at time t (t enters
    /// only through the Dirichlet data).
    DgVectorField compute_S(const DgScalarField& v, double t) const {
        check_shape(v);
        const auto& mesh = coeff_.mesh();
        const auto& basis = coeff_.basis();
        const int m_count = coeff_.gpc().size();
        const int nloc = basis.dofs();
        const int nq2 = basis.volume_pts() * basis.volume_pts();
        const int ne = basis.edge_pts();

        DgVectorField out;
        out.x = DgScalarField(mesh.cell_count(), m_count, nloc);
        out.z = DgScalarField(mesh.cell_count(), m_count, nloc);

        Mat U(m_count, nq2), W(m_count, nq2), vhat(m_count, ne), G(m_count, ne);
        Mat S1(m_count, nloc), S2(m_count, nloc);

        for (int c = 0; c < mesh.cell_count(); ++c) {
            RowMajorMap C(v.cell_block(c).data(), m_count, nloc);
            U.noalias() = C * bval_;
            apply_volume_A(c, U, W);
            S1.noalias() = -W * bdxw_.transpose();
            S2.noalias() = -W * bdzw_.transpose();
            if (!coeff_.grad_zero()) {
                apply_volume_grad(c, U, W, Axis::x);
                S1.noalias() -= W * bvalw_.transpose();
                apply_volume_grad(c, U, W, Axis::z);
                S2.noalias() -= W * bvalw_.transpose();
            }

            // x-direction edge terms: + right, - left
            v_flux(v, c, CellEdge::right, t, vhat);
            apply_edge_A(c, CellEdge::right, vhat, G);
            S1.noalias() += G * trace_w(CellEdge::right).transpose();
            v_flux(v, c, CellEdge::left, t, vhat);
            apply_edge_A(c, CellEdge::left, vhat, G);
            S1.noalias() -= G * trace_w(CellEdge::left).transpose();

            // z-direction edge terms: + top, - bottom
            v_flux(v, c, CellEdge::top, t, vhat);
            apply_edge_A(c, CellEdge::top, vhat, G);
            S2.noalias() += G * trace_w(CellEdge::top).transpose();
            v_flux(v, c, CellEdge::bottom, t, vhat);
            apply_edge_A(c, CellEdge::bottom, vhat, G);
            S2.noalias() -= G * trace_w(CellEdge::bottom).transpose();

            RowMajorMutMap(out.x.cell_block(c).data(), m_count, nloc) = S1;
            RowMajorMutMap(out.z.cell_block(c).data(), m_count, nloc) = S2;
        }
        return out;
    }

    /// Discrete second time derivative of v given S: the weak divergence
    /// of A*S with the alternating A*S-flux.
    DgScalarField compute_acceleration(const DgVectorField& S, double t) const {
        (void)t;  // the A*S flux never needs boundary data
        check_shape(S.x);
        check_shape(S.z);
        const auto& mesh = coeff_.mesh();
        const auto& basis = coeff_.basis();
        const int m_count = coeff_.gpc().size();
        const int nloc = basis.dofs();
        const int nq2 = basis.volume_pts() * basis.volume_pts();
        const int ne = basis.edge_pts();

        DgScalarField out(mesh.cell_count(), m_count, nloc);
        Mat U(m_count, nq2), W(m_count, nq2), F(m_count, ne), R(m_count, nloc);

        for (int c = 0; c < mesh.cell_count(); ++c) {
            RowMajorMap C1(S.x.cell_block(c).data(), m_count, nloc);
            U.noalias() = C1 * bval_;
            apply_volume_A(c, U, W);
            R.noalias() = -W * bdxw_.transpose();
            RowMajorMap C2(S.z.cell_block(c).data(), m_count, nloc);
            U.noalias() = C2 * bval_;
            apply_volume_A(c, U, W);
            R.noalias() -= W * bdzw_.transpose();

            s_flux(S.x, c, CellEdge::right, F);
            R.noalias() += F * trace_w(CellEdge::right).transpose();
            s_flux(S.x, c, CellEdge::left, F);
            R.noalias() -= F * trace_w(CellEdge::left).transpose();
            s_flux(S.z, c, CellEdge::top, F);
            R.noalias() += F * trace_w(CellEdge::top).transpose();
            s_flux(S.z, c, CellEdge::bottom, F);
            R.noalias() -= F * trace_w(CellEdge::bottom).transpose();

            RowMajorMutMap(out.cell_block(c).data(), m_count, nloc) = R;
        }
        return out;
    }

private:
    const Mat& trace_t(CellEdge e) const { return trace_[static_cast<int>(e)]; }
    const Mat& trace_w(CellEdge e) const { return trace_w_[static_cast<int>(e)]; }

    void check_shape(const DgScalarField& f) const {
        if (f.cells() != coeff_.mesh().cell_count() || f.modes() != coeff_.gpc().size() ||
            f.dofs() != coeff_.basis().dofs())
            throw std::invalid_argument("LdgOperator: field shape does not match the mesh/basis");
        for (double v : f.data())
            if (!std::isfinite(v))
                throw std::invalid_argument("LdgOperator: non-finite input coefficients");
    }

    void apply_volume_A(int c, const Mat& U, Mat& W) const {
        if (coeff_.per_region()) {
            W.noalias() = coeff_.volume_A(c, 0) * U;
            return;
        }
        for (int q = 0; q < U.cols(); ++q) W.col(q).noalias() = coeff_.volume_A(c, q) * U.col(q);
    }

    void apply_volume_grad(int c, const Mat& U, Mat& W, Axis ax) const {
        for (int q = 0; q < U.cols(); ++q) {
            const auto& A = (ax == Axis::x) ? coeff_.volume_Ax(c, q) : coeff_.volume_Az(c, q);
            W.col(q).noalias() = A * U.col(q);
        }
    }

    void apply_edge_A(int c, CellEdge e, const Mat& V, Mat& G) const {
        if (coeff_.per_region()) {
            G.noalias() = coeff_.edge_A(c, e, 0) * V;
            return;
        }
        for (int q = 0; q < V.cols(); ++q) G.col(q).noalias() = coeff_.edge_A(c, e, q) * V.col(q);
    }

    static CellEdge opposite(CellEdge e) {
        switch (e) {
            case CellEdge::left: return CellEdge::right;
            case CellEdge::right: return CellEdge::left;
            case CellEdge::bottom: return CellEdge::top;
            default: return CellEdge::bottom;
        }
    }

    /// Neighbor cell across edge e of cell c, or -1 at the boundary.
    int neighbor(int c, CellEdge e) const {
        const auto& mesh = coeff_.mesh();
        const int ix = mesh.cell_ix(c), iz = mesh.cell_iz(c);
        switch (e) {
            case CellEdge::left: return ix > 0 ? mesh.cell_index(ix - 1, iz) : -1;
            case CellEdge::right: return ix + 1 < mesh.nx() ? mesh.cell_index(ix + 1, iz) : -1;
            case CellEdge::bottom: return iz > 0 ? mesh.cell_index(ix, iz - 1) : -1;
            default: return iz + 1 < mesh.nz() ? mesh.cell_index(ix, iz + 1) : -1;
        }
    }

    /// True if the flux on edge e of a cell is taken from that cell's own
    /// side: the minus trace lives on the lower-coordinate cell.
    static bool own_side(CellEdge e, FluxSide conv, bool v_trace) {
        // For the v flux the trace side is opposite to the A*S side.
        const bool take_minus = (conv == FluxSide::minus_plus) != v_trace;
        const bool cell_is_minus = (e == CellEdge::right || e == CellEdge::top);
        return take_minus == cell_is_minus;
    }

    /// Per-mode values of the v-flux at the edge quadrature points of
    /// edge e of cell c (M x ne). Boundary edges carry the Dirichlet data.
    void v_flux(const DgScalarField& v, int c, CellEdge e, double t, Mat& out) const {
        const int n = neighbor(c, e);
        if (n < 0) {
            boundary_modes(c, e, t, out);
            return;
        }
        const FluxSide conv =
            (e == CellEdge::left || e == CellEdge::right) ? flux_.x : flux_.z;
        if (own_side(e, conv, /*v_trace=*/true)) {
            RowMajorMap C(v.cell_block(c).data(), v.modes(), v.dofs());
            out.noalias() = C * trace_t(e);
        } else {
            RowMajorMap C(v.cell_block(n).data(), v.modes(), v.dofs());
            out.noalias() = C * trace_t(opposite(e));
        }
    }

    /// Per-mode values of the A*S flux component at the edge points of
    /// edge e of cell c (M x ne). Boundary edges use the interior trace.
    void s_flux(const DgScalarField& s, int c, CellEdge e, Mat& out) const {
        const FluxSide conv =
            (e == CellEdge::left || e == CellEdge::right) ? flux_.x : flux_.z;
        const int n = neighbor(c, e);
        const int m_count = s.modes();
        Mat tr(m_count, out.cols());
        if (n < 0 || own_side(e, conv, /*v_trace=*/false)) {
            RowMajorMap C(s.cell_block(c).data(), m_count, s.dofs());
            tr.noalias() = C * trace_t(e);
            apply_edge_A(c, e, tr, out);
        } else {
            RowMajorMap C(s.cell_block(n).data(), m_count, s.dofs());
            tr.noalias() = C * trace_t(opposite(e));
            // A evaluated from the same side as the S trace
            if (coeff_.per_region()) {
                out.noalias() = coeff_.edge_A(n, opposite(e), 0) * tr;
            } else {
                for (int q = 0; q < out.cols(); ++q)
                    out.col(q).noalias() = coeff_.edge_A(n, opposite(e), q) * tr.col(q);
            }
        }
    }

    /// gPC modes of the Dirichlet data at the edge quadrature points.
    void boundary_modes(int c, CellEdge e, double t, Mat& out) const {
        if (bc_.homogeneous || !bc_.g) {
            out.setZero();
            return;
        }
        const auto& mesh = coeff_.mesh();
        const auto& basis = coeff_.basis();
        const auto& gpc = coeff_.gpc();
        const int ix = mesh.cell_ix(c), iz = mesh.cell_iz(c);
        const int ne = basis.edge_pts();
        std::vector<double> modes(gpc.size());
        for (int q = 0; q < ne; ++q) {
            const double s = basis.edge_rule().nodes[q];
            double x, z;
            switch (e) {
                case CellEdge::left: x = mesh.x_line(ix), z = mesh.z_line(iz) + 0.5 * (s + 1.0) * mesh.hz(); break;
                case CellEdge::right: x = mesh.x_line(ix + 1), z = mesh.z_line(iz) + 0.5 * (s + 1.0) * mesh.hz(); break;
                case CellEdge::bottom: x = mesh.x_line(ix) + 0.5 * (s + 1.0) * mesh.hx(), z = mesh.z_line(iz); break;
                default: x = mesh.x_line(ix) + 0.5 * (s + 1.0) * mesh.hx(), z = mesh.z_line(iz + 1);
            }
            gpc.project([&](const double* y) { return bc_.g(t, x, z, y); },
                        std::span<double>(modes));
            for (int m = 0; m < gpc.size(); ++m) out(m, q) = modes[m];
        }
    }

    GalerkinCoeffField coeff_;
    FluxConvention flux_;
    BoundaryData bc_;
    Mat bval_, bvalw_, bdxw_, bdzw_;
    Mat trace_[4], trace_w_[4];
};

}  // namespace sgwave
