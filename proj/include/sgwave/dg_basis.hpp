#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "sgwave/legendre.hpp"
#include "sgwave/mesh.hpp"
#include "sgwave/quadrature.hpp"

namespace sgwave {

enum class CellEdge { left, right, bottom, top };

/// Tensor-product modal basis of degree k on the reference cell [-1,1]^2:
/// b_{p,q}(xi,eta) = Lhat_p(xi) Lhat_q(eta) with Lhat_p unit-norm in
/// L2(-1,1). On a physical cell the basis is scaled by 2/sqrt(hx*hz) so
/// the cell mass matrix is exactly the identity; that scale lives with
/// the mesh-dependent users, everything here is reference-cell data.
///
/// Local dof j = q*(k+1) + p (x-degree p fastest). Volume quadrature is
/// the tensor square of line_rule(); its flat point index follows
/// TensorQuad ordering (xi fastest).
class LocalBasis {
public:
    LocalBasis() = default;

    LocalBasis(int degree, int volume_pts = -1, int edge_pts = -1) : k_(degree) {
        if (degree < 0) throw std::invalid_argument("LocalBasis: degree must be >= 0");
        nvol_ = volume_pts < 0 ? degree + 2 : volume_pts;
        nedge_ = edge_pts < 0 ? degree + 2 : edge_pts;
        if (nvol_ < 1 || nedge_ < 1) throw std::invalid_argument("LocalBasis: quadrature too small");
        line_ = gauss_legendre(nvol_);
        edge_ = gauss_legendre(nedge_);

        const int n1 = k_ + 1;
        val1_.assign(n1 * nvol_, 0.0);
        der1_.assign(n1 * nvol_, 0.0);
        edge1_.assign(n1 * nedge_, 0.0);
        end_.assign(n1 * 2, 0.0);
        for (int p = 0; p < n1; ++p) {
            const double s = legendre_l2_scale(p);
            for (int a = 0; a < nvol_; ++a) {
                auto [v, d] = legendre_pair(p, line_.nodes[a]);
                val1_[p * nvol_ + a] = s * v;
                der1_[p * nvol_ + a] = s * d;
            }
            for (int e = 0; e < nedge_; ++e)
                edge1_[p * nedge_ + e] = s * legendre(p, edge_.nodes[e]);
            end_[p * 2 + 0] = s * legendre(p, -1.0);
            end_[p * 2 + 1] = s * legendre(p, 1.0);
        }
    }

    int degree() const { return k_; }
    int dofs() const { return (k_ + 1) * (k_ + 1); }
    int volume_pts() const { return nvol_; }        // per direction
    int edge_pts() const { return nedge_; }
    const Quad1D& line_rule() const { return line_; }
    const Quad1D& edge_rule() const { return edge_; }

    int dof(int px, int pz) const { return pz * (k_ + 1) + px; }
    int dof_px(int j) const { return j % (k_ + 1); }
    int dof_pz(int j) const { return j / (k_ + 1); }

    /// Lhat_p and its xi-derivative at volume node a.
    double val1(int p, int a) const { return val1_[p * nvol_ + a]; }
    double der1(int p, int a) const { return der1_[p * nvol_ + a]; }
    /// Lhat_p at edge-rule node e.
    double edge1(int p, int e) const { return edge1_[p * nedge_ + e]; }
    /// Lhat_p at an endpoint (-1 for minus, +1 for plus).
    double end1(int p, Side s) const { return end_[p * 2 + (s == Side::plus ? 1 : 0)]; }

    /// Lhat_p at an arbitrary reference coordinate.
    static double eval1(int p, double xi) { return legendre_l2_scale(p) * legendre(p, xi); }
    static double deriv1(int p, double xi) {
        return legendre_l2_scale(p) * legendre_pair(p, xi).second;
    }

private:
    int k_ = 0, nvol_ = 0, nedge_ = 0;
    Quad1D line_, edge_;
    std::vector<double> val1_, der1_, edge1_, end_;
};

}  // namespace sgwave
