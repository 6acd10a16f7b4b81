#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "sgwave/legendre.hpp"
#include "sgwave/multi_index.hpp"
#include "sgwave/quadrature.hpp"

namespace sgwave {

/// Orthonormal gPC basis for independent uniform variables on [-1,1]:
/// Phi_m(y) = prod_i phi_{alpha_i}(y_i) with phi_p = sqrt(2p+1) P_p, so
/// that E[Phi_m Phi_m'] = delta. Carries the density-weighted tensor
/// Gauss rule used for every integral over the random domain.
///
/// Modes are 0-based; mode 0 is the constant (mean) mode.
class GpcBasis {
public:
    GpcBasis() = default;

    /// quad_pts < 0 selects the default order+5 points per dimension.
    GpcBasis(int dims, int order, int quad_pts = -1)
        : idx_(dims, order), quad_(gauss_rule(quad_pts < 0 ? order + 5 : quad_pts, dims)) {
        const int m_count = idx_.size();
        phi_.resize(quad_.size() * m_count);
        for (std::size_t q = 0; q < quad_.size(); ++q)
            for (int m = 0; m < m_count; ++m) phi_[q * m_count + m] = eval(m, quad_.node(q));
    }

    int dims() const { return idx_.dims(); }
    int order() const { return idx_.total_degree(); }
    int size() const { return idx_.size(); }
    const MultiIndexSet& indices() const { return idx_; }
    const TensorQuad& quadrature() const { return quad_; }

    double eval(int mode, const double* y) const {
        if (mode < 0 || mode >= size()) throw std::out_of_range("GpcBasis::eval: mode out of range");
        const int* alpha = idx_[mode];
        double v = 1.0;
        for (int d = 0; d < dims(); ++d)
            v *= legendre_density_scale(alpha[d]) * legendre(alpha[d], y[d]);
        return v;
    }

    double eval(int mode, std::span<const double> y) const { return eval(mode, y.data()); }

    /// Phi_m at quadrature node q (precomputed).
    double phi(std::size_t q, int m) const { return phi_[q * size() + m]; }
    const std::vector<double>& phi_table() const { return phi_; }

    /// Mode coefficients of f against the basis: out[m] = E[f Phi_m],
    /// by the stored quadrature. f is called with the node coordinates.
    template <class F>
    void project(F&& f, std::span<double> out) const {
        const int m_count = size();
        for (int m = 0; m < m_count; ++m) out[m] = 0.0;
        for (std::size_t q = 0; q < quad_.size(); ++q) {
            const double fw = f(quad_.node(q)) * quad_.weights[q];
            const double* row = phi_.data() + q * m_count;
            for (int m = 0; m < m_count; ++m) out[m] += fw * row[m];
        }
    }

private:
    MultiIndexSet idx_;
    TensorQuad quad_;
    std::vector<double> phi_;
};

}  // namespace sgwave
