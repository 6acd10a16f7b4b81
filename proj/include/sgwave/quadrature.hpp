#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sgwave/legendre.hpp"

namespace sgwave {

/// 1D quadrature rule on [-1,1].
struct Quad1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule on [-1,1] (weights sum to 2), computed by
/// Newton iteration on P_n. Exact for polynomials of degree <= 2n-1.
inline Quad1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: node count must be >= 1");
    Quad1D q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi-style initial guess for the i-th root of P_n
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = legendre_pair(n, x);
            dp = d;
            double dx = p / d;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                dp = legendre_pair(n, x).second;
                break;
            }
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[i] = -x;  // roots found from the negative end inward
        q.nodes[n - 1 - i] = x;
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) q.nodes[n / 2] = 0.0;
    return q;
}

/// Tensor-product quadrature over [-1,1]^dims, stored flat. Point q has
/// coordinates node(q)[0..dims-1], with the first dimension fastest.
struct TensorQuad {
    int dims = 0;
    int pts_per_dim = 0;
    std::vector<double> nodes;    // size() * dims
    std::vector<double> weights;  // size()
    std::size_t size() const { return weights.size(); }
    const double* node(std::size_t q) const { return nodes.data() + q * dims; }
};

namespace detail {
inline TensorQuad tensorize(const Quad1D& line, int dims, double per_dim_weight_scale) {
    TensorQuad t;
    t.dims = dims;
    t.pts_per_dim = line.size();
    std::size_t total = 1;
    for (int d = 0; d < dims; ++d) total *= line.size();
    t.nodes.resize(total * dims);
    t.weights.assign(total, 1.0);
    for (std::size_t q = 0; q < total; ++q) {
        std::size_t rem = q;
        for (int d = 0; d < dims; ++d) {
            int i = static_cast<int>(rem % line.size());
            rem /= line.size();
            t.nodes[q * dims + d] = line.nodes[i];
            t.weights[q] *= line.weights[i] * per_dim_weight_scale;
        }
    }
    return t;
}
}  // namespace detail

/// Density-weighted tensor Gauss-Legendre rule for the uniform density
/// 1/2 per dimension on [-1,1]^dims; weights sum to 1.
inline TensorQuad gauss_rule(int pts_per_dim, int dims) {
    if (pts_per_dim < 1) throw std::invalid_argument("gauss_rule: node count must be >= 1");
    if (dims < 1) throw std::invalid_argument("gauss_rule: dims must be >= 1");
    return detail::tensorize(gauss_legendre(pts_per_dim), dims, 0.5);
}

/// Plain (Lebesgue) tensor Gauss-Legendre rule on [-1,1]^dims.
inline TensorQuad tensor_gauss(int pts_per_dim, int dims) {
    if (pts_per_dim < 1) throw std::invalid_argument("tensor_gauss: node count must be >= 1");
    if (dims < 1) throw std::invalid_argument("tensor_gauss: dims must be >= 1");
    return detail::tensorize(gauss_legendre(pts_per_dim), dims, 1.0);
}

}  // namespace sgwave
