#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgwave/coefficient.hpp"
#include "sgwave/fields.hpp"
#include "sgwave/leapfrog.hpp"
#include "sgwave/presets.hpp"

namespace sgwave {

struct ErrorNorms {
    double u = 0.0, qx = 0.0, qy = 0.0;
};

/// Expectation-L2 errors against a preset's exact solution, normalized by
/// the domain measure:  e = ( int_D E[(f_h - f)^2] dx / |D| )^{1/2}.
///
/// E[(f_h - f)^2] is evaluated through the orthogonal split
///   E[(f_h - P_M f)^2] + E[(f - P_M f)^2]
/// with P_M the gPC truncation under the basis quadrature: the first part
/// is a mode-coefficient difference, the second a fixed nonnegative tail,
/// so a representable solution measures exactly zero instead of drowning
/// in the cancellation of E[f_h^2] - 2E[f_h f] + E[f^2]. Exact-solution
/// moments and tails are precomputed once per mesh; a snapshot costs one
/// small GEMM per cell.
class ErrorEvaluator {
    using RowMajorMap =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

public:
    ErrorEvaluator(const ExactSolutionPreset& preset, const GalerkinCoeffField& coeff,
                   int quad_pts = -1)
        : coeff_(coeff), preset_(preset),
          nq_(quad_pts < 0 ? coeff.basis().degree() + 4 : quad_pts), line_(gauss_legendre(nq_)) {
        const auto& mesh = coeff.mesh();
        const auto& basis = coeff.basis();
        const auto& gpc = coeff.gpc();
        const int m_count = gpc.size();
        const int k1 = basis.degree() + 1;
        const int nq2 = nq_ * nq_;
        const double scale = 2.0 / std::sqrt(mesh.hx() * mesh.hz());

        bval_.resize(basis.dofs(), nq2);
        for (int b = 0; b < nq_; ++b)
            for (int a = 0; a < nq_; ++a)
                for (int pz = 0; pz < k1; ++pz)
                    for (int px = 0; px < k1; ++px)
                        bval_(basis.dof(px, pz), b * nq_ + a) =
                            LocalBasis::eval1(px, line_.nodes[a]) *
                            LocalBasis::eval1(pz, line_.nodes[b]) * scale;

        const int cells = mesh.cell_count();
        weights_.resize(nq2);
        const double jac = 0.25 * mesh.hx() * mesh.hz();
        for (int b = 0; b < nq_; ++b)
            for (int a = 0; a < nq_; ++a)
                weights_[b * nq_ + a] = line_.weights[a] * line_.weights[b] * jac;

        u_modes_.resize(cells, Eigen::MatrixXd(m_count, nq2));
        qx_modes_.resize(cells, Eigen::MatrixXd(m_count, nq2));
        qy_modes_.resize(cells, Eigen::MatrixXd(m_count, nq2));
        u_tail2_.resize(cells, Eigen::VectorXd(nq2));
        qx_tail2_.resize(cells, Eigen::VectorXd(nq2));
        qy_tail2_.resize(cells, Eigen::VectorXd(nq2));

        const auto& yq = gpc.quadrature();
        std::vector<double> u_acc(m_count), qx_acc(m_count), qy_acc(m_count);
        for (int c = 0; c < cells; ++c) {
            const int region = coeff.cell_region(c);
            const int ix = mesh.cell_ix(c), iz = mesh.cell_iz(c);
            for (int b = 0; b < nq_; ++b) {
                const double z = mesh.z_line(iz) + 0.5 * (line_.nodes[b] + 1.0) * mesh.hz();
                for (int a = 0; a < nq_; ++a) {
                    const double x = mesh.x_line(ix) + 0.5 * (line_.nodes[a] + 1.0) * mesh.hx();
                    const int q = b * nq_ + a;
                    std::fill(u_acc.begin(), u_acc.end(), 0.0);
                    std::fill(qx_acc.begin(), qx_acc.end(), 0.0);
                    std::fill(qy_acc.begin(), qy_acc.end(), 0.0);
                    for (std::size_t yi = 0; yi < yq.size(); ++yi) {
                        const double w = yq.weights[yi];
                        const double* y = yq.node(yi);
                        const double uv = preset.u0(x, z, y, region);
                        const auto qv = preset.q0(x, z, y, region);
                        for (int m = 0; m < m_count; ++m) {
                            const double phi = gpc.phi(yi, m);
                            u_acc[m] += w * uv * phi;
                            qx_acc[m] += w * qv[0] * phi;
                            qy_acc[m] += w * qv[1] * phi;
                        }
                    }
                    for (int m = 0; m < m_count; ++m) {
                        u_modes_[c](m, q) = u_acc[m];
                        qx_modes_[c](m, q) = qx_acc[m];
                        qy_modes_[c](m, q) = qy_acc[m];
                    }
                    // second pass: pointwise truncation-tail energy
                    double u2 = 0, qx2 = 0, qy2 = 0;
                    for (std::size_t yi = 0; yi < yq.size(); ++yi) {
                        const double w = yq.weights[yi];
                        const double* y = yq.node(yi);
                        double pu = 0, px = 0, py = 0;
                        for (int m = 0; m < m_count; ++m) {
                            const double phi = gpc.phi(yi, m);
                            pu += u_acc[m] * phi;
                            px += qx_acc[m] * phi;
                            py += qy_acc[m] * phi;
                        }
                        const double du = preset.u0(x, z, y, region) - pu;
                        const auto qv = preset.q0(x, z, y, region);
                        u2 += w * du * du;
                        qx2 += w * (qv[0] - px) * (qv[0] - px);
                        qy2 += w * (qv[1] - py) * (qv[1] - py);
                    }
                    u_tail2_[c](q) = u2;
                    qx_tail2_[c](q) = qx2;
                    qy_tail2_[c](q) = qy2;
                }
            }
        }
    }

    ErrorNorms norms(const DgScalarField& v, const DgVectorField& S, double t) const {
        const double ft = preset_.tau(t);
        ErrorNorms out;
        out.u = component(v, ft, u_modes_, u_tail2_);
        out.qx = component(S.x, ft, qx_modes_, qx_tail2_);
        out.qy = component(S.z, ft, qy_modes_, qy_tail2_);
        return out;
    }

private:
    double component(const DgScalarField& f, double ft,
                     const std::vector<Eigen::MatrixXd>& modes,
                     const std::vector<Eigen::VectorXd>& tail2) const {
        const int m_count = f.modes();
        const int nloc = f.dofs();
        const int nq2 = nq_ * nq_;
        Eigen::MatrixXd V(m_count, nq2);
        double acc = 0.0;
        for (int c = 0; c < f.cells(); ++c) {
            RowMajorMap C(f.cell_block(c).data(), m_count, nloc);
            V.noalias() = C * bval_;
            const auto& G = modes[c];
            for (int q = 0; q < nq2; ++q) {
                double e2 = ft * ft * tail2[c](q);
                for (int m = 0; m < m_count; ++m) {
                    const double d = V(m, q) - ft * G(m, q);
                    e2 += d * d;
                }
                acc += weights_[q] * e2;
            }
        }
        return std::sqrt(acc / coeff_.mesh().domain().area());
    }

    const GalerkinCoeffField& coeff_;
    const ExactSolutionPreset& preset_;
    int nq_;
    Quad1D line_;
    Eigen::MatrixXd bval_;
    std::vector<double> weights_;
    std::vector<Eigen::MatrixXd> u_modes_, qx_modes_, qy_modes_;
    std::vector<Eigen::VectorXd> u_tail2_, qx_tail2_, qy_tail2_;
};

/// Observed order between errors at h and h/2.
inline double convergence_order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0))
        throw std::invalid_argument("convergence_order: errors must be positive");
    return std::log2(e_coarse / e_fine);
}

/// Energy history with the conservation summaries used by the tests.
struct EnergyTrace {
    std::vector<EnergyRecord> records;

    double max_rel_drift() const {
        if (records.empty()) return 0.0;
        const double e0 = records.front().fully;
        double d = 0.0;
        for (const auto& r : records) d = std::max(d, std::abs(r.fully - e0));
        return e0 != 0.0 ? d / std::abs(e0) : d;
    }
    double max_identity_gap() const {
        double g = 0.0;
        for (const auto& r : records) {
            const double s = std::max(std::abs(r.fully), std::abs(r.alt));
            if (s > 0.0) g = std::max(g, std::abs(r.fully - r.alt) / s);
        }
        return g;
    }
};

/// Least-squares slope of log(envelope of e) against log(1+t), skipping
/// the initial fraction of the series. The envelope is the running max,
/// so oscillatory error histories fit their growth, not their phase.
inline double envelope_exponent(std::span<const double> t, std::span<const double> e,
                                double skip_fraction = 0.1) {
    if (t.size() != e.size() || t.size() < 2)
        throw std::invalid_argument("envelope_exponent: need two equal-length series");
    const double t_min = skip_fraction * t.back();
    double env = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        env = std::max(env, e[i]);
        if (t[i] < t_min || env <= 0.0) continue;
        const double x = std::log1p(t[i]);
        const double y = std::log(env);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

/// First position where the decay ratio e[i]/e[i-1] exceeds the
/// threshold, i.e. where a sweep stops decaying; returns size() if the
/// whole series keeps the ratio.
inline std::size_t plateau_index(std::span<const double> e, double ratio = 0.5) {
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i] > ratio * e[i - 1]) return i;
    return e.size();
}

/// Distance between two trajectories at matching steps, the quantity the
/// coefficient-perturbation bound controls:
/// D = ||(u - u~)_t|| + ||q - q~|| in the expectation-L2 sense, with the
/// time derivative realized by the backward difference of the states.
inline double state_distance(const SolverState& a, const SolverState& b) {
    if (a.n != b.n || a.dt != b.dt)
        throw std::invalid_argument("state_distance: states must be at the same step");
    double dv2 = 0.0;
    {
        const auto& ac = a.v_curr.data();
        const auto& ap = a.v_prev.data();
        const auto& bc = b.v_curr.data();
        const auto& bp = b.v_prev.data();
        for (std::size_t i = 0; i < ac.size(); ++i) {
            const double d = (ac[i] - ap[i]) - (bc[i] - bp[i]);
            dv2 += d * d;
        }
    }
    double ds2 = 0.0;
    auto acc = [&](const DgScalarField& s0, const DgScalarField& s1) {
        const auto& x = s0.data();
        const auto& y = s1.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            ds2 += d * d;
        }
    };
    acc(a.S_curr.x, b.S_curr.x);
    acc(a.S_curr.z, b.S_curr.z);
    return std::sqrt(dv2) / a.dt + std::sqrt(ds2);
}

/// Same distance at t = 0 from the projected initial data.
inline double initial_distance(const InitialData& a, const DgVectorField& Sa,
                               const InitialData& b, const DgVectorField& Sb) {
    double dw2 = 0.0;
    {
        const auto& x = a.w0.data();
        const auto& y = b.w0.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            dw2 += d * d;
        }
    }
    double ds2 = 0.0;
    auto acc = [&](const DgScalarField& s0, const DgScalarField& s1) {
        const auto& x = s0.data();
        const auto& y = s1.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            ds2 += d * d;
        }
    };
    acc(Sa.x, Sb.x);
    acc(Sa.z, Sb.z);
    return std::sqrt(dw2) + std::sqrt(ds2);
}

}  // namespace sgwave
