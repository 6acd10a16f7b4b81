#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgwave {

/// One-sided limit selector at a mesh line or region interface:
/// minus = lower-coordinate side, plus = higher-coordinate side.
enum class Side { minus, plus };

struct Rect {
    double x_lo = 0, x_hi = 1, z_lo = 0, z_hi = 1;
    double width() const { return x_hi - x_lo; }
    double height() const { return z_hi - z_lo; }
    double area() const { return width() * height(); }
};

enum class Axis { x, z };

/// Edge identifier. Vertical edges sit at x = x_lo + i*hx (i in 0..nx)
/// spanning cell row j; horizontal edges at z = z_lo + j*hz (j in 0..nz)
/// spanning cell column i. The minus side is the lower-coordinate cell.
struct EdgeRef {
    Axis axis;  // x: vertical edge (normal along x); z: horizontal edge
    int i;      // line index along the edge normal
    int j;      // cell index along the edge
};

/// Uniform rectangular mesh. Cells are indexed cell = iz*nx + ix.
class Mesh2D {
public:
    Mesh2D() = default;

    Mesh2D(Rect domain, int nx, int nz, std::span<const double> interfaces_x = {},
           std::span<const double> interfaces_z = {})
        : dom_(domain), nx_(nx), nz_(nz) {
        if (nx < 1 || nz < 1) throw std::invalid_argument("Mesh2D: cell counts must be >= 1");
        if (domain.width() <= 0 || domain.height() <= 0)
            throw std::invalid_argument("Mesh2D: degenerate domain");
        hx_ = domain.width() / nx;
        hz_ = domain.height() / nz;
        for (double x : interfaces_x) require_on_grid(x, dom_.x_lo, hx_, nx_, "x");
        for (double z : interfaces_z) require_on_grid(z, dom_.z_lo, hz_, nz_, "z");
    }

    const Rect& domain() const { return dom_; }
    int nx() const { return nx_; }
    int nz() const { return nz_; }
    double hx() const { return hx_; }
    double hz() const { return hz_; }
    int cell_count() const { return nx_ * nz_; }

    int cell_index(int ix, int iz) const { return iz * nx_ + ix; }
    int cell_ix(int cell) const { return cell % nx_; }
    int cell_iz(int cell) const { return cell / nx_; }

    double x_line(int i) const { return dom_.x_lo + i * hx_; }
    double z_line(int j) const { return dom_.z_lo + j * hz_; }
    double cell_x_center(int ix) const { return dom_.x_lo + (ix + 0.5) * hx_; }
    double cell_z_center(int iz) const { return dom_.z_lo + (iz + 0.5) * hz_; }

    /// Map x to [-1,1] within cell column ix.
    double to_ref_x(int ix, double x) const { return 2.0 * (x - x_line(ix)) / hx_ - 1.0; }
    double to_ref_z(int iz, double z) const { return 2.0 * (z - z_line(iz)) / hz_ - 1.0; }

    /// Cell column containing x; a point on an interior mesh line needs a
    /// side to disambiguate.
    int locate_x(double x, std::optional<Side> side = {}) const {
        return locate(x, dom_.x_lo, dom_.x_hi, hx_, nx_, side, "x");
    }
    int locate_z(double z, std::optional<Side> side = {}) const {
        return locate(z, dom_.z_lo, dom_.z_hi, hz_, nz_, side, "z");
    }

    int vertical_edge_count() const { return (nx_ + 1) * nz_; }
    int horizontal_edge_count() const { return nx_ * (nz_ + 1); }

    /// Incident cell of an edge on the given side, or -1 outside the domain.
    int edge_cell(const EdgeRef& e, Side s) const {
        if (e.axis == Axis::x) {
            int ix = (s == Side::minus) ? e.i - 1 : e.i;
            if (ix < 0 || ix >= nx_) return -1;
            return cell_index(ix, e.j);
        }
        int iz = (s == Side::minus) ? e.i - 1 : e.i;
        if (iz < 0 || iz >= nz_) return -1;
        return cell_index(e.j, iz);
    }

    bool is_boundary(const EdgeRef& e) const {
        int n = (e.axis == Axis::x) ? nx_ : nz_;
        return e.i == 0 || e.i == n;
    }

private:
    static void require_on_grid(double v, double lo, double h, int n, const char* ax) {
        double s = (v - lo) / h;
        double r = std::round(s);
        if (std::abs(s - r) > 1e-9 * n || r < 1 || r > n - 1)
            throw std::invalid_argument(std::string("Mesh2D: interface line ") + ax + " = " +
                                        std::to_string(v) + " does not coincide with a mesh line");
    }

    static int locate(double v, double lo, double hi, double h, int n, std::optional<Side> side,
                      const char* ax) {
        if (v < lo - 1e-12 || v > hi + 1e-12)
            throw std::out_of_range(std::string("Mesh2D: point outside domain in ") + ax);
        double s = (v - lo) / h;
        double r = std::round(s);
        if (std::abs(s - r) < 1e-12 * std::max(1, n)) {
            int line = static_cast<int>(r);
            if (line <= 0) return 0;
            if (line >= n) return n - 1;
            if (!side)
                throw std::invalid_argument(std::string("Mesh2D: point on interior mesh line in ") +
                                            ax + "; side selector required");
            return (*side == Side::minus) ? line - 1 : line;
        }
        int c = static_cast<int>(std::floor(s));
        return std::min(std::max(c, 0), n - 1);
    }

    Rect dom_;
    int nx_ = 0, nz_ = 0;
    double hx_ = 0, hz_ = 0;
};

inline Mesh2D build_mesh(Rect domain, int nx, int nz, std::span<const double> interfaces_x = {},
                         std::span<const double> interfaces_z = {}) {
    return Mesh2D(domain, nx, nz, interfaces_x, interfaces_z);
}

}  // namespace sgwave
