#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hbv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

// Coupling constant of the alpha-Hermite operator. kappa = sqrt(alpha - 1)
// multiplies the zero-order part of the generalized derivatives; alpha = 1
// collapses everything to the classical Euclidean objects.
struct AlphaParam {
    double alpha;
    double kappa;

    explicit AlphaParam(double a) : alpha(a), kappa(0.0) {
        if (!(a >= 1.0)) throw Error("AlphaParam: alpha must be >= 1, got " + std::to_string(a));
        kappa = std::sqrt(a - 1.0);
    }
};

inline std::size_t cell_budget() {
    if (const char* e = std::getenv("HBV_CELL_BUDGET")) {
        const long long v = std::atoll(e);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 24;
}

// Uniform cell-centered Cartesian grid over a box. Linear indices are
// row-major with axis 0 slowest, matching the HBVSET raster format.
struct Grid {
    int dim = 0;
    std::array<int, 3> shape{1, 1, 1};
    double spacing = 0.0;
    Vec3 origin{0.0, 0.0, 0.0};

    Grid() = default;
    Grid(int d, std::array<int, 3> n, double h, Vec3 org) : dim(d), shape(n), spacing(h), origin(org) {
        if (d < 1 || d > 3) throw Error("Grid: dim must be 1, 2 or 3");
        if (!(h > 0.0)) throw Error("Grid: spacing must be positive");
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) {
            if (shape[i] < 1) throw Error("Grid: shape entries must be >= 1");
            total *= static_cast<std::size_t>(shape[i]);
        }
        for (int i = d; i < 3; ++i) {
            shape[i] = 1;
            origin[i] = 0.0;
        }
        const std::size_t budget = cell_budget();
        if (total > budget)
            throw Error("Grid: cell count " + std::to_string(total) + " exceeds budget " +
                        std::to_string(budget));
    }

    std::size_t cells() const {
        std::size_t t = 1;
        for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(shape[i]);
        return t;
    }

    std::array<int, 3> coords(std::size_t idx) const {
        std::array<int, 3> k{0, 0, 0};
        for (int i = dim - 1; i >= 0; --i) {
            k[i] = static_cast<int>(idx % static_cast<std::size_t>(shape[i]));
            idx /= static_cast<std::size_t>(shape[i]);
        }
        return k;
    }

    std::size_t index(const std::array<int, 3>& k) const {
        std::size_t idx = 0;
        for (int i = 0; i < dim; ++i) idx = idx * static_cast<std::size_t>(shape[i]) + static_cast<std::size_t>(k[i]);
        return idx;
    }

    // Stride of axis i in the linear index.
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int i = axis + 1; i < dim; ++i) s *= static_cast<std::size_t>(shape[i]);
        return s;
    }

    Vec3 cell_center(const std::array<int, 3>& k) const {
        Vec3 x{0.0, 0.0, 0.0};
        for (int i = 0; i < dim; ++i) x[i] = origin[i] + (k[i] + 0.5) * spacing;
        return x;
    }

    Vec3 cell_center(std::size_t idx) const { return cell_center(coords(idx)); }

    double cell_volume() const {
        double v = spacing;
        for (int i = 1; i < dim; ++i) v *= spacing;
        return v;
    }

    double face_area() const {
        double a = 1.0;
        for (int i = 1; i < dim; ++i) a *= spacing;
        return a;
    }

    bool same_layout(const Grid& o) const {
        return dim == o.dim && shape == o.shape && spacing == o.spacing && origin == o.origin;
    }
};

// Symmetric box [-extent, extent]^dim with cells_per_axis cells per axis.
inline Grid build_grid(int dim, double extent, int cells_per_axis) {
    if (dim < 1 || dim > 3) throw Error("build_grid: dim must be in {1,2,3}");
    if (!(extent > 0.0)) throw Error("build_grid: extent must be positive");
    if (cells_per_axis < 2) throw Error("build_grid: cells_per_axis must be >= 2");
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(cells_per_axis);
    const std::size_t budget = cell_budget();
    if (total > budget)
        throw Error("build_grid: " + std::to_string(total) + " cells exceed budget " + std::to_string(budget) +
                    "; raise HBV_CELL_BUDGET to at least " + std::to_string(total));
    const double h = 2.0 * extent / cells_per_axis;
    return Grid(dim, {cells_per_axis, cells_per_axis, cells_per_axis}, h,
                Vec3{-extent, -extent, -extent});
}

inline double norm2(const Vec3& x, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += x[i] * x[i];
    return s;
}

inline double norm(const Vec3& x, int dim) { return std::sqrt(norm2(x, dim)); }

}  // namespace hbv
