#pragma once

#include "webplate/geometry.hpp"
#include "webplate/quadrature.hpp"
#include "webplate/spline.hpp"

#include <Eigen/Sparse>

#include <array>
#include <limits>
#include <memory>
#include <vector>

namespace webplate {

using Index2 = std::array<int, 2>;

/// Spline indices k = (kx, ky), 0 <= kx < nkx, with support cells kx..kx+p (same for y).
struct IndexClassification {
    int nkx = 0, nky = 0;
    std::vector<signed char> status;  // 0 unused, 1 inner, 2 outer
    std::vector<Index2> inner;        // lexicographic in (kx, ky)
    std::vector<Index2> outer;

    [[nodiscard]] int id(int kx, int ky) const { return ky * nkx + kx; }
    [[nodiscard]] bool valid(int kx, int ky) const { return kx >= 0 && ky >= 0 && kx < nkx && ky < nky; }
    [[nodiscard]] bool is_inner(int kx, int ky) const { return valid(kx, ky) && status[id(kx, ky)] == 1; }
};

inline IndexClassification classify_indices(const GridSpec& grid, int p, const std::vector<CellClass>& cells) {
    IndexClassification c;
    c.nkx = grid.nx - p;
    c.nky = grid.ny - p;
    if (c.nkx <= 0 || c.nky <= 0) throw Error("grid smaller than a spline support");
    c.status.assign(static_cast<std::size_t>(c.nkx) * c.nky, 0);
    for (int pass = 0; pass < 2; ++pass) {
        const CellClass want = pass == 0 ? CellClass::Interior : CellClass::Boundary;
        const signed char tag = pass == 0 ? 1 : 2;
        for (int cj = 0; cj < grid.ny; ++cj)
            for (int ci = 0; ci < grid.nx; ++ci) {
                if (cells[grid.cell_id(ci, cj)] != want) continue;
                for (int ky = std::max(0, cj - p); ky <= std::min(c.nky - 1, cj); ++ky)
                    for (int kx = std::max(0, ci - p); kx <= std::min(c.nkx - 1, ci); ++kx) {
                        auto& s = c.status[c.id(kx, ky)];
                        if (s == 0) s = tag;
                    }
            }
    }
    for (int kx = 0; kx < c.nkx; ++kx)
        for (int ky = 0; ky < c.nky; ++ky) {
            const auto s = c.status[c.id(kx, ky)];
            if (s == 1) c.inner.push_back({kx, ky});
            else if (s == 2) c.outer.push_back({kx, ky});
        }
    if (c.inner.empty()) throw Error("domain under-resolved: no interior cells");
    return c;
}

struct ExtensionTable {
    struct Entry {
        int index;  // position in inner (for from_outer) or outer (for per_inner) list
        double coefficient;
    };
    std::vector<Index2> array_origin;                // per outer j: lower-left index of its inner array
    std::vector<std::vector<Entry>> from_outer;      // per outer j: (inner i, e_ij)
    std::vector<std::vector<Entry>> per_inner;       // per inner i: (outer j, e_ij)
};

/// Lagrange weight of node i among nodes first..first+p, evaluated at j.
inline double lagrange_weight(int first, int p, int i, int j) {
    double e = 1.0;
    for (int m = first; m <= first + p; ++m)
        if (m != i) e *= static_cast<double>(j - m) / static_cast<double>(i - m);
    return e;
}

inline ExtensionTable build_extension(const IndexClassification& c, int p) {
    ExtensionTable t;
    const int nx = c.nkx, ny = c.nky;
    // prefix sums of the inner indicator for O(1) array tests
    std::vector<int> sum(static_cast<std::size_t>(nx + 1) * (ny + 1), 0);
    auto S = [&](int x, int y) -> int& { return sum[static_cast<std::size_t>(y) * (nx + 1) + x]; };
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) S(x + 1, y + 1) = S(x, y + 1) + S(x + 1, y) - S(x, y) + (c.status[c.id(x, y)] == 1);
    auto full = [&](int lx, int ly) {
        if (lx < 0 || ly < 0 || lx + p >= nx || ly + p >= ny) return false;
        const int n = S(lx + p + 1, ly + p + 1) - S(lx, ly + p + 1) - S(lx + p + 1, ly) + S(lx, ly);
        return n == (p + 1) * (p + 1);
    };
    Eigen::Vector2d centroid(0.0, 0.0);
    for (const auto& i : c.inner) centroid += Eigen::Vector2d(i[0], i[1]);
    centroid /= static_cast<double>(c.inner.size());

    std::vector<int> inner_pos(c.status.size(), -1);
    for (std::size_t k = 0; k < c.inner.size(); ++k) inner_pos[c.id(c.inner[k][0], c.inner[k][1])] = static_cast<int>(k);

    const int radius = 2 * (p + 1);
    t.per_inner.resize(c.inner.size());
    for (std::size_t jn = 0; jn < c.outer.size(); ++jn) {
        const Index2 j = c.outer[jn];
        double best = std::numeric_limits<double>::infinity(), best_tie = best;
        Index2 arr{-1, -1};
        for (int ly = j[1] - p - radius; ly <= j[1] + radius; ++ly)
            for (int lx = j[0] - p - radius; lx <= j[0] + radius; ++lx) {
                const int gx = std::max({lx - j[0], j[0] - lx - p, 0});
                const int gy = std::max({ly - j[1], j[1] - ly - p, 0});
                if (std::max(gx, gy) > radius || !full(lx, ly)) continue;
                const Eigen::Vector2d ctr(lx + 0.5 * p, ly + 0.5 * p);
                const double d = (ctr - Eigen::Vector2d(j[0], j[1])).squaredNorm();
                const double tie = (ctr - centroid).squaredNorm();
                if (d < best - 1e-12 || (d < best + 1e-12 && tie < best_tie - 1e-12)) {
                    best = d;
                    best_tie = tie;
                    arr = {lx, ly};
                }
            }
        if (arr[0] < 0) throw Error("extension failed: inner index array not found (refine grid)");
        t.array_origin.push_back(arr);
        std::vector<ExtensionTable::Entry> entries;
        for (int iy = arr[1]; iy <= arr[1] + p; ++iy) {
            const double ey = lagrange_weight(arr[1], p, iy, j[1]);
            for (int ix = arr[0]; ix <= arr[0] + p; ++ix) {
                const double e = lagrange_weight(arr[0], p, ix, j[0]) * ey;
                const int ipos = inner_pos[c.id(ix, iy)];
                entries.push_back({ipos, e});
                t.per_inner[ipos].push_back({static_cast<int>(jn), e});
            }
        }
        t.from_outer.push_back(std::move(entries));
    }
    return t;
}

/// Splines nonzero at a point with their jets and ids in the relevant (inner+outer) numbering.
struct LocalSplines {
    int count = 0;
    std::array<int, (kMaxDegree + 1) * (kMaxDegree + 1)> ids{};
    std::array<Jet, (kMaxDegree + 1) * (kMaxDegree + 1)> jets{};
};

/// Weighted extended B-spline basis on a uniform grid.
class WebBasis {
public:
    WebBasis(DomainSpec domain, WeightFunction weight, double h, int degree)
        : domain_(std::move(domain)), weight_(std::move(weight)), p_(degree) {
        domain_.validate();
        SplineSpec{degree, h, 0.0}.validate();
        grid_ = make_grid(domain_.bounding_box(), h, p_ + 1);
        cells_ = classify_cells(grid_, domain_);
        cls_ = classify_indices(grid_, p_, cells_);
        ext_ = build_extension(cls_, p_);
        relevant_.assign(cls_.status.size(), -1);
        for (const auto& i : cls_.inner) add_relevant(i);
        for (const auto& j : cls_.outer) add_relevant(j);
        compute_normalizers();
        build_extension_matrix();
    }

    [[nodiscard]] const DomainSpec& domain() const { return domain_; }
    [[nodiscard]] const WeightFunction& weight() const { return weight_; }
    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] int degree() const { return p_; }
    [[nodiscard]] double h() const { return grid_.h; }
    [[nodiscard]] const std::vector<CellClass>& cells() const { return cells_; }
    [[nodiscard]] const IndexClassification& classification() const { return cls_; }
    [[nodiscard]] const ExtensionTable& extension() const { return ext_; }
    [[nodiscard]] int size() const { return static_cast<int>(cls_.inner.size()); }
    [[nodiscard]] int relevant_size() const { return static_cast<int>(relevant_list_.size()); }
    [[nodiscard]] const std::vector<Index2>& relevant_indices() const { return relevant_list_; }
    [[nodiscard]] const Vec2& normalization_point(int i) const { return xi_[i]; }
    [[nodiscard]] double normalizer(int i) const { return wxi_[i]; }
    [[nodiscard]] SplineSpec spec_x() const { return SplineSpec{p_, grid_.h, grid_.origin.x()}; }
    [[nodiscard]] SplineSpec spec_y() const { return SplineSpec{p_, grid_.h, grid_.origin.y()}; }

    /// Row i maps relevant plain spline coefficients: B_i = omega * sum_k E(i,k) b_k.
    [[nodiscard]] const Eigen::SparseMatrix<double>& extension_matrix() const { return E_; }

    /// Plain-spline coefficients of sum_i u_i B_i (without the weight factor).
    [[nodiscard]] Eigen::VectorXd to_plain(const Eigen::VectorXd& u) const { return E_.transpose() * u; }

    /// cell >= 0 evaluates the polynomial pieces of that grid cell.
    void local_splines(const Vec2& x, LocalSplines& out, int cell = -1) const {
        const int ci = cell >= 0 ? cell % grid_.nx : -1, cj = cell >= 0 ? cell / grid_.nx : -1;
        const LocalBasis1D bx = local_basis(spec_x(), x.x(), 2, ci);
        const LocalBasis1D by = local_basis(spec_y(), x.y(), 2, cj);
        out.count = 0;
        for (int b = 0; b < by.count; ++b) {
            const int ky = by.first + b;
            for (int a = 0; a < bx.count; ++a) {
                const int kx = bx.first + a;
                const int id = cls_.valid(kx, ky) ? relevant_[cls_.id(kx, ky)] : -1;
                if (id < 0) continue;
                Jet& j = out.jets[out.count];
                j.v = bx.d[0][a] * by.d[0][b];
                j.dx = bx.d[1][a] * by.d[0][b];
                j.dy = bx.d[0][a] * by.d[1][b];
                j.dxx = bx.d[2][a] * by.d[0][b];
                j.dxy = bx.d[1][a] * by.d[1][b];
                j.dyy = bx.d[0][a] * by.d[2][b];
                out.ids[out.count++] = id;
            }
        }
    }

    /// Jet of omega * sum_k c_k b_k for relevant plain coefficients c.
    [[nodiscard]] Jet field(const Eigen::VectorXd& plain, const Vec2& x) const {
        LocalSplines ls;
        local_splines(x, ls);
        Jet s;
        for (int k = 0; k < ls.count; ++k) s += ls.jets[k] * plain[ls.ids[k]];
        return weight_.eval(x) * s;
    }

    /// Jet of the basis function B_i.
    [[nodiscard]] Jet eval_jet(int i, const Vec2& x) const {
        Jet s;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Er_, i); it; ++it) {
            const Index2 k = relevant_list_[it.col()];
            s += spline_jet(k, x) * it.value();
        }
        return weight_.eval(x) * s;
    }

    [[nodiscard]] double eval(int i, double x, double y, int dx, int dy) const {
        return eval_jet(i, Vec2(x, y)).partial(dx, dy);
    }

    [[nodiscard]] Jet spline_jet(const Index2& k, const Vec2& x) const {
        const SplineSpec sx = spec_x(), sy = spec_y();
        Jet j;
        const double bx0 = bspline_eval(sx, k[0], x.x(), 0), by0 = bspline_eval(sy, k[1], x.y(), 0);
        const double bx1 = bspline_eval(sx, k[0], x.x(), 1), by1 = bspline_eval(sy, k[1], x.y(), 1);
        const double bx2 = p_ >= 2 ? bspline_eval(sx, k[0], x.x(), 2) : 0.0;
        const double by2 = p_ >= 2 ? bspline_eval(sy, k[1], x.y(), 2) : 0.0;
        j.v = bx0 * by0;
        j.dx = bx1 * by0;
        j.dy = bx0 * by1;
        j.dxx = bx2 * by0;
        j.dxy = bx1 * by1;
        j.dyy = bx0 * by2;
        return j;
    }

    /// Quadrature rules for all cells meeting the domain, in cell order.
    struct CellRule {
        int cell;
        QuadratureRule rule;
    };
    [[nodiscard]] std::vector<CellRule> cell_rules(int order, int depth) const {
        std::vector<CellRule> out;
        const auto prims = domain_.primitives();
        for (int cj = 0; cj < grid_.ny; ++cj)
            for (int ci = 0; ci < grid_.nx; ++ci) {
                const int id = grid_.cell_id(ci, cj);
                if (cells_[id] == CellClass::Exterior) continue;
                const Box b = grid_.cell_box(ci, cj);
                CellRule cr{id, cells_[id] == CellClass::Interior ? interior_cell_rule(b, order)
                                                                   : cut_cell_rule(b, domain_, order, depth, &prims)};
                if (!cr.rule.nodes.empty()) out.push_back(std::move(cr));
            }
        return out;
    }

private:
    void add_relevant(const Index2& k) {
        relevant_[cls_.id(k[0], k[1])] = static_cast<int>(relevant_list_.size());
        relevant_list_.push_back(k);
    }

    void compute_normalizers() {
        const double h = grid_.h;
        for (const auto& k : cls_.inner) {
            Vec2 x = grid_.origin + h * Vec2(k[0] + 0.5 * (p_ + 1), k[1] + 0.5 * (p_ + 1));
            if (!domain_.contains(x) || !(weight_.value(x) > 0.0)) {
                double best = std::numeric_limits<double>::infinity();
                Vec2 bx = x;
                for (int cj = k[1]; cj <= k[1] + p_; ++cj)
                    for (int ci = k[0]; ci <= k[0] + p_; ++ci) {
                        if (cells_[grid_.cell_id(ci, cj)] != CellClass::Interior) continue;
                        const Vec2 c = grid_.cell_center(ci, cj);
                        if ((c - x).norm() < best) {
                            best = (c - x).norm();
                            bx = c;
                        }
                    }
                x = bx;
            }
            const double w = weight_.value(x);
            if (!(w > 0.0) || !std::isfinite(w)) throw Error("weight function not positive inside the domain");
            xi_.push_back(x);
            wxi_.push_back(w);
        }
    }

    void build_extension_matrix() {
        std::vector<Eigen::Triplet<double>> t;
        for (std::size_t i = 0; i < cls_.inner.size(); ++i) {
            const double s = 1.0 / wxi_[i];
            t.emplace_back(static_cast<int>(i), relevant_[cls_.id(cls_.inner[i][0], cls_.inner[i][1])], s);
            for (const auto& e : ext_.per_inner[i]) {
                const Index2 j = cls_.outer[e.index];
                t.emplace_back(static_cast<int>(i), relevant_[cls_.id(j[0], j[1])], s * e.coefficient);
            }
        }
        E_.resize(size(), relevant_size());
        E_.setFromTriplets(t.begin(), t.end());
        Er_ = E_;
    }

    DomainSpec domain_;
    WeightFunction weight_;
    int p_;
    GridSpec grid_;
    std::vector<CellClass> cells_;
    IndexClassification cls_;
    ExtensionTable ext_;
    std::vector<int> relevant_;
    std::vector<Index2> relevant_list_;
    std::vector<Vec2> xi_;
    std::vector<double> wxi_;
    Eigen::SparseMatrix<double> E_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> Er_;
};

/// Function sum_i u_i B_i stored through its plain-spline coefficients.
class WebField {
public:
    WebField() = default;
    WebField(std::shared_ptr<const WebBasis> basis, const Eigen::VectorXd& u)
        : basis_(std::move(basis)), u_(u), plain_(basis_->to_plain(u)) {}

    [[nodiscard]] Jet eval(const Vec2& x) const { return basis_ ? basis_->field(plain_, x) : Jet{}; }
    [[nodiscard]] const Eigen::VectorXd& coefficients() const { return u_; }
    [[nodiscard]] const Eigen::VectorXd& plain() const { return plain_; }
    [[nodiscard]] const std::shared_ptr<const WebBasis>& basis() const { return basis_; }

private:
    std::shared_ptr<const WebBasis> basis_;
    Eigen::VectorXd u_;
    Eigen::VectorXd plain_;
};

inline double web_eval(const WebBasis& basis, int i, double x, double y, int dx, int dy) {
    return basis.eval(i, x, y, dx, dy);
}

}  // namespace webplate
