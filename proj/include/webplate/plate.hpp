#pragma once

#include "webplate/quadrature.hpp"
#include "webplate/solvers.hpp"
#include "webplate/web_basis.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace webplate {

struct PlateMaterial {
    double D = 1.0;
    double nu = 0.3;
    double E = 1.0;
    double thickness = 1.0;

    void validate() const {
        if (!(D > 0.0)) throw Error("flexural rigidity D must be positive");
        if (!(nu >= 0.0 && nu < 0.5)) throw Error("Poisson ratio must lie in [0, 0.5)");
        if (!(E > 0.0)) throw Error("Young modulus must be positive");
        if (!(thickness > 0.0)) throw Error("plate thickness must be positive");
    }
};

/// Straight beam glued along the segment a-b. Ts is the axial compressive force.
struct Stiffener {
    Vec2 a{0.0, 0.0};
    Vec2 b{1.0, 0.0};
    double EI = 0.0;
    double r0 = 0.0;
    double zeta0 = 0.0;
    double Ts = 0.0;

    void validate(const DomainSpec& d) const {
        if ((b - a).norm() == 0.0) throw Error("stiffener endpoints must be distinct");
        if (!(EI >= 0.0) || !(r0 >= 0.0)) throw Error("stiffener EI and r0 must be non-negative");
        const double tol = 1e-9 * (d.bounding_box().width() + d.bounding_box().height());
        for (int k = 0; k <= 16; ++k) {
            const Vec2 x = a + (k / 16.0) * (b - a);
            if (!d.contains(x) && d.boundary_distance(x) > tol) throw Error("stiffener leaves the plate domain");
        }
    }
};

struct QuadOptions {
    int order = 0;  // 0: degree + 3
    int depth = 6;

    [[nodiscard]] int resolved_order(int degree) const { return order > 0 ? order : degree + 3; }
};

struct StressState {
    double xx = 0.0, yy = 0.0, xy = 0.0;
};

/// In-plane membrane stress (force per unit length) as a function of position.
class StressField {
public:
    using Fn = std::function<StressState(const Vec2&)>;

    StressField() : StressField(constant(0.0, 0.0, 0.0)) {}
    StressField(Fn f, std::string provenance) : f_(std::move(f)), provenance_(std::move(provenance)) {}

    static StressField constant(double sxx, double syy, double sxy) {
        return StressField([=](const Vec2&) { return StressState{sxx, syy, sxy}; }, "constant");
    }

    /// Annulus a < r < b under unit radial compression on r = b, free at r = a.
    static StressField annulus_compression(const Vec2& center, double a, double b) {
        const double den = 1.0 - a * a / (b * b);
        return StressField(
            [=](const Vec2& x) {
                const Vec2 d = x - center;
                const double r2 = d.squaredNorm();
                const double srr = -(1.0 - a * a / r2) / den;
                const double spp = -(1.0 + a * a / r2) / den;
                const double c2 = d.x() * d.x() / r2, s2 = d.y() * d.y() / r2, sc = d.x() * d.y() / r2;
                return StressState{srr * c2 + spp * s2, srr * s2 + spp * c2, (srr - spp) * sc};
            },
            "analytic");
    }

    [[nodiscard]] StressState operator()(const Vec2& x) const { return f_(x); }
    [[nodiscard]] const std::string& provenance() const { return provenance_; }

private:
    Fn f_;
    std::string provenance_;
};

/// Basis together with its per-cell quadrature rules.
struct Discretization {
    std::shared_ptr<const WebBasis> basis;
    std::vector<WebBasis::CellRule> rules;
    int order = 0;
    int depth = 6;

    static Discretization build(const DomainSpec& domain, const WeightFunction& weight, double h, int degree,
                                const QuadOptions& q) {
        Discretization d;
        d.basis = std::make_shared<const WebBasis>(domain, weight, h, degree);
        d.order = q.resolved_order(degree);
        d.depth = q.depth;
        d.rules = d.basis->cell_rules(d.order, d.depth);
        return d;
    }
};

namespace detail {

/// Weighted splines omega*b_k at a point.
struct WeightedLocal {
    LocalSplines ls;
    std::array<Jet, (kMaxDegree + 1) * (kMaxDegree + 1)> w{};
    Jet omega;

    void eval(const WebBasis& basis, const Vec2& x, int cell = -1) {
        basis.local_splines(x, ls, cell);
        omega = basis.weight().eval(x);
        for (int k = 0; k < ls.count; ++k) w[k] = omega * ls.jets[k];
    }
};

/// Symmetric accumulator over relevant splines with a (2p+1)^2 stencil per row.
class StencilAssembler {
public:
    explicit StencilAssembler(const WebBasis& basis)
        : basis_(basis), p_(basis.degree()), width_(2 * p_ + 1), n_(basis.relevant_size()),
          values_(static_cast<std::size_t>(n_) * width_ * width_, 0.0) {}

    /// Adds local[a][b] for a <= b (mirrored) for the given relevant ids.
    void add(const int* ids, int count, const std::vector<double>& local) {
        const auto& idx = basis_.relevant_indices();
        for (int a = 0; a < count; ++a) {
            const Index2 ka = idx[ids[a]];
            for (int b = a; b < count; ++b) {
                const double v = local[static_cast<std::size_t>(a) * count + b];
                if (v == 0.0) continue;
                const Index2 kb = idx[ids[b]];
                at(ids[a], kb[0] - ka[0], kb[1] - ka[1]) += v;
                if (b != a) at(ids[b], ka[0] - kb[0], ka[1] - kb[1]) += v;
            }
        }
    }

    [[nodiscard]] Eigen::SparseMatrix<double> matrix() const {
        const auto& idx = basis_.relevant_indices();
        const auto& cls = basis_.classification();
        std::vector<int> lookup(cls.status.size(), -1);
        for (int r = 0; r < n_; ++r) lookup[cls.id(idx[r][0], idx[r][1])] = r;
        std::vector<Eigen::Triplet<double>> t;
        for (int r = 0; r < n_; ++r)
            for (int oy = -p_; oy <= p_; ++oy)
                for (int ox = -p_; ox <= p_; ++ox) {
                    const double v = values_[slot(r, ox, oy)];
                    if (v == 0.0) continue;
                    const int c = lookup[cls.id(idx[r][0] + ox, idx[r][1] + oy)];
                    t.emplace_back(r, c, v);
                }
        Eigen::SparseMatrix<double> m(n_, n_);
        m.setFromTriplets(t.begin(), t.end());
        return m;
    }

private:
    [[nodiscard]] std::size_t slot(int r, int ox, int oy) const {
        return (static_cast<std::size_t>(r) * width_ + (oy + p_)) * width_ + (ox + p_);
    }
    double& at(int r, int ox, int oy) { return values_[slot(r, ox, oy)]; }

    const WebBasis& basis_;
    int p_, width_, n_;
    std::vector<double> values_;
};

/// Reduce a form on relevant splines to the WEB basis: E M E^T.
inline SparseSym reduce(const WebBasis& basis, const Eigen::SparseMatrix<double>& m) {
    const Eigen::SparseMatrix<double>& E = basis.extension_matrix();
    Eigen::SparseMatrix<double> em = E * m;
    Eigen::SparseMatrix<double> et = E.transpose();
    Eigen::SparseMatrix<double> r = em * et;
    return SparseSym::symmetrized(r);
}

template <class Kernel>
void assemble_area(const Discretization& disc, StencilAssembler& acc, Kernel&& kernel) {
    const WebBasis& basis = *disc.basis;
    WeightedLocal wl;
    std::vector<double> local;
    std::array<int, (kMaxDegree + 1) * (kMaxDegree + 1)> ids{};
    for (const auto& cr : disc.rules) {
        int count = -1;
        for (std::size_t q = 0; q < cr.rule.size(); ++q) {
            wl.eval(basis, cr.rule.nodes[q], cr.cell);
            if (count < 0) {
                count = wl.ls.count;
                std::copy(wl.ls.ids.begin(), wl.ls.ids.begin() + count, ids.begin());
                local.assign(static_cast<std::size_t>(count) * count, 0.0);
            }
            kernel(cr.rule.nodes[q], cr.rule.weights[q], wl, local, count);
        }
        if (count > 0) acc.add(ids.data(), count, local);
    }
}

template <class Kernel>
void assemble_line(const WebBasis& basis, const SegmentRule& rule, StencilAssembler& acc, Kernel&& kernel) {
    WeightedLocal wl;
    std::vector<double> local;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        wl.eval(basis, rule.nodes[q]);
        const int count = wl.ls.count;
        local.assign(static_cast<std::size_t>(count) * count, 0.0);
        kernel(rule.tangents[q], rule.weights[q], wl, local, count);
        acc.add(wl.ls.ids.data(), count, local);
    }
}

}  // namespace detail

inline SparseSym assemble_bending(const Discretization& disc, const PlateMaterial& mat,
                                  const std::vector<Stiffener>& stiffeners = {}) {
    mat.validate();
    const WebBasis& basis = *disc.basis;
    detail::StencilAssembler acc(basis);
    const double D = mat.D, nu = mat.nu;
    std::vector<double> c(kMaxDegree * kMaxDegree * 4), e(c.size()), f(c.size());
    detail::assemble_area(disc, acc, [&](const Vec2&, double wq, const detail::WeightedLocal& wl, std::vector<double>& local, int n) {
        for (int a = 0; a < n; ++a) {
            const Jet& u = wl.w[a];
            c[a] = wq * D * (u.dxx + nu * u.dyy);
            e[a] = wq * D * 2.0 * (1.0 - nu) * u.dxy;
            f[a] = wq * D * (u.dyy + nu * u.dxx);
        }
        for (int a = 0; a < n; ++a) {
            double* row = &local[static_cast<std::size_t>(a) * n];
            for (int b = a; b < n; ++b) {
                const Jet& v = wl.w[b];
                row[b] += c[a] * v.dxx + e[a] * v.dxy + f[a] * v.dyy;
            }
        }
    });
    for (const auto& s : stiffeners) {
        s.validate(basis.domain());
        if (s.EI == 0.0) continue;
        const SegmentRule rule = segment_rule(s.a, s.b, basis.grid(), disc.order);
        detail::assemble_line(basis, rule, acc, [&](const Vec2& t, double wq, const detail::WeightedLocal& wl,
                                                    std::vector<double>& local, int n) {
            for (int a = 0; a < n; ++a) {
                const double ua = wl.w[a].second(t, t);
                for (int b = a; b < n; ++b) local[static_cast<std::size_t>(a) * n + b] += wq * s.EI * ua * wl.w[b].second(t, t);
            }
        });
    }
    return detail::reduce(basis, acc.matrix());
}

/// b_i = integral of B_i p over the domain.
inline Eigen::VectorXd assemble_load(const Discretization& disc, const std::function<double(const Vec2&)>& load) {
    const WebBasis& basis = *disc.basis;
    Eigen::VectorXd plain = Eigen::VectorXd::Zero(basis.relevant_size());
    detail::WeightedLocal wl;
    for (const auto& cr : disc.rules)
        for (std::size_t q = 0; q < cr.rule.size(); ++q) {
            const double pv = load(cr.rule.nodes[q]);
            if (pv == 0.0) continue;
            wl.eval(basis, cr.rule.nodes[q], cr.cell);
            for (int k = 0; k < wl.ls.count; ++k) plain[wl.ls.ids[k]] += cr.rule.weights[q] * pv * wl.w[k].v;
        }
    return basis.extension_matrix() * plain;
}

inline Eigen::VectorXd assemble_load(const Discretization& disc, double p0) {
    return assemble_load(disc, [p0](const Vec2&) { return p0; });
}

/// Geometric stiffness: plate membrane work plus stiffener shortening work.
/// Compressive stress and positive Ts make the form negative.
inline SparseSym assemble_geometric(const Discretization& disc, const StressField& stress,
                                    const std::vector<Stiffener>& stiffeners = {}) {
    const WebBasis& basis = *disc.basis;
    detail::StencilAssembler acc(basis);
    std::vector<double> gx(kMaxDegree * kMaxDegree * 4), gy(gx.size());
    detail::assemble_area(disc, acc, [&](const Vec2& x, double wq, const detail::WeightedLocal& wl, std::vector<double>& local, int n) {
        const StressState s = stress(x);
        for (int a = 0; a < n; ++a) {
            const Jet& u = wl.w[a];
            gx[a] = wq * (s.xx * u.dx + s.xy * u.dy);
            gy[a] = wq * (s.xy * u.dx + s.yy * u.dy);
        }
        for (int a = 0; a < n; ++a) {
            double* row = &local[static_cast<std::size_t>(a) * n];
            for (int b = a; b < n; ++b) row[b] += gx[a] * wl.w[b].dx + gy[a] * wl.w[b].dy;
        }
    });
    for (const auto& s : stiffeners) {
        s.validate(basis.domain());
        if (s.Ts == 0.0) continue;
        const SegmentRule rule = segment_rule(s.a, s.b, basis.grid(), disc.order);
        detail::assemble_line(basis, rule, acc, [&](const Vec2& t, double wq, const detail::WeightedLocal& wl,
                                                    std::vector<double>& local, int n) {
            const Vec2 z(-t.y(), t.x());
            for (int a = 0; a < n; ++a) {
                const double ua = wl.w[a].along(t), uaz = wl.w[a].second(t, z);
                for (int b = a; b < n; ++b) {
                    const double ub = wl.w[b].along(t), ubz = wl.w[b].second(t, z);
                    const double form = ua * ub + s.r0 * s.r0 * uaz * ubz - s.zeta0 * (ua * ubz + uaz * ub);
                    local[static_cast<std::size_t>(a) * n + b] -= wq * s.Ts * form;
                }
            }
        });
    }
    return detail::reduce(basis, acc.matrix());
}

struct DiscreteSystem {
    std::shared_ptr<const WebBasis> basis;
    SparseSym A;
    SparseSym B;
    Eigen::VectorXd b;
};

struct BendingSolution {
    Eigen::VectorXd w;
    double residual = 0.0;
    double backward_error = 0.0;  // |Ax - b| / (max|A_ij| |x| + |b|)
    WebField field;
};

inline BendingSolution solve_bending(const DiscreteSystem& sys) {
    std::unique_ptr<Factorization> f;
    try {
        f = std::make_unique<Factorization>(sys.A);
    } catch (const Error& e) {
        throw Error(std::string("stiffness matrix singular (check boundary conditions): ") + e.what());
    }
    BendingSolution s;
    s.w = f->solve(sys.b);
    s.residual = f->relative_residual(s.w, sys.b);
    // stiff beams on fine grids push |A||x|/|b| far up; judge the solve by its backward error there
    const double anorm = sys.A.matrix().coeffs().cwiseAbs().maxCoeff();
    s.backward_error = s.residual * sys.b.norm() / (anorm * s.w.norm() + sys.b.norm());
    if (s.residual > 1e-10 && s.backward_error > 1e-14)
        throw Error("bending solve residual " + std::to_string(s.residual) + " exceeds 1e-10");
    if (sys.basis) s.field = WebField(sys.basis, s.w);
    return s;
}

struct BucklingSolution {
    double lambda = 0.0;
    Eigen::VectorXd mode;
    double residual = 0.0;
    Eigen::VectorXd higher;  // further load factors, ascending, if requested
    WebField field;
};

/// Smallest lambda > 0 with A w = lambda (-B) w.
inline BucklingSolution solve_buckling(const DiscreteSystem& sys, int count = 1) {
    const int n = sys.A.size();
    detail::check_dense_size(n);
    const Eigen::MatrixXd A = sys.A.dense();
    const Eigen::MatrixXd G = -sys.B.dense();
    const EigenPairs ep = largest_generalized(A, G, count);
    const double scale = G.cwiseAbs().maxCoeff() / std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    if (ep.values.size() == 0 || !(ep.values[0] > 1e-14 * scale))
        throw Error("loading produces no buckling (tension-dominated)");
    BucklingSolution s;
    s.lambda = 1.0 / ep.values[0];
    Eigen::VectorXd w = ep.vectors.col(0);
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    w /= w[imax];
    s.mode = w;
    const Eigen::VectorXd aw = A * w;
    s.residual = (aw - s.lambda * (G * w)).norm() / aw.norm();
    std::vector<double> more;
    for (int k = 1; k < ep.values.size(); ++k)
        if (ep.values[k] > 1e-14 * scale) more.push_back(1.0 / ep.values[k]);
    s.higher = Eigen::Map<Eigen::VectorXd>(more.data(), static_cast<Eigen::Index>(more.size()));
    if (sys.basis) s.field = WebField(sys.basis, s.mode);
    return s;
}

}  // namespace webplate
