#include "lcks/hdw.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lcks {

namespace {

void place_block(const FormField& omega, std::span<const double> z, int block, Eigen::MatrixXd& B) {
    const int N = omega.dim();
    for (const auto& [idx, c] : omega.coefficients()) {
        double v = c(z);
        // W(a,b) = omega(e_a, e_b); (B_kappa x)_b = omega(x, e_b) => B_kappa = W^T
        B(idx[1], block * N + idx[0]) += v;
        B(idx[0], block * N + idx[1]) -= v;
    }
}

}  // namespace

FlatMatrix assemble_flat(const PhaseBundle& b, std::span<const double> z) {
    FlatMatrix f;
    f.B = Eigen::MatrixXd::Zero(b.N, b.k * b.N);
    f.z = Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
    for (int kappa = 0; kappa < b.k; ++kappa) place_block(b.OmegaTheta[kappa], z, kappa, f.B);
    return f;
}

FormField d_theta_hamiltonian(const PhaseBundle& b, const Coeff& H) {
    return lichnerowicz_derivative(FormField::scalar(b.N, H), b.theta);
}

HdwSolution solve_hdw(const PhaseBundle& b, const Coeff& H, std::span<const double> z, Gauge gauge,
                      double tol) {
    FlatMatrix f = assemble_flat(b, z);
    Eigen::VectorXd rhs = d_theta_hamiltonian(b, H).covector(z);

    Eigen::VectorXd x;
    if (gauge == Gauge::MinNorm) {
        x = min_norm_solve(f.B, rhs);
    } else {
        x = Eigen::VectorXd::Zero(b.k * b.N);
        // base components are gauge independent: (X_kappa)^i = dH/dp^kappa_i
        std::vector<D1> dz(z.size());
        std::vector<Eigen::VectorXd> base(b.k, Eigen::VectorXd::Zero(b.N));
        for (int kappa = 0; kappa < b.k; ++kappa) {
            for (int i = 0; i < b.n; ++i) {
                int pi = b.momentum_index(kappa, i);
                for (std::size_t s = 0; s < z.size(); ++s)
                    dz[s] = D1(z[s], static_cast<int>(s) == pi ? 1.0 : 0.0);
                base[kappa](i) = H(std::span<const D1>(dz)).b;
                x(kappa * b.N + i) = base[kappa](i);
            }
        }
        // remaining trace constraint: sum_kappa (X_kappa)^kappa_i picks up what
        // the base part leaves over, distributed equally over kappa
        Eigen::VectorXd E = -rhs;
        for (int kappa = 0; kappa < b.k; ++kappa) {
            PointForm contr = interior_product(base[kappa], b.OmegaTheta[kappa], z);
            for (int a = 0; a < b.N; ++a) E(a) += contr.get({a});
        }
        for (int kappa = 0; kappa < b.k; ++kappa)
            for (int i = 0; i < b.n; ++i)
                x(kappa * b.N + b.momentum_index(kappa, i)) = E(i) / b.k;
    }

    HdwSolution sol;
    sol.residual = (f.B * x - rhs).lpNorm<Eigen::Infinity>();
    if (sol.residual > tol) throw OutOfRange(sol.residual);
    sol.X = Eigen::MatrixXd(b.N, b.k);
    for (int kappa = 0; kappa < b.k; ++kappa) sol.X.col(kappa) = x.segment(kappa * b.N, b.N);
    return sol;
}

namespace {

template <class T>
std::vector<T> to_dual_point(std::span<const double> z, std::span<const double> dir);

template <>
std::vector<D1> to_dual_point<D1>(std::span<const double> z, std::span<const double> dir) {
    std::vector<D1> dz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) dz[i] = D1(z[i], dir[i]);
    return dz;
}

// minimum-norm gauge with exact directional derivatives through the solve
class MinNormHdwField : public KVectorField {
  public:
    MinNormHdwField(const PhaseBundle& b, Coeff H)
        : KVectorField(b.k, b.N), bundle_(&b), H_(std::move(H)), dthetaH_(d_theta_hamiltonian(b, H_)) {}

    Eigen::MatrixXd value(std::span<const double> z) const override {
        FlatMatrix f = assemble_flat(*bundle_, z);
        Eigen::VectorXd x = min_norm_solve(f.B, dthetaH_.covector(z));
        Eigen::MatrixXd out(dim(), k());
        for (int kappa = 0; kappa < k(); ++kappa) out.col(kappa) = x.segment(kappa * dim(), dim());
        return out;
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> value_and_dir(std::span<const double> z,
                                                              std::span<const double> dir) const override {
        auto dz = to_dual_point<D1>(z, dir);
        auto x = solve_T<D1>(dz);
        Eigen::MatrixXd v(dim(), k()), d(dim(), k());
        for (int kappa = 0; kappa < k(); ++kappa)
            for (int i = 0; i < dim(); ++i) {
                v(i, kappa) = x[kappa * dim() + i].a;
                d(i, kappa) = x[kappa * dim() + i].b;
            }
        return {v, d};
    }

  private:
    template <class T>
    std::vector<T> solve_T(std::span<const T> z) const {
        const int N = dim(), K = k();
        std::vector<std::vector<T>> B(N, std::vector<T>(K * N, T(0.0)));
        for (int kappa = 0; kappa < K; ++kappa)
            for (const auto& [idx, c] : bundle_->OmegaTheta[kappa].coefficients()) {
                T v = c(z);
                B[idx[1]][kappa * N + idx[0]] = B[idx[1]][kappa * N + idx[0]] + v;
                B[idx[0]][kappa * N + idx[1]] = B[idx[0]][kappa * N + idx[1]] - v;
            }
        std::vector<T> rhs(N, T(0.0));
        for (const auto& [idx, c] : dthetaH_.coefficients()) rhs[idx[0]] = c(z);
        return min_norm_normal_equations(B, rhs);
    }

    const PhaseBundle* bundle_;
    Coeff H_;
    FormField dthetaH_;
};

}  // namespace

std::shared_ptr<KVectorField> hdw_field(const PhaseBundle& b, const Coeff& H, Gauge gauge) {
    if (gauge == Gauge::MinNorm) return std::make_shared<MinNormHdwField>(b, H);

    FormField dthetaH = d_theta_hamiltonian(b, H);
    std::vector<std::vector<Coeff>> comps(b.k, std::vector<Coeff>(b.N));
    std::vector<std::vector<Coeff>> base(b.k, std::vector<Coeff>(b.N));
    for (int kappa = 0; kappa < b.k; ++kappa)
        for (int i = 0; i < b.n; ++i) {
            base[kappa][i] = H.derivative(b.momentum_index(kappa, i));
            comps[kappa][i] = base[kappa][i];
        }
    FormField E = scalar_multiply(Coeff::constant(-1.0), dthetaH);
    for (int kappa = 0; kappa < b.k; ++kappa)
        E = add(E, interior_product_field(base[kappa], b.OmegaTheta[kappa]));
    for (int kappa = 0; kappa < b.k; ++kappa)
        for (int i = 0; i < b.n; ++i)
            comps[kappa][b.momentum_index(kappa, i)] = E.get({i}).scaled(1.0 / b.k);
    return std::make_shared<AnalyticKVectorField>(b.N, std::move(comps));
}

Eigen::MatrixXd kernel_basis(const PhaseBundle& b, std::span<const double> z) {
    return kernel_basis_of(assemble_flat(b, z).B);
}

double integrability_defect(const KVectorField& X, std::span<const double> z) {
    if (X.k() < 2) return 0.0;
    Eigen::MatrixXd v = X.value(z);
    std::vector<Eigen::MatrixXd> dirs(X.k());
    for (int kappa = 0; kappa < X.k(); ++kappa) {
        Eigen::VectorXd col = v.col(kappa);
        dirs[kappa] = X.value_and_dir(z, as_span(col)).second;
    }
    double defect = 0.0;
    for (int kappa = 0; kappa < X.k(); ++kappa)
        for (int lambda = kappa + 1; lambda < X.k(); ++lambda) {
            Eigen::VectorXd bracket = dirs[kappa].col(lambda) - dirs[lambda].col(kappa);
            defect = std::max(defect, bracket.lpNorm<Eigen::Infinity>());
        }
    return defect;
}

std::size_t MultiTimeGrid::flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < k; ++a) f = f * shape[a] + idx[a];
    return f;
}

bool MultiTimeGrid::valid_at(const std::vector<int>& idx) const {
    return values[flat_index(idx)].size() != 0;
}

const Eigen::VectorXd& MultiTimeGrid::at(const std::vector<int>& idx) const {
    return values[flat_index(idx)];
}

std::vector<double> MultiTimeGrid::time_of(const std::vector<int>& idx) const {
    std::vector<double> t(k);
    for (int a = 0; a < k; ++a) t[a] = idx[a] * sizes[a];
    return t;
}

namespace {

// The line state is carried in extended precision so the accumulation floor
// stays well below the h^4 truncation error at desk-scale step sizes.
using VectorLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

VectorLd rk4_step(const KVectorField& X, int axis, const VectorLd& y, double h) {
    auto f = [&](const VectorLd& p) -> VectorLd {
        Eigen::VectorXd pd = p.cast<double>();
        return X.value(as_span(pd)).col(axis).cast<long double>();
    };
    const long double hl = h;
    VectorLd k1 = f(y);
    VectorLd k2 = f(y + (hl / 2) * k1);
    VectorLd k3 = f(y + (hl / 2) * k2);
    VectorLd k4 = f(y + hl * k3);
    return y + (hl / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// tangent along one axis by a centered stencil; when the axis is long enough
// for the five-point stencil, anything narrower does not count as interior
bool grid_tangent(const MultiTimeGrid& g, const std::vector<int>& idx, int axis, Eigen::VectorXd& out) {
    auto shifted = [&](int offset) {
        std::vector<int> j = idx;
        j[axis] += offset;
        return j;
    };
    auto in_range_valid = [&](int offset) {
        int v = idx[axis] + offset;
        if (v < 0 || v >= g.shape[axis]) return false;
        return g.valid_at(shifted(offset));
    };
    double h = g.sizes[axis];
    if (g.shape[axis] >= 5) {
        if (!(in_range_valid(-2) && in_range_valid(-1) && in_range_valid(1) && in_range_valid(2)))
            return false;
        out = (g.at(shifted(-2)) - 8.0 * g.at(shifted(-1)) + 8.0 * g.at(shifted(1)) - g.at(shifted(2))) /
              (12.0 * h);
        return true;
    }
    if (in_range_valid(-1) && in_range_valid(1)) {
        out = (g.at(shifted(1)) - g.at(shifted(-1))) / (2.0 * h);
        return true;
    }
    return false;
}

template <class Fn>
void for_each_index(const std::vector<int>& shape, Fn&& fn) {
    std::vector<int> idx(shape.size(), 0);
    while (true) {
        const std::vector<int>& view = idx;
        fn(view);
        int a = static_cast<int>(shape.size()) - 1;
        while (a >= 0) {
            if (++idx[a] < shape[a]) break;
            idx[a] = 0;
            --a;
        }
        if (a < 0) return;
    }
}

}  // namespace

MultiTimeGrid integrate_section(const KVectorField& X, std::span<const double> start, const GridSpec& spec,
                                const Domain& domain) {
    const int k = X.k();
    if (static_cast<int>(spec.steps.size()) != k || static_cast<int>(spec.sizes.size()) != k)
        throw DimensionMismatch(k, static_cast<int>(spec.steps.size()));
    std::vector<int> order = spec.order;
    if (order.empty())
        for (int a = 0; a < k; ++a) order.push_back(a);
    if (static_cast<int>(order.size()) != k) throw DimensionMismatch(k, static_cast<int>(order.size()));

    MultiTimeGrid g;
    g.k = k;
    g.dim = X.dim();
    g.sizes = spec.sizes;
    g.shape.resize(k);
    std::size_t total = 1;
    for (int a = 0; a < k; ++a) {
        if (spec.steps[a] < 1 || spec.sizes[a] <= 0.0) throw Error("grid steps and sizes must be positive");
        g.shape[a] = spec.steps[a] + 1;
        total *= g.shape[a];
    }
    g.values.assign(total, Eigen::VectorXd());
    g.start = Eigen::Map<const Eigen::VectorXd>(start.data(), start.size());

    if (!domain.contains(start)) {
        g.escape_index = std::vector<int>(k, 0);
        return g;
    }
    g.values[g.flat_index(std::vector<int>(k, 0))] = g.start;

    bool escaped = false;
    for (int d = 0; d < k && !escaped; ++d) {
        int axis = order[d];
        // enumerate the sub-block spanned by the axes already swept
        std::vector<int> sub_shape;
        for (int e = 0; e < d; ++e) sub_shape.push_back(g.shape[order[e]]);
        std::vector<int> idx(k, 0);
        bool stop = false;
        for_each_index(sub_shape, [&](const std::vector<int>& sub) {
            if (stop) return;
            std::fill(idx.begin(), idx.end(), 0);
            for (int e = 0; e < d; ++e) idx[order[e]] = sub[e];
            if (!g.valid_at(idx)) return;
            VectorLd y = g.at(idx).cast<long double>();
            std::vector<int> cur = idx;
            for (int j = 1; j < g.shape[axis]; ++j) {
                y = rk4_step(X, axis, y, g.sizes[axis]);
                cur[axis] = j;
                Eigen::VectorXd yd = y.cast<double>();
                if (!domain.contains(as_span(yd))) {
                    g.escape_index = cur;
                    stop = true;
                    return;
                }
                g.values[g.flat_index(cur)] = std::move(yd);
            }
        });
        escaped = stop;
    }
    return g;
}

double grid_hdw_residual(const MultiTimeGrid& g, const KVectorField& X) {
    double worst = 0.0;
    Eigen::VectorXd tangent;
    for_each_index(g.shape, [&](const std::vector<int>& idx) {
        if (!g.valid_at(idx)) return;
        const Eigen::VectorXd& z = g.at(idx);
        Eigen::MatrixXd v;
        bool have_value = false;
        for (int a = 0; a < g.k; ++a) {
            if (!grid_tangent(g, idx, a, tangent)) continue;
            if (!have_value) {
                v = X.value(as_span(z));
                have_value = true;
            }
            worst = std::max(worst, (tangent - v.col(a)).lpNorm<Eigen::Infinity>());
        }
    });
    return worst;
}

double grid_flat_residual(const MultiTimeGrid& g, const PhaseBundle& b, const Coeff& H,
                          int* measured_points) {
    FormField dthetaH = d_theta_hamiltonian(b, H);
    double worst = 0.0;
    int measured = 0;
    Eigen::VectorXd tangent;
    Eigen::VectorXd stacked(b.k * b.N);
    for_each_index(g.shape, [&](const std::vector<int>& idx) {
        if (!g.valid_at(idx)) return;
        for (int a = 0; a < g.k; ++a) {
            if (!grid_tangent(g, idx, a, tangent)) return;
            stacked.segment(a * b.N, b.N) = tangent;
        }
        const Eigen::VectorXd& z = g.at(idx);
        FlatMatrix f = assemble_flat(b, as_span(z));
        Eigen::VectorXd rhs = dthetaH.covector(as_span(z));
        worst = std::max(worst, (f.B * stacked - rhs).lpNorm<Eigen::Infinity>());
        ++measured;
    });
    if (measured_points) *measured_points = measured;
    return worst;
}

double path_independence_defect(const KVectorField& X, std::span<const double> start, const GridSpec& spec,
                                const Domain& domain) {
    GridSpec reversed = spec;
    if (reversed.order.empty())
        for (int a = 0; a < X.k(); ++a) reversed.order.push_back(a);
    std::reverse(reversed.order.begin(), reversed.order.end());
    MultiTimeGrid g1 = integrate_section(X, start, spec, domain);
    MultiTimeGrid g2 = integrate_section(X, start, reversed, domain);
    double worst = 0.0;
    for_each_index(g1.shape, [&](const std::vector<int>& idx) {
        if (!g1.valid_at(idx) || !g2.valid_at(idx)) return;
        worst = std::max(worst, (g1.at(idx) - g2.at(idx)).lpNorm<Eigen::Infinity>());
    });
    return worst;
}

void write_grid_csv(const MultiTimeGrid& g, const std::vector<std::string>& coord_names,
                    std::ostream& out) {
    for (int a = 1; a <= g.k; ++a) out << "t" << a << ",";
    for (std::size_t i = 0; i < coord_names.size(); ++i) {
        out << coord_names[i];
        out << (i + 1 < coord_names.size() ? ',' : '\n');
    }
    char buf[40];
    for_each_index(g.shape, [&](const std::vector<int>& idx) {
        if (!g.valid_at(idx)) return;
        auto t = g.time_of(idx);
        for (double v : t) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ',';
        }
        const Eigen::VectorXd& z = g.at(idx);
        for (int i = 0; i < z.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", z(i));
            out << buf << (i + 1 < z.size() ? ',' : '\n');
        }
    });
}

}  // namespace lcks
