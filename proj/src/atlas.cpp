#include "lcks/atlas.hpp"

#include <cmath>

namespace lcks {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

bool SectorBounds::contains(double x, double y) const {
    double r = std::hypot(x, y);
    if (r < r_lo || r > r_hi) return false;
    double w = std::atan2(y, x);
    double m = std::round((0.5 * (phi_lo + phi_hi) - w) / kTwoPi);
    double rep = w + kTwoPi * m;
    return rep >= phi_lo && rep <= phi_hi;
}

bool ChartPatch::contains_base_point(std::span<const double> q) const {
    if (sector) {
        if (q.size() < 2) return false;
        return sector->contains(q[0], q[1]);
    }
    if (box) return box->contains(q);
    return true;
}

CocycleReport cocycle_defect(const Atlas& atlas, const Domain& base_domain, int budget, std::uint64_t seed,
                             double neighbor_radius) {
    Rng rng(seed);
    struct Sample {
        Eigen::VectorXd q;
        std::vector<int> in;          // patch indices containing q
        std::vector<double> sigma;    // aligned with `in`
    };
    std::vector<Sample> samples;
    samples.reserve(budget);
    int covered = 0;
    for (int s = 0; s < budget; ++s) {
        Sample smp;
        smp.q = sample_point(base_domain, rng);
        for (std::size_t p = 0; p < atlas.patches.size(); ++p) {
            const auto& patch = atlas.patches[p];
            if (!patch.contains_base_point(as_span(smp.q))) continue;
            smp.in.push_back(static_cast<int>(p));
            smp.sigma.push_back(patch.sigma.at(as_span(smp.q)));
        }
        if (!smp.in.empty()) {
            ++covered;
            samples.push_back(std::move(smp));
        }
    }

    CocycleReport rep;
    rep.total_samples = budget;
    rep.covered_samples = covered;

    for (const auto& smp : samples) {
        const int m = static_cast<int>(smp.in.size());
        if (m >= 2) ++rep.pair_samples;
        if (m < 3) continue;
        ++rep.triple_samples;
        for (int a = 0; a < m; ++a)
            for (int bI = 0; bI < m; ++bI)
                for (int d = 0; d < m; ++d) {
                    if (a == bI || bI == d || a == d) continue;
                    double lam_db = std::exp(smp.sigma[bI] - smp.sigma[d]);
                    double lam_ba = std::exp(smp.sigma[a] - smp.sigma[bI]);
                    double lam_da = std::exp(smp.sigma[a] - smp.sigma[d]);
                    rep.cocycle_defect = std::max(rep.cocycle_defect, std::abs(lam_db * lam_ba - lam_da));
                }
    }
    if (atlas.patches.size() >= 3 && rep.triple_samples == 0) throw EmptyOverlap();

    // transitions of a consistent atlas are locally constant on overlaps
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            if ((samples[i].q - samples[j].q).norm() > neighbor_radius) continue;
            for (std::size_t a = 0; a < samples[i].in.size(); ++a)
                for (std::size_t c = 0; c < samples[i].in.size(); ++c) {
                    if (a == c) continue;
                    auto find = [&](int patch, const Sample& s) -> const double* {
                        for (std::size_t t = 0; t < s.in.size(); ++t)
                            if (s.in[t] == patch) return &s.sigma[t];
                        return nullptr;
                    };
                    const double* sa = find(samples[i].in[a], samples[j]);
                    const double* sc = find(samples[i].in[c], samples[j]);
                    if (!sa || !sc) continue;
                    double log_i = samples[i].sigma[a] - samples[i].sigma[c];
                    double log_j = *sa - *sc;
                    rep.constancy_defect = std::max(rep.constancy_defect, std::abs(log_i - log_j));
                }
        }
    }
    return rep;
}

double patch_exactness(const FormField& vartheta, const ChartPatch& patch,
                       const std::vector<Eigen::VectorXd>& base_points) {
    FormField dsigma = exterior_derivative(FormField::scalar(vartheta.dim(), patch.sigma));
    double worst = 0.0;
    for (const auto& q : base_points) {
        if (!patch.contains_base_point(as_span(q))) continue;
        worst = std::max(worst, (vartheta.covector(as_span(q)) - dsigma.covector(as_span(q)))
                                    .lpNorm<Eigen::Infinity>());
    }
    return worst;
}

Localization localize(const PhaseBundle& b, const Coeff& H, const ChartPatch& patch,
                      const std::vector<Eigen::VectorXd>& phase_points, double tol) {
    std::vector<Eigen::VectorXd> base_points;
    base_points.reserve(phase_points.size());
    for (const auto& z : phase_points) base_points.push_back(z.head(b.n));
    double exact = patch_exactness(b.vartheta, patch, base_points);
    if (exact > tol) throw NotExactOnPatch(exact);

    Localization loc;
    Coeff sigma_phase = b.promote(patch.sigma);
    loc.omega_alpha = conformal_rescale(b, sigma_phase);
    loc.H_alpha = coeff_neg_exp(sigma_phase) * H;

    for (const auto& w : loc.omega_alpha) {
        FormField dw = exterior_derivative(w);
        for (const auto& z : phase_points)
            loc.closedness_residual = std::max(loc.closedness_residual, dw.at(as_span(z)).norm_inf());
    }
    return loc;
}

namespace {

Eigen::MatrixXd assemble_flat_forms(const std::vector<FormField>& omegas, std::span<const double> z) {
    const int N = omegas.empty() ? 0 : omegas[0].dim();
    const int K = static_cast<int>(omegas.size());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, K * N);
    for (int kappa = 0; kappa < K; ++kappa)
        for (const auto& [idx, c] : omegas[kappa].coefficients()) {
            double v = c(z);
            B(idx[1], kappa * N + idx[0]) += v;
            B(idx[0], kappa * N + idx[1]) -= v;
        }
    return B;
}

}  // namespace

double glue_invariance(const PhaseBundle& b, const Coeff& H, const ChartPatch& patch,
                       const std::vector<Eigen::VectorXd>& phase_points, Gauge gauge, double tol) {
    Localization loc = localize(b, H, patch, phase_points, tol);
    FormField dH_alpha = exterior_derivative(FormField::scalar(b.N, loc.H_alpha));
    FormField dthetaH = d_theta_hamiltonian(b, H);

    // The local system is the global one scaled by e^{-sigma}, so any gauge
    // defined through the solution set picks the same representative.  The
    // Darboux pattern is not available for the rescaled local forms; the
    // comparison always uses the minimum-norm representative.
    (void)gauge;

    double worst = 0.0;
    for (const auto& z : phase_points) {
        FlatMatrix f = assemble_flat(b, as_span(z));
        Eigen::VectorXd x_global = min_norm_solve(f.B, dthetaH.covector(as_span(z)));
        Eigen::MatrixXd B = assemble_flat_forms(loc.omega_alpha, as_span(z));
        Eigen::VectorXd x_local = min_norm_solve(B, dH_alpha.covector(as_span(z)));
        worst = std::max(worst, (x_global - x_local).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

ChartMap cotangent_lift(const ChartMap& base_map, int k) {
    const int n = base_map.src_dim();
    if (base_map.dst_dim() != n) throw DimensionMismatch(n, base_map.dst_dim());
    if (n > 3) throw Error("cotangent_lift supports base dimension up to 3");

    std::vector<std::vector<Coeff>> J(n, std::vector<Coeff>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) J[r][c] = base_map.components()[r].derivative(c);

    Coeff det;
    std::vector<std::vector<Coeff>> cof(n, std::vector<Coeff>(n));
    if (n == 1) {
        det = J[0][0];
        cof[0][0] = Coeff::constant(1.0);
    } else if (n == 2) {
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        cof[0][0] = J[1][1];
        cof[0][1] = J[1][0].scaled(-1.0);
        cof[1][0] = J[0][1].scaled(-1.0);
        cof[1][1] = J[0][0];
    } else {
        auto minor = [&](int r, int c) {
            int r0 = (r + 1) % 3, r1 = (r + 2) % 3, c0 = (c + 1) % 3, c1 = (c + 2) % 3;
            if (r0 > r1) std::swap(r0, r1);
            if (c0 > c1) std::swap(c0, c1);
            return J[r0][c0] * J[r1][c1] - J[r0][c1] * J[r1][c0];
        };
        det = J[0][0] * minor(0, 0) - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
              J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cof[r][c] = minor(r, c).scaled(((r + c) % 2 == 0) ? 1.0 : -1.0);
    }

    const int N = n + n * k;
    // base-chart functions become phase-chart functions of the first n coords
    std::vector<Coeff> base_coords;
    for (int i = 0; i < n; ++i) base_coords.push_back(Coeff::coordinate(i));
    auto promote = [&](const Coeff& c) { return Coeff::compose(c, base_coords); };

    std::vector<Coeff> comps;
    comps.reserve(N);
    for (int i = 0; i < n; ++i) comps.push_back(promote(base_map.components()[i]));
    Coeff det_phase = promote(det);
    for (int kappa = 0; kappa < k; ++kappa)
        for (int i = 0; i < n; ++i) {
            Coeff num;
            for (int j = 0; j < n; ++j)
                num = num + promote(cof[i][j]) * Coeff::coordinate(n + kappa * n + j);
            comps.push_back(coeff_div(num, det_phase));
        }
    return ChartMap(N, N, std::move(comps));
}

double cross_coordinate_match(const PhaseBundle& src, const Coeff& H_src, const PhaseBundle& dst,
                              const Coeff& H_dst, const ChartMap& phase_map,
                              const std::vector<Eigen::VectorXd>& src_points, Gauge gauge) {
    double worst = 0.0;
    for (const auto& z : src_points) {
        Eigen::VectorXd zc = phase_map(as_span(z));
        if (!dst.phase_domain.contains(as_span(zc))) continue;
        Eigen::MatrixXd Xs = solve_hdw(src, H_src, as_span(z), gauge).X;
        Eigen::MatrixXd Xd = solve_hdw(dst, H_dst, as_span(zc), gauge).X;
        Eigen::MatrixXd J = phase_map.jacobian(as_span(z));
        worst = std::max(worst, (J * Xs - Xd).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

}  // namespace lcks
