#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lcks/errors.hpp"

namespace lcks {

// Deterministic uniform sampler.  The mapping from engine output to doubles
// is spelled out here so reports are reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  private:
    std::mt19937_64 gen_;
};

// Coordinate-box chart domain, optionally punctured near the origin of the
// first `puncture_dims` coordinates and capped on the trailing block norm.
struct Domain {
    Eigen::VectorXd lo, hi;
    int puncture_dims = 0;
    double puncture_radius = 0.0;
    int ball_start = -1;  // if >= 0: ||z[ball_start..]|| <= ball_radius
    double ball_radius = 0.0;

    int dim() const { return static_cast<int>(lo.size()); }

    static Domain box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) { return Domain{lo, hi}; }

    bool contains(std::span<const double> z) const {
        if (static_cast<int>(z.size()) != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (!(z[i] >= lo[i] && z[i] <= hi[i])) return false;
        if (puncture_dims > 0) {
            double r2 = 0.0;
            for (int i = 0; i < puncture_dims; ++i) r2 += z[i] * z[i];
            if (r2 < puncture_radius * puncture_radius) return false;
        }
        if (ball_start >= 0) {
            double r2 = 0.0;
            for (int i = ball_start; i < dim(); ++i) r2 += z[i] * z[i];
            if (r2 > ball_radius * ball_radius) return false;
        }
        return true;
    }
};

inline Eigen::VectorXd sample_point(const Domain& d, Rng& rng, int max_tries = 10000) {
    Eigen::VectorXd z(d.dim());
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        for (int i = 0; i < d.dim(); ++i) z(i) = rng.uniform(d.lo[i], d.hi[i]);
        if (d.contains({z.data(), static_cast<std::size_t>(z.size())})) return z;
    }
    throw Error("domain rejection sampling failed (domain too thin?)");
}

inline std::vector<Eigen::VectorXd> sample_points(const Domain& d, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) pts.push_back(sample_point(d, rng));
    return pts;
}

}  // namespace lcks
