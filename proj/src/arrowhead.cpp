// Symmetric arrowhead eigensolver. The matrix
//
//     [ alpha  z^T     ]
//     [ z      diag(d) ]
//
// has eigenvalues at the roots of f(l) = l - alpha - sum_j z_j^2 / (l - d_j)
// and eigenvectors (1, z_j / (l - d_j)) up to normalization. Poles with a
// vanishing coupling and coincident poles are deflated first, after which the
// remaining roots strictly interlace the poles.

#include "ioxsim/bath_oracle.hpp"

#include "ioxsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace ioxsim::detail {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// A pole of the reduced problem: a unit combination of original poles.
struct ReducedPole {
    double d;
    double z;
    std::vector<std::pair<Eigen::Index, double>> combo;
};

struct Eigenpair {
    double value;
    Eigen::VectorXd components;   // head, then tracked poles
};

// Root of f in the open interval between two consecutive reduced poles (or
// a bound), computed in a variable shifted to the nearer pole.
struct SecularRoot {
    double origin;
    double tau;
};

class Secular {
public:
    Secular(double alpha, const std::vector<ReducedPole>& poles) : alpha_(alpha), poles_(poles) {}

    // f and f' at origin + tau, with pole offsets taken relative to origin
    std::pair<double, double> eval(double origin, double tau) const {
        double f = tau + (origin - alpha_);
        double df = 1.0;
        for (const ReducedPole& p : poles_) {
            const double gap = tau - (p.d - origin);
            const double w = p.z / gap;
            f -= p.z * w;
            df += w * w;
        }
        return {f, df};
    }

    SecularRoot solve(double lo, double hi, bool lo_is_pole, bool hi_is_pole) const {
        double origin = lo;
        if (lo_is_pole && hi_is_pole) {
            const double mid = 0.5 * (lo + hi);
            origin = eval(lo, mid - lo).first > 0.0 ? lo : hi;
        } else if (hi_is_pole) {
            origin = hi;
        }
        double a = lo - origin;
        double b = hi - origin;
        double tau = 0.5 * (a + b);
        for (int it = 0; it < 400; ++it) {
            const auto [f, df] = eval(origin, tau);
            if (f == 0.0) {
                break;
            }
            (f > 0.0 ? b : a) = tau;
            double next = tau - f / df;
            if (!(next > a && next < b)) {
                next = 0.5 * (a + b);
            }
            const double tol = 2.0 * kEps * std::max(std::abs(tau), std::abs(next));
            if (std::abs(next - tau) <= tol || (b - a) <= 2.0 * kEps * std::max(std::abs(a), std::abs(b))) {
                tau = next;
                break;
            }
            tau = next;
        }
        return {origin, tau};
    }

private:
    double alpha_;
    const std::vector<ReducedPole>& poles_;
};

}  // namespace

ArrowheadResult arrowhead_eigen(double alpha, const Eigen::VectorXd& z, const Eigen::VectorXd& d,
                                std::span<const Eigen::Index> tracked) {
    const Eigen::Index n = d.size();
    if (z.size() != n) {
        throw DomainError("arrowhead_eigen: z and d differ in length");
    }
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(tracked.size());
    // position of each original pole in the tracked list, -1 if untracked
    std::vector<Eigen::Index> track_row(static_cast<std::size_t>(n), -1);
    for (std::size_t r = 0; r < tracked.size(); ++r) {
        if (tracked[r] < 0 || tracked[r] >= n) {
            throw DomainError("arrowhead_eigen: tracked index out of range");
        }
        track_row[static_cast<std::size_t>(tracked[r])] = 1 + static_cast<Eigen::Index>(r);
    }

    const double scale = std::max({std::abs(alpha), n > 0 ? d.cwiseAbs().maxCoeff() : 0.0, z.norm(), 1e-300});
    const double tol = 8.0 * kEps * scale;

    std::vector<Eigenpair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) + 1);
    auto combo_components = [&](const std::vector<std::pair<Eigen::Index, double>>& combo, double weight,
                                Eigen::VectorXd& comp) {
        for (const auto& [idx, coeff] : combo) {
            const Eigen::Index r = track_row[static_cast<std::size_t>(idx)];
            if (r > 0) {
                comp(r) += weight * coeff;
            }
        }
    };

    // decoupled poles are eigenvectors on their own
    std::vector<ReducedPole> poles;
    poles.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(z(i)) <= tol) {
            Eigen::VectorXd comp = Eigen::VectorXd::Zero(rows);
            if (track_row[static_cast<std::size_t>(i)] > 0) {
                comp(track_row[static_cast<std::size_t>(i)]) = 1.0;
            }
            pairs.push_back({d(i), std::move(comp)});
        } else {
            poles.push_back({d(i), z(i), {{i, 1.0}}});
        }
    }
    std::sort(poles.begin(), poles.end(), [](const ReducedPole& a, const ReducedPole& b) { return a.d < b.d; });

    // coincident poles: rotate so that one combination decouples
    std::vector<ReducedPole> merged;
    merged.reserve(poles.size());
    for (ReducedPole& p : poles) {
        if (!merged.empty() && p.d - merged.back().d <= tol) {
            ReducedPole& q = merged.back();
            const double r = std::hypot(q.z, p.z);
            const double cq = q.z / r;
            const double cp = p.z / r;
            // (cp q - cq p) has eigenvalue q.d; (cq q + cp p) keeps the coupling r
            Eigen::VectorXd comp = Eigen::VectorXd::Zero(rows);
            combo_components(q.combo, cp, comp);
            combo_components(p.combo, -cq, comp);
            pairs.push_back({q.d, std::move(comp)});
            std::vector<std::pair<Eigen::Index, double>> combo;
            for (const auto& [idx, c] : q.combo) {
                combo.emplace_back(idx, cq * c);
            }
            for (const auto& [idx, c] : p.combo) {
                combo.emplace_back(idx, cp * c);
            }
            q.z = r;
            q.combo = std::move(combo);
        } else {
            merged.push_back(std::move(p));
        }
    }

    const Secular secular(alpha, merged);
    const std::size_t k = merged.size();
    if (k == 0) {
        Eigen::VectorXd comp = Eigen::VectorXd::Zero(rows);
        comp(0) = 1.0;
        pairs.push_back({alpha, std::move(comp)});
    } else {
        const double znorm = std::sqrt(std::accumulate(merged.begin(), merged.end(), 0.0,
                                                       [](double s, const ReducedPole& p) { return s + p.z * p.z; }));
        const double lower_bound = std::min(alpha, merged.front().d) - znorm - tol;
        const double upper_bound = std::max(alpha, merged.back().d) + znorm + tol;
        for (std::size_t i = 0; i <= k; ++i) {
            const double lo = i == 0 ? lower_bound : merged[i - 1].d;
            const double hi = i == k ? upper_bound : merged[i].d;
            const SecularRoot root = secular.solve(lo, hi, i > 0, i < k);

            // eigenvector (1, z_j / (l - d_j)) in the shifted variable
            Eigen::VectorXd comp = Eigen::VectorXd::Zero(rows);
            double norm2 = 1.0;
            std::vector<double> v(k);
            for (std::size_t j = 0; j < k; ++j) {
                v[j] = merged[j].z / (root.tau - (merged[j].d - root.origin));
                norm2 += v[j] * v[j];
            }
            const double inv = 1.0 / std::sqrt(norm2);
            comp(0) = inv;
            if (rows > 1) {
                for (std::size_t j = 0; j < k; ++j) {
                    combo_components(merged[j].combo, v[j] * inv, comp);
                }
            }
            pairs.push_back({root.origin + root.tau, std::move(comp)});
        }
    }

    std::sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
    ArrowheadResult out;
    out.values.resize(static_cast<Eigen::Index>(pairs.size()));
    out.components.resize(rows, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out.values(static_cast<Eigen::Index>(i)) = pairs[i].value;
        out.components.col(static_cast<Eigen::Index>(i)) = pairs[i].components;
    }
    return out;
}

}  // namespace ioxsim::detail
