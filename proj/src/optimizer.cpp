#include "qgpr/optimizer.hpp"

#include "qgpr/gp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace qgpr {
namespace {

constexpr std::array<unsigned, 40> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29,  31,  37,  41,  43,
                                           47, 53, 59, 61, 67, 71, 73, 79, 83, 89,  97,  101, 103, 107,
                                           109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173};

double radical_inverse(std::size_t index, unsigned base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

double matern52(double r) {
    const double a = std::sqrt(5.0) * r;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Zero-mean Matern-5/2 surrogate on unit-cube coordinates with standardized targets.
class Surrogate {
public:
    Surrogate(const std::vector<std::vector<double>>& pts, const std::vector<double>& vals) : pts_(pts) {
        const std::size_t n = pts.size();
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (double v : vals)
            if (v > kFailedObjective) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 0.0;
        }
        // Failed evaluations are pulled to just below the worst success.
        y_.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            y_[static_cast<Eigen::Index>(i)] = vals[i] > kFailedObjective ? vals[i] : lo - (hi - lo) - 1.0;
        mean_ = y_.mean();
        scale_ = std::sqrt((y_.array() - mean_).square().mean());
        if (!(scale_ > 0.0)) scale_ = 1.0;
        y_ = (y_.array() - mean_) / scale_;

        const std::size_t dims = pts.empty() ? 1 : pts.front().size();
        Matrix dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) dist(i, j) = distance(pts[i], pts[j]);

        const GPOptions opts{0.0, kNugget, 1e-2};
        double best = -std::numeric_limits<double>::infinity();
        for (double f : {0.03, 0.06, 0.1, 0.17, 0.3, 0.5, 0.8, 1.3, 2.0}) {
            const double ell = f * std::sqrt(static_cast<double>(dims));
            const Matrix K = dist.unaryExpr([ell](double d) { return matern52(d / ell); });
            try {
                const double ll = log_marginal_likelihood(K, y_, opts);
                if (ll > best) {
                    best = ll;
                    ell_ = ell;
                }
            } catch (const ComputeError&) {
            }
        }
        const Matrix K = dist.unaryExpr([this](double d) { return matern52(d / ell_); });
        Factorization f;
        try {
            f = factorize(K, opts);
        } catch (const NotPositiveDefinite&) {
            f = factorize(K, GPOptions{0.0, 1e-2, 1.0});
        }
        L_ = std::move(f.lower);
        alpha_ = L_.triangularView<Eigen::Lower>().solve(y_);
        L_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
        best_std_ = y_.maxCoeff();
    }

    double expected_improvement(const std::vector<double>& u, double xi) const {
        const Eigen::Index n = static_cast<Eigen::Index>(pts_.size());
        Vector k(n);
        for (Eigen::Index i = 0; i < n; ++i) k[i] = matern52(distance(u, pts_[static_cast<std::size_t>(i)]) / ell_);
        const double mu = k.dot(alpha_);
        const Vector v = L_.triangularView<Eigen::Lower>().solve(k);
        const double var = std::max(1.0 - v.squaredNorm(), 0.0);
        const double sd = std::sqrt(var);
        const double imp = mu - best_std_ - xi;
        if (sd < 1e-12) return std::max(imp, 0.0);
        const double z = imp / sd;
        return imp * normal_cdf(z) + sd * normal_pdf(z);
    }

private:
    static constexpr double kNugget = 1e-6;

    static double distance(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }

    const std::vector<std::vector<double>>& pts_;
    Vector y_;
    double mean_ = 0.0;
    double scale_ = 1.0;
    double ell_ = 0.3;
    Matrix L_;
    Vector alpha_;
    double best_std_ = 0.0;
};

}  // namespace

double to_unit(const Param& p, double value) {
    value = std::clamp(value, p.lower, p.upper);
    if (p.upper == p.lower) return 0.5;
    if (p.scale == Scale::Log) return std::log(value / p.lower) / std::log(p.upper / p.lower);
    return (value - p.lower) / (p.upper - p.lower);
}

double from_unit(const Param& p, double u) {
    u = std::clamp(u, 0.0, 1.0);
    if (p.scale == Scale::Log) return p.lower * std::exp(u * std::log(p.upper / p.lower));
    return p.lower + u * (p.upper - p.lower);
}

std::size_t initial_design_size(std::size_t budget, std::size_t dims) {
    return std::min(budget, std::max<std::size_t>(8, 2 * dims));
}

std::vector<double> halton_point(std::size_t index, std::span<const double> shift) {
    std::vector<double> u(shift.size());
    for (std::size_t d = 0; d < shift.size(); ++d) {
        const unsigned base = d < kPrimes.size() ? kPrimes[d] : kPrimes[d % kPrimes.size()] + 2 * static_cast<unsigned>(d);
        const double v = radical_inverse(index, base) + shift[d];
        u[d] = v - std::floor(v);
    }
    return u;
}

OptResult maximize(const Objective& objective, const ParamVector& space, std::size_t budget, std::uint64_t seed,
                   const MaximizeOptions& options) {
    if (budget < 1) throw std::invalid_argument("maximize: budget must be >= 1");
    const std::size_t dims = space.size();
    for (const auto& p : space) {
        if (!(p.lower < p.upper) && p.lower != p.upper)
            throw std::invalid_argument("maximize: bad bounds for " + p.name);
        if (p.scale == Scale::Log && !(p.lower > 0.0))
            throw std::invalid_argument("maximize: log-scale bounds must be positive for " + p.name);
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    OptResult result;
    result.seed = seed;
    std::vector<std::vector<double>> unit_pts;
    std::vector<double> values;

    auto to_point = [&](const std::vector<double>& u) {
        std::vector<double> x(dims);
        for (std::size_t d = 0; d < dims; ++d) x[d] = from_unit(space[d], u[d]);
        return x;
    };
    auto evaluate = [&](const std::vector<double>& u, std::vector<double> x) {
        double v;
        try {
            v = objective(std::span<const double>(x));
        } catch (const std::exception&) {
            v = kFailedObjective;
        }
        if (!std::isfinite(v) || v < kFailedObjective) v = kFailedObjective;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back({x, v, secs});
        unit_pts.push_back(u);
        values.push_back(v);
        if (result.log.size() == 1 || v > result.best_value) {
            result.best_value = v;
            result.best_point = std::move(x);
        }
    };

    if (dims == 0) {  // nothing to search
        evaluate({}, {});
        return result;
    }

    if (options.warm_start) {
        if (options.warm_start->size() != dims) throw std::invalid_argument("maximize: warm start dimension");
        std::vector<double> u(dims), x(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            x[d] = std::clamp((*options.warm_start)[d], space[d].lower, space[d].upper);
            u[d] = to_unit(space[d], x[d]);
        }
        evaluate(u, x);
    }

    std::vector<double> shift(dims);
    for (auto& s : shift) s = unif(rng);
    const std::size_t n0 = initial_design_size(budget, dims);
    for (std::size_t i = 1; result.log.size() < n0; ++i) {
        auto u = halton_point(i, shift);
        evaluate(u, to_point(u));
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    while (result.log.size() < budget) {
        const Surrogate model(unit_pts, values);

        struct Cand {
            std::vector<double> u;
            double ei;
        };
        std::vector<Cand> cands;
        auto score = [&](std::vector<double> u) {
            const double ei = model.expected_improvement(u, options.xi);
            cands.push_back({std::move(u), ei});
        };
        for (std::size_t s = 0; s < options.random_starts; ++s) {
            std::vector<double> u(dims);
            for (auto& v : u) v = unif(rng);
            score(std::move(u));
        }
        const auto best_it = std::max_element(values.begin(), values.end());
        score(unit_pts[static_cast<std::size_t>(best_it - values.begin())]);

        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(std::min(options.local_starts, cands.size())),
                          cands.end(), [](const Cand& a, const Cand& b) { return a.ei > b.ei; });
        Cand best = cands.front();
        for (std::size_t s = 0; s < std::min(options.local_starts, cands.size()); ++s) {
            Cand cur = cands[s];
            double step = 0.1;
            for (int it = 0; it < 24 && step > 1e-4; ++it) {
                std::vector<double> u = cur.u;
                for (auto& v : u) v = std::clamp(v + step * gauss(rng), 0.0, 1.0);
                const double ei = model.expected_improvement(u, options.xi);
                if (ei > cur.ei) {
                    cur = {std::move(u), ei};
                } else {
                    step *= 0.7;
                }
            }
            if (cur.ei > best.ei) best = cur;
        }

        bool duplicate = false;
        for (const auto& p : unit_pts) {
            double d = 0.0;
            for (std::size_t k = 0; k < dims; ++k) d += (p[k] - best.u[k]) * (p[k] - best.u[k]);
            if (d < 1e-16) duplicate = true;
        }
        if (duplicate || !(best.ei > 0.0)) {
            for (auto& v : best.u) v = unif(rng);
        }
        evaluate(best.u, to_point(best.u));
    }
    return result;
}

void write_evaluation_log(std::ostream& os, const OptResult& result) {
    os << "index,value,seconds";
    const std::size_t dims = result.log.empty() ? 0 : result.log.front().point.size();
    for (std::size_t d = 0; d < dims; ++d) os << ",p" << d;
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < result.log.size(); ++i) {
        const auto& e = result.log[i];
        os << i << ',' << e.value << ',' << e.seconds;
        for (double v : e.point) os << ',' << v;
        os << '\n';
    }
}

}  // namespace qgpr
