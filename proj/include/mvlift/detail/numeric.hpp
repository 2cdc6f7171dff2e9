// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "mvlift/types.hpp"

namespace mvlift::detail {

/// Deterministic LDLT factorization of a symmetric positive (semi)definite
/// matrix. On reported singularity, retries once with Tikhonov jitter
/// 1e-12 * trace(H) on the diagonal; throws DegenerateSystem if that also
/// fails.
class SpdSolver {
  public:
    explicit SpdSolver(const Eigen::MatrixXd& h) {
        ldlt_.compute(h);
        if (healthy(h)) return;
        Eigen::MatrixXd jittered = h;
        jittered.diagonal().array() += 1e-12 * h.trace();
        ldlt_.compute(jittered);
        if (!healthy(jittered)) {
            throw DegenerateSystem("normal equations singular beyond tolerance");
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& g) const { return ldlt_.solve(g); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& g) const { return ldlt_.solve(g); }

  private:
    bool healthy(const Eigen::MatrixXd& h) const {
        if (ldlt_.info() != Eigen::Success) return false;
        const double dmin = ldlt_.vectorD().minCoeff();
        const double dmax = ldlt_.vectorD().cwiseAbs().maxCoeff();
        const double scale = std::max(dmax, h.diagonal().cwiseAbs().maxCoeff());
        return dmin > 1e-14 * scale;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// One-shot solve H x = g with the SpdSolver jitter semantics.
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
    return SpdSolver(h).solve(g);
}

/// Median of a copy of the values (average of the middle pair for even n).
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

/// Softmax of -rho * cost, stabilized by subtracting the minimum cost.
/// Non-finite costs receive weight zero. Weights sum to one.
inline std::vector<double> softmin_weights(const std::vector<double>& costs, double rho) {
    std::vector<double> w(costs.size(), 0.0);
    double cmin = std::numeric_limits<double>::infinity();
    for (double c : costs) {
        if (std::isfinite(c)) cmin = std::min(cmin, c);
    }
    if (!std::isfinite(cmin)) return w;
    double total = 0.0;
    for (size_t i = 0; i < costs.size(); ++i) {
        if (std::isfinite(costs[i])) {
            w[i] = std::exp(-rho * (costs[i] - cmin));
            total += w[i];
        }
    }
    for (double& x : w) x /= total;
    return w;
}

/// FNV-1a over a string; used for config fingerprints.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Runs fn(0..n-1), optionally across threads. Results must be written to
/// per-index slots; the call order within a worker is ascending so the
/// output is independent of the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mvlift::detail
