// SPDX-License-Identifier: Apache-2.0
//
// cellfree-sim: link-level simulator for the cell-free massive MIMO downlink
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cellfree/matrix.hpp"
#include "cellfree/rates.hpp"

namespace cellfree {

/// Downlink power control coefficients eta (M x K, nonnegative), subject to
/// the per-AP constraint sum_k eta_mk gamma_mk <= 1.
struct PowerCoefficients {
    RealMatrix eta;
};

/// Full-power baseline: every AP transmits at its power limit, split equally
/// across users in the gamma-weighted sense, eta_mk = 1 / sum_k' gamma_mk'.
/// The per-AP constraint holds with equality.
inline PowerCoefficients uniform_eta(const RealMatrix &gamma) {
    PowerCoefficients pc;
    pc.eta.resize(gamma.rows(), gamma.cols());
    for (std::size_t m = 0; m < gamma.rows(); ++m) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < gamma.cols(); ++k)
            row_sum += gamma(m, k);
        if (!(row_sum > 0.0))
            throw std::invalid_argument("uniform_eta: AP " + std::to_string(m) +
                                        " has an all-zero gamma row");
        for (std::size_t k = 0; k < gamma.cols(); ++k)
            pc.eta(m, k) = 1.0 / row_sum;
    }
    return pc;
}

struct PowerCheck {
    bool ok = false;
    std::vector<double> margins; // per AP: 1 - sum_k eta gamma
    double min_margin = 0.0;
};

/// Verifies the per-AP average power constraint with a small numerical slack.
inline PowerCheck check_power_constraint(const RealMatrix &eta, const RealMatrix &gamma,
                                         double slack = 1e-9) {
    require_same_shape(eta, gamma, "check_power_constraint");
    PowerCheck result;
    result.margins.resize(eta.rows());
    result.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < eta.rows(); ++m) {
        double used = 0.0;
        for (std::size_t k = 0; k < eta.cols(); ++k)
            used += eta(m, k) * gamma(m, k);
        result.margins[m] = 1.0 - used;
        result.min_margin = std::min(result.min_margin, result.margins[m]);
    }
    result.ok = result.min_margin >= -slack;
    return result;
}

struct MaxMinOptions {
    double tol = 1e-3;         ///< relative width of the final bisection bracket
    int max_bisect_iters = 64;
    int max_feas_iters = 6000; ///< FISTA iteration cap per feasibility check
    bool verbose = false;
};

struct MaxMinResult {
    PowerCoefficients coeffs;
    double sinr_lower = 0.0; ///< min-SINR certified by the returned eta
    double sinr_upper = 0.0; ///< bisection upper bound on the optimum
    int bisect_iters = 0;
    long feasibility_iters = 0;
};

/// Thrown when the bisection fails to close its bracket; carries the best
/// feasible coefficients found so far.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string &msg, PowerCoefficients best)
        : std::runtime_error(msg), best_coeffs(std::move(best)) {}
    PowerCoefficients best_coeffs;
};

namespace detail {

/// Euclidean projection of one AP row onto {x >= 0, sum_k w_k x_k^2 <= 1}.
/// Negative entries clamp to zero; the ellipsoid multiplier is found by
/// Newton's method on the monotone residual.
inline void project_row(double *x, const double *w, std::size_t n) {
    double load = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (x[k] < 0.0)
            x[k] = 0.0;
        load += w[k] * x[k] * x[k];
    }
    if (load <= 1.0)
        return;
    double lambda = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        double phi = 0.0, dphi = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double denom = 1.0 + lambda * w[k];
            const double xk = x[k] / denom;
            const double term = w[k] * xk * xk;
            phi += term;
            dphi += -2.0 * term * w[k] / denom;
        }
        const double resid = phi - 1.0;
        if (std::abs(resid) <= 1e-14)
            break;
        lambda -= resid / dphi;
    }
    for (std::size_t k = 0; k < n; ++k)
        x[k] /= 1.0 + lambda * w[k];
}

/// Workspace for the max-min feasibility subproblem in zeta = sqrt(eta).
/// All quantities are pre-scaled so that beta, gamma are O(1).
struct FeasibilityProblem {
    const RealMatrix &beta;
    const RealMatrix &gamma;
    double inv_rho;

    std::size_t num_aps() const { return beta.rows(); }
    std::size_t num_users() const { return beta.cols(); }

    /// Per-user SINR numerator sums and interference terms at zeta.
    void stats(const std::vector<double> &zeta, std::vector<double> &num,
               std::vector<double> &u) const {
        const std::size_t M = num_aps(), K = num_users();
        std::vector<double> q(M, 0.0);
        num.assign(K, 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double *g = gamma.row(m);
            const double *z = &zeta[m * K];
            double qm = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                qm += g[k] * z[k] * z[k];
                num[k] += g[k] * z[k];
            }
            q[m] = qm;
        }
        u.assign(K, 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double *b = beta.row(m);
            for (std::size_t k = 0; k < K; ++k)
                u[k] += b[k] * q[m];
        }
        for (std::size_t k = 0; k < K; ++k)
            u[k] = std::sqrt(u[k] + inv_rho);
    }

    // SINR_k = rho num^2 / (rho I + 1) = (num / u)^2 with u^2 = I + 1/rho.
    double min_sinr(const std::vector<double> &zeta) const {
        std::vector<double> num, u;
        stats(zeta, num, u);
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < num.size(); ++k)
            lo = std::min(lo, (num[k] * num[k]) / (u[k] * u[k]));
        return lo;
    }

    /// Squared-hinge infeasibility F(zeta) = sum_k max(0, sqrt(t) u_k - num_k)^2
    /// and its gradient. Returns F; max_h reports the worst raw constraint.
    double value_and_grad(const std::vector<double> &zeta, double sqrt_t,
                          std::vector<double> &grad, double &max_h) const {
        const std::size_t M = num_aps(), K = num_users();
        std::vector<double> num, u;
        stats(zeta, num, u);
        std::vector<double> hinge(K);
        double f = 0.0;
        max_h = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double h = sqrt_t * u[k] - num[k];
            max_h = std::max(max_h, h);
            hinge[k] = std::max(0.0, h);
            f += hinge[k] * hinge[k];
        }
        grad.assign(M * K, 0.0);
        // s_m = sqrt(t) sum_k hinge_k beta_mk / u_k
        std::vector<double> s(M, 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double *b = beta.row(m);
            double sm = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                sm += hinge[k] * b[k] / u[k];
            s[m] = sqrt_t * sm;
        }
        for (std::size_t m = 0; m < M; ++m) {
            const double *g = gamma.row(m);
            const double *z = &zeta[m * K];
            double *gr = &grad[m * K];
            for (std::size_t k = 0; k < K; ++k)
                gr[k] = 2.0 * g[k] * (s[m] * z[k] - hinge[k]);
        }
        return f;
    }

    double value(const std::vector<double> &zeta, double sqrt_t, double &max_h) const {
        const std::size_t K = num_users();
        std::vector<double> num, u;
        stats(zeta, num, u);
        double f = 0.0;
        max_h = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double h = sqrt_t * u[k] - num[k];
            max_h = std::max(max_h, h);
            const double hp = std::max(0.0, h);
            f += hp * hp;
        }
        return f;
    }

    void project(std::vector<double> &zeta) const {
        const std::size_t M = num_aps(), K = num_users();
        for (std::size_t m = 0; m < M; ++m)
            project_row(&zeta[m * K], gamma.row(m), K);
    }
};

/// Projected FISTA on the squared-hinge residual. Succeeds as soon as an
/// iterate satisfies every SINR constraint exactly (the iterates always lie
/// in the per-AP power set, so a nonpositive max_h is a feasibility
/// certificate). Declares infeasible on stagnation or the iteration cap.
inline bool feasibility_search(const FeasibilityProblem &prob, double target,
                               std::vector<double> &zeta, int max_iters, long &iters_used) {
    const double sqrt_t = std::sqrt(target);
    prob.project(zeta);
    double max_h = 0.0;
    double f = prob.value(zeta, sqrt_t, max_h);
    if (max_h <= 0.0)
        return true;

    std::vector<double> x = zeta, x_prev = zeta, y = zeta, grad, cand;
    double theta = 1.0;
    double lip = 1.0;
    double f_best = f;
    int stall = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        ++iters_used;
        // Feasibility certificates must come from projected iterates; the
        // extrapolated point y may sit outside the power constraint set.
        const double fy = prob.value_and_grad(y, sqrt_t, grad, max_h);
        // Backtracking on the local quadratic model.
        double fx;
        for (;;) {
            cand = y;
            const double step = 1.0 / lip;
            for (std::size_t i = 0; i < cand.size(); ++i)
                cand[i] -= step * grad[i];
            prob.project(cand);
            double dot = 0.0, dist_sq = 0.0;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const double d = cand[i] - y[i];
                dot += grad[i] * d;
                dist_sq += d * d;
            }
            fx = prob.value(cand, sqrt_t, max_h);
            if (fx <= fy + dot + 0.5 * lip * dist_sq || lip > 1e18)
                break;
            lip *= 2.0;
        }
        x_prev.swap(x);
        x = cand;
        if (max_h <= 0.0) {
            zeta = x;
            return true;
        }
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double momentum = (theta - 1.0) / theta_next;
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = x[i] + momentum * (x[i] - x_prev[i]);
        theta = theta_next;
        if (fx > f) { // restart momentum when the objective rises
            y = x;
            theta = 1.0;
        }
        f = fx;
        if (fx < f_best * (1.0 - 1e-10)) {
            f_best = fx;
            stall = 0;
        } else if (++stall > 250) {
            break; // converged to a positive residual: infeasible target
        }
        lip = std::max(lip * 0.95, 1e-12);
    }
    return false;
}

} // namespace detail

/// Max-min fairness power control for the statistical-CSI SINR under the
/// per-AP power constraint. Bisection over the common SINR target; each
/// feasibility subproblem is second-order-cone representable in
/// zeta = sqrt(eta) and is solved by a projection-based method (projected
/// accelerated gradient on the squared constraint residual, with exact
/// per-AP ellipsoid projections).
///
/// The problem is pre-scaled by max(beta) so that the solver works on O(1)
/// quantities; SINRs are invariant under (beta, gamma, rho, eta) ->
/// (beta/c, gamma/c, c rho, c eta).
inline MaxMinResult maxmin_eta(const RealMatrix &beta, const RealMatrix &gamma, double rho_d,
                               const MaxMinOptions &opts = {}) {
    require_same_shape(beta, gamma, "maxmin_eta");
    if (!(rho_d > 0.0))
        throw std::invalid_argument("maxmin_eta: rho_d must be positive");
    if (!(opts.tol > 0.0))
        throw std::invalid_argument("maxmin_eta: tol must be positive");
    const std::size_t M = beta.rows(), K = beta.cols();

    const double scale = *std::max_element(beta.begin(), beta.end());
    if (!(scale > 0.0))
        throw std::invalid_argument("maxmin_eta: beta must have a positive entry");
    RealMatrix beta_s(M, K), gamma_s(M, K);
    for (std::size_t i = 0; i < beta.size(); ++i) {
        beta_s.data()[i] = beta.data()[i] / scale;
        gamma_s.data()[i] = gamma.data()[i] / scale;
    }
    const double rho_s = rho_d * scale;
    detail::FeasibilityProblem prob{beta_s, gamma_s, 1.0 / rho_s};

    // Scaled uniform starting point: feasible witness for the lower bound.
    const PowerCoefficients uniform_scaled = uniform_eta(gamma_s);
    std::vector<double> witness(M * K);
    for (std::size_t i = 0; i < witness.size(); ++i)
        witness[i] = std::sqrt(uniform_scaled.eta.data()[i]);
    double t_lo = prob.min_sinr(witness);

    // Upper bound: no user can beat its single-user full-power SINR.
    double t_hi = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        double coherent = 0.0;
        for (std::size_t m = 0; m < M; ++m)
            coherent += std::sqrt(gamma_s(m, k));
        t_hi = std::min(t_hi, rho_s * coherent * coherent);
    }
    t_hi = std::max(t_hi, t_lo * (1.0 + 2.0 * opts.tol));

    MaxMinResult result;
    std::vector<double> trial;
    while (t_hi - t_lo > opts.tol * t_lo) {
        if (result.bisect_iters >= opts.max_bisect_iters) {
            PowerCoefficients best;
            best.eta.resize(M, K);
            for (std::size_t i = 0; i < witness.size(); ++i)
                best.eta.data()[i] = witness[i] * witness[i] / scale;
            throw SolverError("maxmin_eta: bisection did not converge in " +
                                  std::to_string(opts.max_bisect_iters) + " iterations",
                              std::move(best));
        }
        ++result.bisect_iters;
        const double t_mid = 0.5 * (t_lo + t_hi);
        trial = witness;
        const bool ok = detail::feasibility_search(prob, t_mid, trial, opts.max_feas_iters,
                                                   result.feasibility_iters);
        if (ok) {
            witness = trial;
            t_lo = std::max(t_mid, prob.min_sinr(witness));
        } else {
            t_hi = t_mid;
        }
        if (opts.verbose)
            std::cerr << "maxmin_eta: iter " << result.bisect_iters << " bracket [" << t_lo
                      << ", " << t_hi << "]\n";
    }

    result.coeffs.eta.resize(M, K);
    for (std::size_t i = 0; i < witness.size(); ++i)
        result.coeffs.eta.data()[i] = witness[i] * witness[i] / scale;
    result.sinr_lower = t_lo;
    result.sinr_upper = t_hi;
    return result;
}

} // namespace cellfree
