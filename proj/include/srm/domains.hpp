// Benchmark domains: 1-D stabilization toy, inverted pendulum, intruder
// monitoring. Also random-policy data collection and Monte Carlo returns.
//
// Declared Lipschitz constants refer to the range-weighted norms of
// range_weights(); the dynamics constant bounds
// ||m(s,a,w) - m(s',a',w)||_S / (||s-s'||_S + ||a-a'||_A).
#pragma once

#include "domain.hpp"
#include "mdp.hpp"
#include "rng.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace srm {

// ---- 1-D toy ----------------------------------------------------------------

struct ToyParams {
    std::size_t horizon = 10;
    int sign_mode = -1; // reward sign_mode * 5|s|
    bool noise = true;
};

inline double toy_step(double s, double a, double e) {
    return std::clamp(std::clamp(s, -1.0, 1.0) + std::clamp(a, -0.5, 0.5) + std::clamp(e, -0.25, 0.25), -1.0, 1.0);
}

inline double toy_reward(double s, int sign_mode = -1) { return sign_mode * 5.0 * std::abs(s); }

inline DomainSpec make_toy1d(const ToyParams& p = {}) {
    if (p.sign_mode != 1 && p.sign_mode != -1) throw DomainError("toy sign_mode must be +1 or -1");
    if (p.horizon == 0) throw DomainError("horizon must be positive");
    DomainSpec d;
    d.name = "toy1d";
    d.state_dim = d.action_dim = 1;
    d.state_bounds = {{-1.0}, {1.0}};
    d.action_bounds = {{-0.5}, {0.5}};
    d.disturbance_bounds = {{-0.25}, {0.25}};
    d.start_state = {0.0};
    d.horizon = p.horizon;
    const double span = 5.0 * static_cast<double>(p.horizon);
    d.return_range = p.sign_mode < 0 ? ReturnRange{-span, 0.0} : ReturnRange{0.0, span};
    // Weights 1/2 (state) and 1 (action): the state moves 1:1 with s and a, and
    // 5|s| has slope 10 per weighted state unit.
    d.lipschitz = {1.0, 10.0, 0.0};
    d.noise_enabled = p.noise;
    d.step = [](const StateVector& s, const ActionVector& a, const std::vector<double>& w) {
        return StateVector{toy_step(s[0], a[0], w[0])};
    };
    const int sign = p.sign_mode;
    d.reward = [sign](const StateVector& s) { return toy_reward(s[0], sign); };
    return d;
}

// ---- inverted pendulum --------------------------------------------------------
//
// Cart-pole style pendulum with explicit Euler steps. Within `fall_band` of
// horizontal the motion is scaled down linearly and vanishes at |theta| = pi/2,
// where the state is absorbing; the reward ramps from 0 to -1 over the same band.

struct PendulumParams {
    std::size_t horizon = 50;
    double fall_band = 0.2;   // rad
    double max_rate = 10.0;   // |theta-dot| clip, rad/s
    bool noise = true;
};

namespace pendulum {
inline constexpr double g = 9.8;
inline constexpr double m = 2.0;
inline constexpr double M = 8.0;
inline constexpr double l = 0.5;
inline constexpr double alpha = 1.0 / (m + M);
inline constexpr double dt = 0.1;
inline constexpr double max_force = 50.0;
inline constexpr double max_noise = 10.0;
} // namespace pendulum

inline double pendulum_accel(double theta, double rate, double force) {
    using namespace pendulum;
    const double c = std::cos(theta);
    return (g * std::sin(theta) - alpha * m * l * rate * rate * std::sin(2.0 * theta) / 2.0 - alpha * c * force) /
           (4.0 * l / 3.0 - alpha * m * l * c * c);
}

// 1 while upright, 0 once fallen, linear across the band.
inline double pendulum_motion_scale(double theta, double band) {
    return std::clamp((std::numbers::pi / 2.0 - std::abs(theta)) / band, 0.0, 1.0);
}

inline StateVector pendulum_step(const StateVector& s, double u, double e, const PendulumParams& p = {}) {
    const double half = std::numbers::pi / 2.0;
    const double theta = std::clamp(s[0], -half, half);
    const double rate = std::clamp(s[1], -p.max_rate, p.max_rate);
    const double force = std::clamp(u, -pendulum::max_force, pendulum::max_force) +
                         std::clamp(e, -pendulum::max_noise, pendulum::max_noise);
    const double k = pendulum_motion_scale(theta, p.fall_band);
    const double acc = pendulum_accel(theta, rate, force);
    return {std::clamp(theta + k * pendulum::dt * rate, -half, half),
            std::clamp(rate + k * pendulum::dt * acc, -p.max_rate, p.max_rate)};
}

inline double pendulum_reward(const StateVector& s, double band = 0.2) {
    return -std::clamp((std::abs(s[0]) - (std::numbers::pi / 2.0 - band)) / band, 0.0, 1.0);
}

// Weighted-norm dynamics constant: largest spectral norm of the weighted
// Jacobian d(theta', rate') / d(theta, rate, u) over a grid of states, forces and
// disturbances, times a 25% margin. The step map is piecewise smooth on a convex
// box, so the Jacobian supremum bounds its Lipschitz constant.
inline double pendulum_dynamics_lipschitz(const PendulumParams& p) {
    const double half = std::numbers::pi / 2.0;
    const double w[3] = {1.0 / std::numbers::pi, 1.0 / (2.0 * p.max_rate), 1.0 / (2.0 * pendulum::max_force)};
    const double h[3] = {1e-6, 1e-6, 1e-4};
    auto f = [&](const double x[3], double e) { return pendulum_step({x[0], x[1]}, x[2], e, p); };
    double worst = 0.0;
    constexpr int nt = 61, nr = 41, nu = 11;
    for (int it = 0; it < nt; ++it)
        for (int ir = 0; ir < nr; ++ir)
            for (int iu = 0; iu < nu; ++iu)
                for (double e : {-pendulum::max_noise, 0.0, pendulum::max_noise}) {
                    const double x[3] = {-half + 2.0 * half * it / (nt - 1), -p.max_rate + 2.0 * p.max_rate * ir / (nr - 1),
                                         -pendulum::max_force + 2.0 * pendulum::max_force * iu / (nu - 1)};
                    double J[2][3];
                    for (int j = 0; j < 3; ++j) {
                        double lo[3] = {x[0], x[1], x[2]}, hi[3] = {x[0], x[1], x[2]};
                        lo[j] -= h[j];
                        hi[j] += h[j];
                        const auto a = f(lo, e), b = f(hi, e);
                        for (int i = 0; i < 2; ++i) J[i][j] = w[i] * (b[i] - a[i]) / (2.0 * h[j]) / w[j];
                    }
                    // Largest eigenvalue of J J^T.
                    const double a11 = J[0][0] * J[0][0] + J[0][1] * J[0][1] + J[0][2] * J[0][2];
                    const double a22 = J[1][0] * J[1][0] + J[1][1] * J[1][1] + J[1][2] * J[1][2];
                    const double a12 = J[0][0] * J[1][0] + J[0][1] * J[1][1] + J[0][2] * J[1][2];
                    const double tr = a11 + a22, det = a11 * a22 - a12 * a12;
                    const double lam = tr / 2.0 + std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
                    worst = std::max(worst, std::sqrt(lam));
                }
    return 1.25 * worst;
}

inline DomainSpec make_pendulum(const PendulumParams& p = {}) {
    if (!(p.fall_band > 0.0 && p.fall_band < std::numbers::pi / 2.0)) throw DomainError("fall_band out of range");
    if (!(p.max_rate > 0.0)) throw DomainError("max_rate must be positive");
    if (p.horizon == 0) throw DomainError("horizon must be positive");
    const double half = std::numbers::pi / 2.0;
    DomainSpec d;
    d.name = "pendulum";
    d.state_dim = 2;
    d.action_dim = 1;
    d.state_bounds = {{-half, -p.max_rate}, {half, p.max_rate}};
    d.action_bounds = {{-pendulum::max_force}, {pendulum::max_force}};
    d.disturbance_bounds = {{-pendulum::max_noise}, {pendulum::max_noise}};
    d.start_state = {0.0, 0.0};
    d.horizon = p.horizon;
    d.return_range = {-static_cast<double>(p.horizon), 0.0};
    d.lipschitz = {pendulum_dynamics_lipschitz(p), std::numbers::pi / p.fall_band, 0.0};
    d.noise_enabled = p.noise;
    d.step = [p](const StateVector& s, const ActionVector& a, const std::vector<double>& w) {
        return pendulum_step(s, a[0], w[0], p);
    };
    const double band = p.fall_band;
    d.reward = [band](const StateVector& s) { return pendulum_reward(s, band); };
    return d;
}

// ---- intruder monitoring --------------------------------------------------------

struct IntruderParams {
    std::size_t horizon = 20;
    std::size_t intruders = 1;
    double r_cam = 0.5;
    double d_min = 0.1;
    double drift = 0.05;      // intruder step toward the sensitive location
    double noise_half = 0.05; // intruder noise, uniform per axis
    bool negate = false;
    bool noise = true;
};

// Moves p toward the origin by `drift`, stopping at the origin.
inline void drift_toward_origin(double& x, double& y, double drift) {
    const double r = std::hypot(x, y);
    const double k = r > 0.0 ? std::max(0.0, 1.0 - drift / r) : 0.0;
    x *= k;
    y *= k;
}

// State layout: camera (x, y), then (x, y) per intruder. Disturbance: (x, y) per intruder.
inline StateVector intruder_step(const StateVector& s, const ActionVector& a, const std::vector<double>& e,
                                 const IntruderParams& p = {}) {
    StateVector out(s.size());
    for (std::size_t i = 0; i < 2; ++i)
        out[i] = std::clamp(s[i] + std::clamp(a[i], -0.1, 0.1), -1.0, 1.0);
    for (std::size_t j = 0; j < p.intruders; ++j) {
        double x = s[2 + 2 * j], y = s[3 + 2 * j];
        drift_toward_origin(x, y, p.drift);
        out[2 + 2 * j] = std::clamp(x + std::clamp(e[2 * j], -p.noise_half, p.noise_half), -1.0, 1.0);
        out[3 + 2 * j] = std::clamp(y + std::clamp(e[2 * j + 1], -p.noise_half, p.noise_half), -1.0, 1.0);
    }
    return out;
}

// sum_i min(||cam - intr_i||, r_cam) / max(||intr_i - s_sensitive||, d_min), s_sensitive = 0.
inline double intruder_reward(const StateVector& s, const IntruderParams& p = {}) {
    double total = 0.0;
    for (std::size_t j = 0; j < p.intruders; ++j) {
        const double ix = s[2 + 2 * j], iy = s[3 + 2 * j];
        total += std::min(std::hypot(s[0] - ix, s[1] - iy), p.r_cam) / std::max(std::hypot(ix, iy), p.d_min);
    }
    return p.negate ? -total : total;
}

inline DomainSpec make_intruder(const IntruderParams& p = {}) {
    if (p.intruders < 1) throw DomainError("intruder count must be >= 1");
    if (!(p.r_cam > 0.0 && p.d_min > 0.0)) throw DomainError("r_cam and d_min must be positive");
    if (!(p.drift >= 0.0 && p.noise_half >= 0.0)) throw DomainError("drift and noise must be nonnegative");
    if (p.horizon == 0) throw DomainError("horizon must be positive");
    const std::size_t sd = 2 + 2 * p.intruders;
    DomainSpec d;
    d.name = "intruder";
    d.state_dim = sd;
    d.action_dim = 2;
    d.state_bounds = {std::vector<double>(sd, -1.0), std::vector<double>(sd, 1.0)};
    d.action_bounds = {{-0.1, -0.1}, {0.1, 0.1}};
    d.disturbance_bounds = {std::vector<double>(2 * p.intruders, -p.noise_half),
                            std::vector<double>(2 * p.intruders, p.noise_half)};
    d.start_state.assign(sd, 0.0);
    for (std::size_t j = 0; j < p.intruders; ++j) {
        const double ang = std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * static_cast<double>(j) /
                                                        static_cast<double>(p.intruders);
        d.start_state[2 + 2 * j] = 0.9 * std::cos(ang);
        d.start_state[3 + 2 * j] = 0.9 * std::sin(ang);
    }
    d.horizon = p.horizon;
    const double span = static_cast<double>(p.horizon * p.intruders) * p.r_cam / p.d_min;
    d.return_range = p.negate ? ReturnRange{-span, 0.0} : ReturnRange{0.0, span};
    // Each term: |grad min(.)| <= sqrt 2 times 1/d_min, plus r_cam times 1/d_min^2.
    // Every state weight is 1/2, so one weighted unit is two raw units.
    const double raw = std::sqrt(2.0) / p.d_min + p.r_cam / (p.d_min * p.d_min);
    // Camera and drift maps are 1-Lipschitz; an action moves the camera by at
    // most 0.1 per weighted action unit.
    d.lipschitz = {1.0, 2.0 * raw * static_cast<double>(p.intruders), 0.0};
    d.noise_enabled = p.noise;
    d.step = [p](const StateVector& s, const ActionVector& a, const std::vector<double>& w) {
        return intruder_step(s, a, w, p);
    };
    d.reward = [p](const StateVector& s) { return intruder_reward(s, p); };
    return d;
}

// ---- data and ground truth ------------------------------------------------------

// Episode i draws actions from derive_seed(seed, {i, 0}) and disturbances from
// derive_seed(seed, {i, 1}); a larger n extends a smaller one.
inline std::vector<Episode> collect_random_dataset(const DomainSpec& spec, std::size_t n_episodes,
                                                   std::uint64_t seed) {
    if (n_episodes < 1) throw DomainError("n_episodes must be >= 1");
    spec.validate();
    std::vector<Episode> out;
    out.reserve(n_episodes);
    for (std::size_t i = 0; i < n_episodes; ++i) {
        Rng actions(derive_seed(seed, {i, 0}));
        DisturbanceStream noise(spec, derive_seed(seed, {i, 1}));
        out.push_back(simulate_episode(
            spec, [&](const StateVector&, std::size_t) { return spec.action_bounds.sample(actions); }, noise));
    }
    return out;
}

struct MonteCarloReturn {
    double mean = 0.0;
    double stderr_ = 0.0;
};

template <class P>
MonteCarloReturn true_return_mc(const DomainSpec& spec, const P& pi, std::size_t n_rollouts, std::uint64_t seed) {
    if (n_rollouts < 1) throw DomainError("n_rollouts must be >= 1");
    spec.validate();
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n_rollouts; ++i) {
        DisturbanceStream noise(spec, derive_seed(seed, {i}));
        const double g =
            episode_return(simulate_episode(spec, [&](const StateVector& s, std::size_t) { return pi(s); }, noise));
        const double delta = g - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (g - mean);
    }
    MonteCarloReturn r{mean, 0.0};
    if (n_rollouts > 1)
        r.stderr_ = std::sqrt(m2 / static_cast<double>(n_rollouts - 1) / static_cast<double>(n_rollouts));
    return r;
}

} // namespace srm
