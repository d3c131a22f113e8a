#pragma once

#include "voxmc/model.hpp"

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace voxmc {

struct RateTerm {
    PropensityLaw law = PropensityLaw::Zeroth;
    double khat = 0.0; // concentration rate constant
    int a = -1, b = -1;
    ChannelKind kind = ChannelKind::CircuitOther;
    int rv = -1, rv_to = -1;
    int species = -1;
};

// Deterministic concentration flow dx/dt = S r(x) + e u(t), assembled
// mechanically from the compiled channel list (emission enters through the
// input vector, not a stoichiometry column).
struct MeanSystem {
    int n = 0;
    Eigen::MatrixXd S; // n x m
    std::vector<RateTerm> rates;
    Eigen::VectorXd input; // indicator of S at the transmitter voxel
    double volume = 1.0;
    int m() const { return int(rates.size()); }
};

MeanSystem build_mean_system(const SystemModel& model);
Eigen::VectorXd eval_rates(const MeanSystem& sys, const Eigen::VectorXd& x);
Eigen::MatrixXd eval_rate_jacobian(const MeanSystem& sys, const Eigen::VectorXd& x);

struct LnaOptions {
    double h = 1e-3;        // integrator step, shared by every subsystem
    double report_dt = 0.05;
    int max_halvings = 20;
    double clamp = 1e-6;    // reference floor before logs
};

struct MeanSolution {
    std::vector<double> times; // report grid
    Eigen::MatrixXd x;         // n x T concentrations
    Eigen::MatrixXd alpha;     // P x T, V * n_R (count units)
    Eigen::MatrixXd beta;      // P x T, V^2 * (activation reactant product)
    std::vector<double> dense_times;
    Eigen::MatrixXd dense_beta; // P x dense, for interpolation by the Z solver
};

MeanSolution solve_mean_system(const SystemModel& model, int symbol, double t_end,
                               const LnaOptions& opts = {});

// dSigma/dt = A Sigma + Sigma A' + B B', classic 4th-order fixed step with
// per-step symmetrization; returns Sigma(t_end).
Eigen::MatrixXd solve_lyapunov(const std::function<Eigen::MatrixXd(double)>& A,
                               const std::function<Eigen::MatrixXd(double)>& B,
                               Eigen::MatrixXd sigma0, double t_end, double h);

// Joint Gaussian moments of the species fluctuations and the filter pair
// (Z_0 .. Z_{K-1}) when `transmitted` drives the dynamics.
struct LnaMoments {
    std::vector<double> times;
    Eigen::MatrixXd xbar;             // n x T concentrations
    Eigen::MatrixXd zmean;            // K x T
    std::vector<Eigen::MatrixXd> cov; // per grid point, (n+K) x (n+K)
    int n = 0;
    int K = 0;
    double volume = 1.0;

    double count_mean(int state_index, int t_idx) const {
        return volume * xbar(state_index, t_idx);
    }
    double count_variance(int state_index, int t_idx) const {
        return volume * cov[t_idx](state_index, state_index);
    }
    double z_variance(int k, int t_idx) const { return cov[t_idx](n + k, n + k); }
    double z_covariance(int k1, int k2, int t_idx) const { return cov[t_idx](n + k1, n + k2); }
};

LnaMoments lna_analyze(const SystemModel& model, int transmitted, double t_end,
                       const LnaOptions& opts = {});

struct LnaBer {
    std::vector<double> times;
    std::vector<std::vector<double>> ber; // [transmitted symbol][grid]
};

// Gaussian error probability of the mixed approximate filter; K = 2 only.
LnaBer lna_ber(const SystemModel& model, double t_end, const LnaOptions& opts = {});

} // namespace voxmc
