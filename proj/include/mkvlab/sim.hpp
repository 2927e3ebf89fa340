#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mkvlab/coeffs.hpp"
#include "mkvlab/common.hpp"
#include "mkvlab/measure.hpp"
#include "mkvlab/test_functions.hpp"

namespace mkvlab::sim {

struct SimConfig {
    int n = 100;             // particles
    int d = 1;               // state dimension
    int m = 1;               // common-noise dimension
    double T = 1.0;          // horizon
    int steps = 256;         // time grid count
    std::vector<double> x0;  // initial point, size d (empty = origin)
    int replications = 1;
    std::uint64_t master_seed = 0;
    bool store_noise = false;  // keep idiosyncratic increments on the path

    double dt() const { return T / steps; }
    double time_at(int j) const { return static_cast<double>(j) * dt(); }
    /// Grid index of t; throws if t is not aligned with the grid.
    int grid_index(double t) const;
    void validate() const;
};

/// One replication of the particle system on the time grid. States are laid
/// out step-major: x[(j*n + i)*d + a]. The common-noise path z is cumulative
/// with z[0] = 0. When store_noise is set, db holds the idiosyncratic
/// increments particle-major: db[(i*steps + j)*d + a].
struct ReplicationPath {
    int rep = 0;
    bool ok = true;
    std::string error;
    int n = 0, d = 1, m = 1, steps = 0;
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> db;

    std::span<const double> state(int j, int i) const {
        return {x.data() + (static_cast<std::size_t>(j) * n + i) * d, static_cast<std::size_t>(d)};
    }
    MeasureView measure_at(int j) const {
        return {x.data() + static_cast<std::size_t>(j) * n * d, nullptr, static_cast<std::size_t>(n), d};
    }
    std::span<const double> common_noise_at(int j) const {
        return {z.data() + static_cast<std::size_t>(j) * m, static_cast<std::size_t>(m)};
    }
    std::span<const double> idio_increment(int i, int j) const {
        return {db.data() + (static_cast<std::size_t>(i) * steps + j) * d, static_cast<std::size_t>(d)};
    }
};

struct EmpiricalFlowEnsemble {
    SimConfig config;
    std::vector<ReplicationPath> reps;
    int aborted() const;
};

/// Euler-Maruyama with the empirical measure frozen at the left endpoint of
/// each step and the common-noise increment shared by all particles of a
/// replication. Nonfinite states abort the replication (ok=false) with a
/// diagnostic; aborted paths are excluded from statistics but always counted.
ReplicationPath simulate_replication(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int rep);

EmpiricalFlowEnsemble simulate(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int workers = 1);

/// Streams replications to fn (possibly concurrently, identified by index);
/// aggregation by the caller must be index-deterministic.
void for_each_replication(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                          const std::function<void(const ReplicationPath&)>& fn);

/// Empirical average (1/n) sum_i phi(X^i_{t_j}); summed in a particle-order
/// independent way, so index permutations change nothing.
double eval_measure(const ReplicationPath& path, int j, const TestFunction& phi);

struct MomentEstimate {
    double q = 0;
    MeanSE value;
    int aborted = 0;
};

/// Estimate of E[sup_t |X^{1,n}_t|^q] with replication-level standard errors
/// (particles are pooled inside a replication).
MomentEstimate moment_check(const SimConfig& cfg, const coeffs::CoefficientSet& cs, double q,
                            int workers);
MomentEstimate moment_check(const EmpiricalFlowEnsemble& ens, double q);

struct ConcentrationReport {
    double K = 0, eps = 0, q = 0, c_q = 0;
    double frequency = 0;
    double se = 0;
    double bound = 0;
    std::size_t events = 0;
    std::size_t reps = 0;
    bool pass = false;
};

/// Frequency of { exists t on the grid : Lambda_t[[-K,K]^d] < 1 - eps }
/// against the Markov-type bound c_q / (eps K^q).
ConcentrationReport concentration_check(const SimConfig& cfg, const coeffs::CoefficientSet& cs,
                                        double K, double eps, double q, double c_q, int workers);
ConcentrationReport concentration_check(const EmpiricalFlowEnsemble& ens, double K, double eps,
                                        double q, double c_q);

struct GaussianComponent {
    std::vector<double> mean;
    std::vector<double> cov;  // d x d row-major, SPD
    double weight = 0;
};

struct GaussianMixture {
    int dim = 1;
    std::vector<GaussianComponent> components;
    /// Throws unless weights are a probability vector and every covariance
    /// admits a Cholesky factor.
    void validate(double spd_floor = 1e-12) const;
    double pdf(std::span<const double> y) const;
};

/// One-step Gaussian predictor: per particle, mean X_{t-eps} and covariance
/// sum_{t-eps <= t_l < t} (sigma sigma^T)(t_l, X_{t-eps}, mu_{t-eps}) dt
///   + eps (sigma_bar sigma_bar^T)(t-eps, X_{t-eps}, mu_{t-eps}),
/// equal weights 1/n. eps must be grid aligned with 0 < eps <= t.
GaussianMixture one_step_gaussian(const ReplicationPath& path, const SimConfig& cfg,
                                  const coeffs::CoefficientSet& cs, double t, double eps);

/// Cholesky factor of an SPD matrix (row-major); throws below the floor.
std::vector<double> cholesky(std::span<const double> a, int d, double floor = 0.0);

}  // namespace mkvlab::sim
