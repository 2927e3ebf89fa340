#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mkvlab/coeffs.hpp"
#include "mkvlab/common.hpp"
#include "mkvlab/sim.hpp"
#include "mkvlab/test_functions.hpp"

namespace mkvlab::mg {

/// Per replication and test function: Lambda_{t_j}[phi] and the residual
/// series M_{t_j}[phi] = Lambda_{t_j}[phi] - phi(x0) - sum_{l<j} A_l dt with
/// left-Riemann time integration (matching the Euler scheme).
struct MartingalePath {
    std::vector<double> m;           // size steps+1, m[0] = 0
    std::vector<double> lambda_phi;  // size steps+1
};

struct PathFunctionals {
    int rep = 0;
    bool ok = true;
    std::vector<MartingalePath> per_phi;
    std::vector<double> realized_qv;     // per phi, at T
    std::vector<double> predicted_qv;    // per phi: int (Q + C/n)
    std::vector<double> predicted_q;     // Q part
    std::vector<double> predicted_c;     // C part (without the 1/n)
};

/// All per-path series in one pass. Accumulations run in state-sorted
/// particle order, so every output is exactly invariant under particle
/// permutations.
PathFunctionals path_functionals(const sim::ReplicationPath& path, const sim::SimConfig& cfg,
                                 const coeffs::CoefficientSet& cs,
                                 std::span<const TestFunction> phis);

MartingalePath compute_M(const sim::ReplicationPath& path, const sim::SimConfig& cfg,
                         const coeffs::CoefficientSet& cs, const TestFunction& phi);

/// Bounded continuous functional of finitely many pairings Lambda_{s_i}[phi_j]
/// anchored at times <= s.
struct PastFunctional {
    std::string id;
    std::vector<std::pair<double, std::size_t>> anchors;  // (time, index into the phi roster)
    std::function<double(std::span<const double>)> map;
    double bound = 1.0;

    static PastFunctional one();
    static PastFunctional tanh_of(double time, std::size_t phi_index);
};

struct ResidualSpec {
    std::size_t phi = 0;
    double s = 0;
    double t = 0;
    std::size_t g = 0;
};

struct ResidualResult {
    ResidualSpec spec;
    double stat = 0;
    double se = 0;
    double z = 0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<ResidualResult> tests;
    double battery_pass_rate = 0;
    double z = 0;
    double threshold = 0;
    int aborted = 0;
    std::size_t reps = 0;
    bool pass = false;
};

/// Monte Carlo battery of E[(M_t - M_s) g] = 0 tests; each test passes iff
/// |mean| <= z * SE, the battery iff the pass rate reaches the threshold.
VerifyReport residual_battery(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                              std::span<const TestFunction> phis,
                              std::span<const ResidualSpec> specs,
                              std::span<const PastFunctional> gs, double z,
                              double battery_threshold, int workers);

ResidualResult residual_test(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                             std::span<const TestFunction> phis, const ResidualSpec& spec,
                             std::span<const PastFunctional> gs, double z, int workers);

struct QvReport {
    double mean_realized = 0;
    double mean_predicted = 0;
    double ratio = 0;
    std::size_t reps = 0;
    int aborted = 0;
    bool flagged = false;  // predicted ~ 0 while realized is not
};

/// Ensemble-mean realized vs predicted quadratic variation of M[phi] at T.
QvReport qv_match(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                  const TestFunction& phi, int workers);

struct NScaleReport {
    std::vector<int> ns;
    std::vector<double> mean_qv;
    LinFitResult fit;  // log mean QV vs log n
};

/// Mean realized QV across an n-sweep under common random numbers, with the
/// fitted log-log slope (about -1 when the idiosyncratic term dominates).
NScaleReport n_scaling(const sim::SimConfig& base, const coeffs::CoefficientSet& cs,
                       const TestFunction& phi, std::span<const int> ns, int workers);

LinFitResult n_scaling_fit(std::span<const int> ns, std::span<const double> mean_qv);

/// Energy distance of two scalar samples (V-statistic form).
double energy_distance(std::span<const double> a, std::span<const double> b);

struct ChaosAnchor {
    double time = 0;
    std::size_t phi = 0;
};

struct ChaosReport {
    std::vector<int> ns;
    std::vector<double> distances;  // between consecutive n
    bool non_increasing = false;
};

/// Max-over-anchors energy distance between the replication samples of
/// (Lambda_t[phi]) at consecutive n, under shared noise streams.
ChaosReport chaos_trend(const sim::SimConfig& base, const coeffs::CoefficientSet& cs,
                        std::span<const TestFunction> phis, std::span<const ChaosAnchor> anchors,
                        std::span<const int> ns, int workers);

/// (2 + T c_{b,sigma,sigma_bar}) ||phi||_2*.
double m_bound(const coeffs::CoefficientSet& cs, double T, double phi_seminorm2);

}  // namespace mkvlab::mg
