#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ckn/extremals.hpp"
#include "ckn/params.hpp"

namespace ckn {

/// Mode-k radial problem (P eta')' - Q eta + alpha W eta = 0 on (0, inf) in the variable tau,
/// rho = tau^sigma, with V(tau) = U(tau^sigma):
///   P = (p-1) |V'|^{p-2} tau^{K-1},  Q = sigma^2 lambda_k |V'|^{p-2} tau^{K-3},  W = V^{r-2} tau^{K-1}.
/// The linearized eigenvalue xi (kernel at xi = r-1) is alpha / sigma^p.
struct SturmLiouvilleProblem {
  CknParams params;
  int k = 0;
  double lambda_k = 0.0;  // k(N-2+k)
  double K = 0.0;
  double sigma = 0.0;
  double r = 0.0;
  BubbleShape V;

  double P(double tau) const;
  double Q(double tau) const;
  double W(double tau) const;
  double log_P(double tau) const;
  /// -inf for k = 0.
  double log_Q(double tau) const;
  double log_W(double tau) const;

  /// sigma^p.
  double alpha_scale() const;
  double xi(double alpha) const { return alpha / alpha_scale(); }
  double alpha(double xi) const { return xi * alpha_scale(); }
};

SturmLiouvilleProblem assemble(const CknParams& params, int k);

/// Multiplicity of degree-k spherical harmonics in dimension N.
long long harmonic_multiplicity(int N, int k);

struct SpectralOptions {
  double tau_min = 1e-5;
  double tau_max = 1e5;
  /// Grids of n, 2n-1, 4n-3, ... nodes (halving the log step each time).
  int refinements = 2;
  /// Relative error estimate beyond which GridTooCoarse is thrown.
  double max_rel_error = 1e-3;
  /// Threads used across independent modes.
  int jobs = 1;
};

/// Lumped linear finite elements in t = log tau. The continuous form is
///   int (P/tau) eta_t v_t dt + int tau Q eta v dt = alpha int tau W eta v dt.
/// Node i couples to i+1 through a link weight; q and mass are diagonal. Nodes outside
/// [first, last] carry the homogeneous Dirichlet value. Entries span hundreds of decades, so
/// they are kept as logarithms (shifted so the largest mass is 1) and the pivot recursions
/// run on the per-node ratios link/mass and q/mass.
struct DiscreteOperator {
  Eigen::VectorXd tau;
  Eigen::VectorXd log_link;  // size n-1
  Eigen::VectorXd log_q;
  Eigen::VectorXd log_mass;
  Eigen::VectorXd left;   // link(i-1) / mass(i), 0 at i = 0
  Eigen::VectorXd right;  // link(i) / mass(i), 0 at i = n-1
  Eigen::VectorXd q_ratio;  // q(i) / mass(i)
  int first = 0;  // first active node
  int last = 0;   // last active node

  int size() const { return static_cast<int>(tau.size()); }
  int active() const { return last - first + 1; }
  /// exp(log_mass) with zeros at Dirichlet nodes.
  Eigen::VectorXd mass() const;
  /// Number of discrete eigenvalues strictly below alpha (Sturm count on the LDL^T pivots).
  int count_below(double alpha) const;
  /// j-th smallest eigenvalue (j from 0) by bisection to relative width 1e-15.
  double eigenvalue(int j) const;
  /// Inverse iteration at a converged eigenvalue; returns a mass-normalized vector over all
  /// nodes (zeros at Dirichlet nodes).
  Eigen::VectorXd eigenvector(double alpha) const;
  /// Discrete Rayleigh quotient of x (full-length vector).
  double rayleigh(const Eigen::VectorXd& x) const;
  /// x^T A y, the discrete energy form.
  double energy(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

/// Flux-zero at tau_min for k = 0 and Dirichlet there for k >= 1; Dirichlet at tau_max.
DiscreteOperator discretize(const SturmLiouvilleProblem& problem, int grid_size,
                            const SpectralOptions& options = {});

struct Spectrum {
  CknParams params;
  int k = 0;
  double alpha_scale = 1.0;
  std::vector<double> alphas;  // extrapolated, increasing
  std::vector<double> xis;
  std::vector<double> errors;  // estimated absolute error of each alpha
  std::vector<int> grid_sizes;
  std::vector<std::vector<double>> level_alphas;  // [level][j]
  double tau_min = 0.0;
  double tau_max = 0.0;
  /// Finest grid; eigenfunctions are columns, normalized to sum mass * x^2 = 1 and signed so
  /// the first non-negligible entry is positive.
  Eigen::VectorXd tau;
  Eigen::VectorXd mass;
  Eigen::MatrixXd eigenfunctions;
  std::vector<int> sign_changes;
  /// Discrete Rayleigh quotients of the finest-grid eigenvectors.
  std::vector<double> discrete_rayleigh;

  double rel_error(int j) const;
};

/// Lowest n_eigs eigenvalues with Richardson extrapolation over the refinements.
/// Throws InvalidArgument (n_eigs < 1, grid_size < 256), GridTooCoarse, NoConvergence.
Spectrum eigen_solve(const SturmLiouvilleProblem& problem, int n_eigs, int grid_size,
                     const SpectralOptions& options = {});

/// Relative L2(W) distance between eigenfunction j and the sampled profile f (after
/// normalizing f and matching sign).
double eigenfunction_mismatch(const Spectrum& spectrum, int j, const Eigen::VectorXd& f);

/// int P eta'^2 + Q eta^2 over int W eta^2 by adaptive quadrature in tau, for eta = V or eta0.
double rayleigh_quotient_V(const SturmLiouvilleProblem& problem);
double rayleigh_quotient_eta0(const SturmLiouvilleProblem& problem);

struct KnownModes {
  CknParams params;
  double xi1 = 0.0;  // mode 0
  double xi2 = 0.0;
  double xi3 = 0.0;
  double xi1_error = 0.0;  // |xi1 - (p-1)|
  double xi2_error = 0.0;  // |xi2 - (r-1)|
  std::vector<double> lowest_xi;  // mode k = 1..k_max lowest xi
  double min_margin = 0.0;        // min_k lowest_xi[k] - (r-1)
  int min_margin_mode = 0;
  /// Relative separation of xi2 from its neighbours in mode 0.
  double separation = 0.0;
  bool simple = false;  // separation > 1e-4
  /// sigma^2 lambda_1 > K - 1 in exact arithmetic on the tuple.
  double gap_lhs = 0.0;
  double gap_rhs = 0.0;
  bool gap_precondition = false;
  bool nondegenerate = false;
  Spectrum mode0;
  std::vector<Spectrum> modes;  // k = 1..k_max
};

KnownModes verify_known_modes(const CknParams& params, int grid_size = 4096, int k_max = 3,
                              const SpectralOptions& options = {});

struct GapReport {
  double tau_hat = 0.0;
  /// Mode attaining the minimum (0 means the third mode-0 eigenvalue).
  int mode = 0;
  double xi3_mode0 = 0.0;
  std::vector<double> lowest_xi;  // k = 1..k_max
};

/// tau_hat = min(xi3 of mode 0 - (r-1), min_k lowest xi of mode k - (r-1)) / 2.
/// Throws NonPositiveGap.
GapReport spectral_gap(const CknParams& params, int k_max = 3, int grid_size = 4096,
                       const SpectralOptions& options = {});
GapReport spectral_gap(const KnownModes& modes);

/// Second solution of the k = 0 kernel equation by reduction of order, w = eta0 c with
///   c'(tau) = B (1 + tau^gamma)^{K(p-2)/p} / (eta0^2 tau^{K - 1/(p-1)}),  gamma = p/(p-1).
struct SecondSolution {
  double B = 1.0;
  std::vector<double> tau;  // log grid on [lo, hi]
  std::vector<double> w;
  std::vector<double> eta0;
  double asymptote = 0.0;          // w at the right end
  double flatness = 0.0;           // max |w / asymptote - 1|
  double eta0_decay_observed = 0.0;  // log-log slope of |eta0| over [lo, hi]
  double eta0_decay_expected = 0.0;  // -(K-p)/(p-1)
};

SecondSolution kernel_second_solution_checks(const CknParams& params, double B = 1.0,
                                             double lo = 1e2, double hi = 1e4, int points = 41);

}  // namespace ckn
