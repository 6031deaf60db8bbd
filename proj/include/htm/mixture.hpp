#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "htm/common.hpp"

namespace htm::mixture {

/// dof value marking Gaussian components.
constexpr double kGaussianDof = std::numeric_limits<double>::infinity();

struct MixtureModel {
  int k = 0;
  int dim = 0;
  double dof = kGaussianDof;  // nu in (1, inf]; inf = Gaussian
  Eigen::VectorXd weights;    // k, simplex
  Eigen::MatrixXd means;      // k x dim
  std::vector<Eigen::MatrixXd> covariances;  // k matrices, dim x dim SPD

  bool is_gaussian() const { return std::isinf(dof); }

  /// Throws InvalidConfig / InvalidDof / NonSPD on a violated invariant.
  void validate() const;
};

/// Soft assignments, rows summing to 1. `source` identifies the model that
/// produced them.
struct Responsibilities {
  Eigen::MatrixXd values;  // n x k
  uint64_t source = 0;
};

struct FitTrace {
  std::vector<double> loglik;  // includes the initial model's value
  int iterations = 0;
  bool converged = false;
  double final_gap = 0.0;
};

struct FitConfig {
  int max_iter = 200;
  double rel_tol = 1e-6;
  /// Absolute covariance ridge added every M-step. <= 0 means derive it from
  /// the data as 1e-4 * mean diagonal of the global covariance.
  double ridge = 0.0;
  bool diagonal = false;
};

struct EStepResult {
  Responsibilities resp;
  /// t-EM latent scales u_ik = (nu+d)/(nu+delta2_ik); absent for Gaussian.
  std::optional<Eigen::MatrixXd> scale_weights;
  double loglik = 0.0;
};

struct FitResult {
  MixtureModel model;
  FitTrace trace;
};

/// Seeding only (no Lloyd iterations): k-means++ means, uniform weights,
/// global covariance + ridge, Gaussian dof.
MixtureModel kmeans_pp_init(const Eigen::MatrixXd& data, int k, uint64_t seed,
                            double ridge = 0.0);

double gaussian_logpdf(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

/// Multivariate Student-t log density. nu may sit on the Cauchy boundary
/// (nu = 1) for evaluation; fitting requires nu > 1.
double student_t_logpdf(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov, double dof);

double mixture_loglik(const Eigen::MatrixXd& data, const MixtureModel& model);

EStepResult e_step(const Eigen::MatrixXd& data, const MixtureModel& model);

/// Weighted-statistics update; with scale_weights present this is the
/// classical fixed-nu t-EM M-step (covariance denominator sum of
/// responsibilities). Empty components are re-seeded to the worst-explained
/// point.
MixtureModel m_step(const Eigen::MatrixXd& data, const Responsibilities& resp,
                    const std::optional<Eigen::MatrixXd>& scale_weights,
                    const FitConfig& cfg, double dof);

FitResult gmm_em_fit(const Eigen::MatrixXd& data, int k, uint64_t seed,
                     FitConfig cfg = {});

/// t-EM warm-started from a fitted model (typically a converged GMM).
FitResult t_mixture_refine(const Eigen::MatrixXd& data,
                           const MixtureModel& init, double dof,
                           FitConfig cfg = {});

/// Argmax per row; ties go to the lowest component index.
std::vector<int> hard_assignments(const Responsibilities& resp);

uint64_t model_hash(const MixtureModel& model);

// Single-document JSON checkpoint; bit-exact round trip.
void save_model(const MixtureModel& model, const std::string& path);
MixtureModel load_model(const std::string& path);

}  // namespace htm::mixture
