#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cfrf::fourier {

/// kLiteral uses cos(k x), sin(k x) directly. kRescaled maps the evaluation
/// window [-2 sigma, 2 sigma] onto one period: u = pi x / (2 sigma).
enum class Basis { kLiteral, kRescaled };

struct Domain {
  Basis basis = Basis::kLiteral;
  double sigma = 10.0;
  double phase(double x) const;
};

/// f(x) ~ A0 + sum_k a_k cos(k u) + b_k sin(k u).
struct FourierModel {
  double a0 = 0.0;
  std::vector<double> a;  // a[k-1]
  std::vector<double> b;

  static FourierModel zeros(int k_max);
  int k_max() const { return static_cast<int>(a.size()); }
  double eval(double x, const Domain& domain) const;
  /// Flat order A0, a1, b1, a2, b2, ...
  std::vector<double> flat() const;
  static FourierModel from_flat(std::span<const double> v);
};

enum class Target { kF1, kF2, kF3 };
Target target_from_string(const std::string& name);
std::string to_string(Target t);

/// Target value plus a constant DC addition.
double eval_target(Target t, double x, double dc = 0.0);

/// Trigonometric part of a target in the literal basis (polynomial terms are
/// not representable and are left out).
FourierModel target_trig_part(Target t, int k_max, double dc = 0.0);

struct Sample {
  double x;
  double f;
};

/// A0 = mean f, a_k = (2/T) sum f cos(k u), b_k = (2/T) sum f sin(k u).
FourierModel estimate_plain_mc(std::span<const Sample> samples, int k_max, const Domain& domain);

/// Same formulas applied in turn (A0, a1, b1, a2, ...) to the residual left
/// after subtracting every coefficient estimated so far. Extra rounds
/// re-estimate each coefficient on the full residual and stop once the largest
/// change is below `tolerance`.
FourierModel estimate_residual_mc(std::span<const Sample> samples, int k_max, const Domain& domain,
                                  int rounds = 1, double tolerance = 0.0);

/// Minimum-norm least squares on the T x (2 k_max + 1) design matrix via a
/// complete orthogonal decomposition. Needs T >= 2 k_max + 1.
FourierModel estimate_least_squares(std::span<const Sample> samples, int k_max, const Domain& domain);

enum class Estimator { kPlain, kResidual, kLeastSquares, kTruth };
std::string to_string(Estimator e);

struct ExperimentConfig {
  int k_max = 3;
  double sigma = 10.0;
  std::vector<int> sample_counts{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int repeats = 10000;
  int eval_points = 1000;  // uniform on [-2 sigma, 2 sigma], endpoints included
  uint64_t seed = 0;
  Basis basis = Basis::kLiteral;
  int residual_rounds = 1;

  void validate() const;
};

/// Mean over repeats of the RMSE against the raw target on the evaluation
/// grid, with x_t ~ N(0, sigma^2). Repeat r of sample count T always draws the
/// same samples for a given seed, whatever the estimator or target.
double run_mrmse(const ExperimentConfig& cfg, Estimator estimator, Target target, int sample_count,
                 double dc = 0.0);

struct MrmseRow {
  Estimator estimator;
  Target target;
  int sample_count;
  double dc;
  double mrmse;
};

/// Targets x estimators x sample counts.
std::vector<MrmseRow> run_curves(const ExperimentConfig& cfg);
/// f1 at T = 100 with DC additions {0, 1, 5, 10, 50, 100}, three estimators.
std::vector<MrmseRow> run_dc_table(const ExperimentConfig& cfg);

}  // namespace cfrf::fourier
