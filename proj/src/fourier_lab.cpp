#include "cfrf/fourier_lab.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "cfrf/common.hpp"

namespace cfrf::fourier {

double Domain::phase(double x) const {
  return basis == Basis::kLiteral ? x : std::numbers::pi * x / (2.0 * sigma);
}

FourierModel FourierModel::zeros(int k_max) {
  if (k_max < 1) fail(ErrorKind::kValidation, "k_max must be at least 1");
  FourierModel m;
  m.a.assign(k_max, 0.0);
  m.b.assign(k_max, 0.0);
  return m;
}

double FourierModel::eval(double x, const Domain& domain) const {
  const double u = domain.phase(x);
  double acc = a0;
  for (int k = 1; k <= k_max(); ++k) acc += a[k - 1] * std::cos(k * u) + b[k - 1] * std::sin(k * u);
  return acc;
}

std::vector<double> FourierModel::flat() const {
  std::vector<double> v{a0};
  for (int k = 0; k < k_max(); ++k) {
    v.push_back(a[k]);
    v.push_back(b[k]);
  }
  return v;
}

FourierModel FourierModel::from_flat(std::span<const double> v) {
  FourierModel m = zeros(static_cast<int>(v.size() - 1) / 2);
  m.a0 = v[0];
  for (int k = 0; k < m.k_max(); ++k) {
    m.a[k] = v[1 + 2 * k];
    m.b[k] = v[2 + 2 * k];
  }
  return m;
}

Target target_from_string(const std::string& name) {
  if (name == "f1") return Target::kF1;
  if (name == "f2") return Target::kF2;
  if (name == "f3") return Target::kF3;
  fail(ErrorKind::kValidation, "unknown target: " + name);
}

std::string to_string(Target t) {
  switch (t) {
    case Target::kF1: return "f1";
    case Target::kF2: return "f2";
    case Target::kF3: return "f3";
  }
  return "?";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::kPlain: return "plain";
    case Estimator::kResidual: return "residual";
    case Estimator::kLeastSquares: return "least_squares";
    case Estimator::kTruth: return "truth";
  }
  return "?";
}

double eval_target(Target t, double x, double dc) {
  switch (t) {
    case Target::kF1: return dc + 2.0 + 0.03 * x * x + 2.0 * std::sin(x) + std::cos(3.0 * x);
    case Target::kF2: return dc + 10.0 - 0.02 * x + 0.01 * x * x + std::cos(x) - std::sin(2.0 * x);
    case Target::kF3: return dc + 5.0 + 0.05 * x * x - 0.001 * x * x * x - std::sin(x) + 2.0 * std::cos(2.0 * x);
  }
  return 0.0;
}

FourierModel target_trig_part(Target t, int k_max, double dc) {
  FourierModel m = FourierModel::zeros(k_max);
  auto put_a = [&](int k, double v) { if (k <= k_max) m.a[k - 1] = v; };
  auto put_b = [&](int k, double v) { if (k <= k_max) m.b[k - 1] = v; };
  switch (t) {
    case Target::kF1: m.a0 = 2.0; put_b(1, 2.0); put_a(3, 1.0); break;
    case Target::kF2: m.a0 = 10.0; put_a(1, 1.0); put_b(2, -1.0); break;
    case Target::kF3: m.a0 = 5.0; put_b(1, -1.0); put_a(2, 2.0); break;
  }
  m.a0 += dc;
  return m;
}

namespace {

void check_samples(std::span<const Sample> samples) {
  if (samples.empty()) fail(ErrorKind::kValidation, "estimator needs at least one sample");
}

// Column j of the design row: 1, cos u, sin u, cos 2u, ...
void design_row(double u, int k_max, double* row) {
  row[0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    row[2 * k - 1] = std::cos(k * u);
    row[2 * k] = std::sin(k * u);
  }
}

Eigen::MatrixXd design_matrix(std::span<const Sample> samples, int k_max, const Domain& domain) {
  const int n = 2 * k_max + 1;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> B(samples.size(), n);
  for (size_t t = 0; t < samples.size(); ++t) design_row(domain.phase(samples[t].x), k_max, B.row(t).data());
  return B;
}

}  // namespace

FourierModel estimate_plain_mc(std::span<const Sample> samples, int k_max, const Domain& domain) {
  check_samples(samples);
  const Eigen::MatrixXd B = design_matrix(samples, k_max, domain);
  const double T = static_cast<double>(samples.size());
  std::vector<double> c(B.cols());
  for (int j = 0; j < B.cols(); ++j) {
    double acc = 0.0;
    for (size_t t = 0; t < samples.size(); ++t) acc += samples[t].f * B(t, j);
    c[j] = (j == 0 ? 1.0 : 2.0) * acc / T;
  }
  return FourierModel::from_flat(c);
}

FourierModel estimate_residual_mc(std::span<const Sample> samples, int k_max, const Domain& domain, int rounds,
                                  double tolerance) {
  check_samples(samples);
  if (rounds < 1) fail(ErrorKind::kValidation, "residual estimator needs at least one round");
  const Eigen::MatrixXd B = design_matrix(samples, k_max, domain);
  const double T = static_cast<double>(samples.size());
  std::vector<double> res(samples.size());
  for (size_t t = 0; t < samples.size(); ++t) res[t] = samples[t].f;
  std::vector<double> c(B.cols(), 0.0);
  for (int round = 0; round < rounds; ++round) {
    double change = 0.0;
    for (int j = 0; j < B.cols(); ++j) {
      double acc = 0.0;
      for (size_t t = 0; t < samples.size(); ++t) acc += (res[t] + c[j] * B(t, j)) * B(t, j);
      const double next = (j == 0 ? 1.0 : 2.0) * acc / T;
      for (size_t t = 0; t < samples.size(); ++t) res[t] -= (next - c[j]) * B(t, j);
      change = std::max(change, std::abs(next - c[j]));
      c[j] = next;
    }
    if (round > 0 && change < tolerance) break;
  }
  return FourierModel::from_flat(c);
}

FourierModel estimate_least_squares(std::span<const Sample> samples, int k_max, const Domain& domain) {
  if (samples.size() < static_cast<size_t>(2 * k_max + 1)) {
    fail(ErrorKind::kValidation, "least squares needs at least 2*k_max+1 samples");
  }
  const Eigen::MatrixXd B = design_matrix(samples, k_max, domain);
  Eigen::VectorXd f(samples.size());
  for (size_t t = 0; t < samples.size(); ++t) f[t] = samples[t].f;
  const Eigen::VectorXd c = B.completeOrthogonalDecomposition().solve(f);
  return FourierModel::from_flat(std::vector<double>(c.data(), c.data() + c.size()));
}

void ExperimentConfig::validate() const {
  if (k_max < 1) fail(ErrorKind::kValidation, "k_max must be at least 1");
  if (!(sigma > 0.0)) fail(ErrorKind::kValidation, "sigma must be positive");
  if (repeats < 1) fail(ErrorKind::kValidation, "repeats must be positive");
  if (eval_points < 2) fail(ErrorKind::kValidation, "need at least two evaluation points");
  if (residual_rounds < 1) fail(ErrorKind::kValidation, "residual rounds must be positive");
  for (int T : sample_counts) {
    if (T < 1) fail(ErrorKind::kValidation, "sample counts must be positive");
  }
}

double run_mrmse(const ExperimentConfig& cfg, Estimator estimator, Target target, int sample_count, double dc) {
  cfg.validate();
  const Domain domain{cfg.basis, cfg.sigma};
  const int n = 2 * cfg.k_max + 1;
  if (estimator == Estimator::kLeastSquares && sample_count < n) {
    fail(ErrorKind::kValidation, "least squares needs at least 2*k_max+1 samples");
  }

  // RMSE^2 = mean f^2 - 2 c.b + c^T G c with G = B^T B / N, b = B^T f / N on the grid.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(n);
  double ff = 0.0;
  {
    std::vector<double> row(n);
    const int N = cfg.eval_points;
    for (int i = 0; i < N; ++i) {
      const double x = -2.0 * cfg.sigma + 4.0 * cfg.sigma * i / (N - 1);
      const double f = eval_target(target, x, dc);
      design_row(domain.phase(x), cfg.k_max, row.data());
      const Eigen::Map<Eigen::VectorXd> r(row.data(), n);
      G += r * r.transpose();
      bvec += f * r;
      ff += f * f;
    }
    G /= N;
    bvec /= N;
    ff /= N;
  }
  auto rmse = [&](const FourierModel& m) {
    const std::vector<double> flat = m.flat();
    const Eigen::Map<const Eigen::VectorXd> c(flat.data(), n);
    return std::sqrt(std::max(0.0, ff - 2.0 * c.dot(bvec) + c.dot(G * c)));
  };

  if (estimator == Estimator::kTruth) return rmse(target_trig_part(target, cfg.k_max, dc));

  std::vector<double> per_repeat(cfg.repeats);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < cfg.repeats; ++r) {
    std::seed_seq seq{static_cast<uint32_t>(cfg.seed), static_cast<uint32_t>(cfg.seed >> 32),
                      static_cast<uint32_t>(sample_count), static_cast<uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, cfg.sigma);
    std::vector<Sample> samples(sample_count);
    for (auto& s : samples) {
      s.x = normal(rng);
      s.f = eval_target(target, s.x, dc);
    }
    FourierModel m;
    switch (estimator) {
      case Estimator::kPlain: m = estimate_plain_mc(samples, cfg.k_max, domain); break;
      case Estimator::kResidual: m = estimate_residual_mc(samples, cfg.k_max, domain, cfg.residual_rounds); break;
      default: m = estimate_least_squares(samples, cfg.k_max, domain); break;
    }
    per_repeat[r] = rmse(m);
  }
  double acc = 0.0;
  for (double v : per_repeat) acc += v;
  return acc / cfg.repeats;
}

std::vector<MrmseRow> run_curves(const ExperimentConfig& cfg) {
  std::vector<MrmseRow> rows;
  for (Target t : {Target::kF1, Target::kF2, Target::kF3}) {
    for (Estimator e : {Estimator::kPlain, Estimator::kResidual, Estimator::kLeastSquares}) {
      for (int T : cfg.sample_counts) rows.push_back({e, t, T, 0.0, run_mrmse(cfg, e, t, T)});
    }
  }
  return rows;
}

std::vector<MrmseRow> run_dc_table(const ExperimentConfig& cfg) {
  std::vector<MrmseRow> rows;
  for (Estimator e : {Estimator::kResidual, Estimator::kLeastSquares, Estimator::kPlain}) {
    for (double dc : {0.0, 1.0, 5.0, 10.0, 50.0, 100.0}) {
      rows.push_back({e, Target::kF1, 100, dc, run_mrmse(cfg, e, Target::kF1, 100, dc)});
    }
  }
  return rows;
}

}  // namespace cfrf::fourier
