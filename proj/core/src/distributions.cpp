#include "mixclips/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mixclips {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid parameter";
    case ErrorKind::not_positive_definite: return "matrix not positive definite";
    case ErrorKind::data: return "data error";
    case ErrorKind::contract: return "contract violation";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::config: return "config error";
    case ErrorKind::empty_stratum: return "empty stratum";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_parameter:
    case ErrorKind::empty_stratum:
    case ErrorKind::io:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::numerical:
    case ErrorKind::not_positive_definite:
    case ErrorKind::contract:
      return 4;
  }
  return 1;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Marsaglia & Tsang, shape >= 1.
double draw_gamma_unit_large(double shape, RandomSource& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace

double RandomSource::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::normal() { return normal_(engine_); }

std::uint64_t RandomSource::derive_seed(std::uint64_t stream) const noexcept {
  return splitmix64(seed_ ^ splitmix64(stream + 1));
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) : m_(m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorKind::not_positive_definite, "SpdMatrix: matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::not_positive_definite, "SpdMatrix: non-finite entries");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::not_positive_definite, "SpdMatrix: matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::not_positive_definite, "SpdMatrix: Cholesky factorization failed");
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& d) {
  return SpdMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

Eigen::MatrixXd SpdMatrix::lower_cholesky() const {
  return Eigen::LLT<Eigen::MatrixXd>(m_).matrixL();
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  Eigen::MatrixXd inv = Eigen::LLT<Eigen::MatrixXd>(m_).solve(
      Eigen::MatrixXd::Identity(m_.rows(), m_.cols()));
  return 0.5 * (inv + inv.transpose());
}

double SpdMatrix::log_determinant() const {
  Eigen::MatrixXd l = lower_cholesky();
  return 2.0 * l.diagonal().array().log().sum();
}

double draw_log_gamma(double shape, RandomSource& rng) {
  if (!(shape >= 0.0) || !std::isfinite(shape)) {
    throw Error(ErrorKind::invalid_parameter, "gamma shape must be finite and >= 0");
  }
  if (shape == 0.0) return kNegInf;
  if (shape >= 1.0) return std::log(draw_gamma_unit_large(shape, rng));
  // G(a) = G(a + 1) * U^(1/a), kept in log space so tiny shapes do not underflow.
  const double big = draw_gamma_unit_large(shape + 1.0, rng);
  return std::log(big) + std::log(rng.uniform()) / shape;
}

double draw_gamma(double shape, double rate, RandomSource& rng) {
  if (!(rate > 0.0)) throw Error(ErrorKind::invalid_parameter, "gamma rate must be > 0");
  return std::exp(draw_log_gamma(shape, rng)) / rate;
}

Eigen::VectorXd draw_dirichlet(std::span<const double> alpha, RandomSource& rng) {
  const auto k = static_cast<Eigen::Index>(alpha.size());
  if (k == 0) throw Error(ErrorKind::invalid_parameter, "Dirichlet: empty parameter vector");
  Eigen::VectorXd logs(k);
  double top = kNegInf;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(alpha[j] >= 0.0)) throw Error(ErrorKind::invalid_parameter, "Dirichlet: negative alpha");
    logs(j) = draw_log_gamma(alpha[j], rng);
    top = std::max(top, logs(j));
  }
  if (top == kNegInf) throw Error(ErrorKind::invalid_parameter, "Dirichlet: all alpha entries are zero");
  Eigen::VectorXd out(k);
  for (Eigen::Index j = 0; j < k; ++j) out(j) = logs(j) == kNegInf ? 0.0 : std::exp(logs(j) - top);
  out /= out.sum();
  return out;
}

Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd& alpha, RandomSource& rng) {
  return draw_dirichlet(std::span<const double>(alpha.data(), static_cast<std::size_t>(alpha.size())), rng);
}

int draw_categorical(std::span<const double> weights, RandomSource& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::invalid_parameter, "categorical: negative or NaN weight");
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::invalid_parameter, "categorical: weights must have a positive finite sum");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = static_cast<int>(k);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

int draw_categorical_log(std::span<const double> log_weights, RandomSource& rng) {
  double top = kNegInf;
  for (double lw : log_weights) top = std::max(top, lw);
  if (top == kNegInf || std::isnan(top)) {
    throw Error(ErrorKind::numerical, "categorical: all log-weights are -inf");
  }
  std::vector<double> w(log_weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_weights[k] - top);
  return draw_categorical(w, rng);
}

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, RandomSource& rng) {
  if (mean.size() != cov.dim()) throw Error(ErrorKind::invalid_parameter, "mvn: dimension mismatch");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
  return mean + cov.lower_cholesky() * z;
}

SpdMatrix draw_wishart(double alpha, const SpdMatrix& scale, RandomSource& rng) {
  const int r = scale.dim();
  if (!(alpha > 0.5 * (r - 1))) {
    throw Error(ErrorKind::invalid_parameter,
                "Wishart: alpha must exceed (r-1)/2, got " + std::to_string(alpha));
  }
  // Bartlett decomposition for df = 2 alpha and textbook scale V = (2A)^-1.
  const double df = 2.0 * alpha;
  Eigen::MatrixXd v = 0.5 * scale.inverse();
  Eigen::MatrixXd lv = Eigen::LLT<Eigen::MatrixXd>(v).matrixL();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    a(i, i) = std::sqrt(2.0 * draw_gamma(0.5 * (df - i), 1.0, rng));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd la = lv * a;
  Eigen::MatrixXd x = la * la.transpose();
  return SpdMatrix(0.5 * (x + x.transpose()));
}

SpdMatrix draw_inv_wishart(double alpha, const SpdMatrix& scale, RandomSource& rng) {
  return SpdMatrix(draw_wishart(alpha, scale, rng).inverse());
}

double bnb_log_pmf(long long k, double a, double b, double c) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "BNB parameters must be positive");
  }
  if (k < 0) return kNegInf;
  const double kk = static_cast<double>(k);
  auto lbeta = [](double x, double y) { return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y); };
  return std::lgamma(a + kk) - std::lgamma(a) - std::lgamma(kk + 1.0) + lbeta(a + b, c + kk) - lbeta(b, c);
}

}  // namespace mixclips
