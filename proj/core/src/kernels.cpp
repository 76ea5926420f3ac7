#include "mixclips/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mixclips {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void require_members(std::span<const std::size_t> members, const char* who) {
  if (members.empty()) {
    throw Error(ErrorKind::contract, std::string(who) + ": posterior draw requested for an empty component");
  }
}

}  // namespace

// ----------------------------------------------------------------------------
// Hyperparameter recipes
// ----------------------------------------------------------------------------

GaussianHyper gaussian_hyper_from_data(const GaussianData& data, B0Scale scale) {
  const int r = data.dim();
  if (data.size() == 0 || r == 0) throw Error(ErrorKind::data, "gaussian hyper: empty data");
  Eigen::VectorXd b0(r), range(r);
  for (int j = 0; j < r; ++j) {
    std::vector<double> col(data.y.col(j).data(), data.y.col(j).data() + data.y.rows());
    b0(j) = median(col);
    range(j) = data.y.col(j).maxCoeff() - data.y.col(j).minCoeff();
    if (!(range(j) > 0.0)) {
      throw Error(ErrorKind::data, "gaussian hyper: column " + std::to_string(j + 1) + " has zero range");
    }
  }
  GaussianHyper h;
  h.b0 = b0;
  Eigen::VectorXd r2 = range.array().square();
  h.B0 = SpdMatrix::diagonal(scale == B0Scale::range_squared ? r2 : range);
  h.c0 = 2.5 + 0.5 * (r - 1);
  h.g0 = 0.5 + 0.5 * (r - 1);
  h.G0 = SpdMatrix::diagonal((100.0 * h.g0 / h.c0) * r2.cwiseInverse());
  h.C0 = SpdMatrix(h.g0 * h.G0.inverse());
  return h;
}

MarkovHyper markov_hyper(int states, double persistence, double off_diagonal) {
  if (states < 2) throw Error(ErrorKind::invalid_parameter, "markov hyper: need at least two states");
  if (persistence < 0.0 || off_diagonal <= 0.0) {
    throw Error(ErrorKind::invalid_parameter, "markov hyper: prior entries must be nonnegative, off-diagonal positive");
  }
  MarkovHyper h;
  h.delta = Eigen::MatrixXd::Constant(states, states, off_diagonal);
  h.delta.diagonal().setConstant(persistence);
  return h;
}

// ----------------------------------------------------------------------------
// Free-function log-likelihoods
// ----------------------------------------------------------------------------

double kernel_loglik(std::span<const double> y, const GaussianComponent& theta) {
  if (static_cast<Eigen::Index>(y.size()) != theta.mu.size()) {
    throw Error(ErrorKind::data, "gaussian loglik: observation dimension mismatch");
  }
  GaussianData one;
  one.y = Eigen::Map<const Eigen::RowVectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return GaussianKernel::loglik(GaussianKernel::prepare(theta), one, 0);
}

double kernel_loglik(std::span<const int> y, const CategoricalComponent& theta) {
  if (y.size() != theta.pi.size()) throw Error(ErrorKind::data, "categorical loglik: dimension mismatch");
  double ll = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] < 0 || y[j] >= theta.pi[j].size()) {
      throw Error(ErrorKind::data, "categorical loglik: category out of range in variable " + std::to_string(j + 1));
    }
    ll += std::log(theta.pi[j](y[j]));
  }
  return ll;
}

double kernel_loglik(const TransitionCounts& counts, const MarkovComponent& theta) {
  if (counts.counts.rows() != theta.xi.rows()) throw Error(ErrorKind::data, "markov loglik: state count mismatch");
  if (counts.total() < 1) throw Error(ErrorKind::data, "markov loglik: sequence has no transitions");
  double ll = 0.0;
  for (Eigen::Index j = 0; j < theta.xi.rows(); ++j) {
    for (Eigen::Index l = 0; l < theta.xi.cols(); ++l) {
      const int n = counts.counts(j, l);
      if (n > 0) ll += n * std::log(theta.xi(j, l));
    }
  }
  return ll;
}

// ----------------------------------------------------------------------------
// Gaussian
// ----------------------------------------------------------------------------

GaussianKernel::Prepared GaussianKernel::prepare(const Component& theta) {
  Prepared p;
  p.mu = theta.mu;
  p.chol = theta.sigma.lower_cholesky();
  const double r = static_cast<double>(theta.mu.size());
  const double logdet = 2.0 * p.chol.diagonal().array().log().sum();
  p.log_norm = -0.5 * (r * std::log(2.0 * std::numbers::pi) + logdet);
  return p;
}

double GaussianKernel::loglik(const Prepared& p, const Data& data, std::size_t i) {
  Eigen::VectorXd diff = data.y.row(static_cast<Eigen::Index>(i)).transpose() - p.mu;
  p.chol.triangularView<Eigen::Lower>().solveInPlace(diff);
  return p.log_norm - 0.5 * diff.squaredNorm();
}

GaussianKernel::Component GaussianKernel::draw_posterior(const Data& data, std::span<const std::size_t> members,
                                                         const Component& current, const Hyper& hyper,
                                                         RandomSource& rng) {
  require_members(members, "gaussian");
  const int r = data.dim();
  const double nk = static_cast<double>(members.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(r);
  for (std::size_t i : members) sum += data.y.row(static_cast<Eigen::Index>(i)).transpose();

  const Eigen::MatrixXd sigma_inv = current.sigma.inverse();
  const Eigen::MatrixXd b0_inv = hyper.B0.inverse();
  const SpdMatrix post_cov(SpdMatrix(symmetrize(b0_inv + nk * sigma_inv)).inverse());
  const Eigen::VectorXd post_mean = post_cov.matrix() * (b0_inv * hyper.b0 + sigma_inv * sum);

  Component out;
  out.mu = draw_mvn(post_mean, post_cov, rng);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t i : members) {
    const Eigen::VectorXd d = data.y.row(static_cast<Eigen::Index>(i)).transpose() - out.mu;
    scatter.noalias() += d * d.transpose();
  }
  const SpdMatrix post_scale(symmetrize(hyper.C0.matrix() + 0.5 * scatter));
  out.sigma = draw_inv_wishart(hyper.c0 + 0.5 * nk, post_scale, rng);
  return out;
}

GaussianKernel::Component GaussianKernel::draw_prior(const Hyper& hyper, RandomSource& rng) {
  Component out;
  out.mu = draw_mvn(hyper.b0, hyper.B0, rng);
  out.sigma = draw_inv_wishart(hyper.c0, hyper.C0, rng);
  return out;
}

GaussianKernel::Hyper GaussianKernel::update_shared_hyper(std::span<const Component> filled, const Hyper& hyper,
                                                          RandomSource& rng) {
  if (filled.empty()) throw Error(ErrorKind::contract, "gaussian hyper update needs at least one filled component");
  Eigen::MatrixXd scale = hyper.G0.matrix();
  for (const Component& c : filled) scale += c.sigma.inverse();
  Hyper out = hyper;
  out.C0 = draw_wishart(hyper.g0 + static_cast<double>(filled.size()) * hyper.c0, SpdMatrix(symmetrize(scale)), rng);
  return out;
}

GaussianKernel::Component GaussianKernel::initial_estimate(const Data& data, std::span<const std::size_t> members,
                                                           const Hyper& /*hyper*/) {
  const int r = data.dim();
  Component out;
  out.mu = Eigen::VectorXd::Zero(r);
  for (std::size_t i : members) out.mu += data.y.row(static_cast<Eigen::Index>(i)).transpose();
  if (!members.empty()) out.mu /= static_cast<double>(members.size());

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t i : members) {
    const Eigen::VectorXd d = data.y.row(static_cast<Eigen::Index>(i)).transpose() - out.mu;
    cov.noalias() += d * d.transpose();
  }
  if (members.size() > 1) cov /= static_cast<double>(members.size() - 1);

  const Eigen::RowVectorXd col_mean = data.y.colwise().mean();
  const Eigen::VectorXd data_var =
      ((data.y.rowwise() - col_mean).array().square().colwise().sum() / std::max<double>(1.0, data.size() - 1.0))
          .transpose();
  cov += Eigen::MatrixXd((1e-6 * data_var).asDiagonal());
  out.sigma = SpdMatrix(symmetrize(cov));
  return out;
}

Eigen::MatrixXd GaussianKernel::embed(const Data& data) { return data.y; }

// ----------------------------------------------------------------------------
// Categorical (latent class)
// ----------------------------------------------------------------------------

CategoricalKernel::Prepared CategoricalKernel::prepare(const Component& theta) {
  Prepared p;
  p.log_pi.reserve(theta.pi.size());
  for (const auto& row : theta.pi) p.log_pi.push_back(row.array().log().matrix());
  return p;
}

double CategoricalKernel::loglik(const Prepared& p, const Data& data, std::size_t i) {
  const auto row = data.row(i);
  double ll = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) ll += p.log_pi[j](row[j]);
  return ll;
}

CategoricalKernel::Component CategoricalKernel::draw_posterior(const Data& data, std::span<const std::size_t> members,
                                                               const Component& /*current*/, const Hyper& hyper,
                                                               RandomSource& rng) {
  require_members(members, "categorical");
  Component out;
  out.pi.reserve(data.levels.size());
  for (std::size_t j = 0; j < data.levels.size(); ++j) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(data.levels[j], hyper.prior);
    for (std::size_t i : members) alpha(data.row(i)[j]) += 1.0;
    out.pi.push_back(draw_dirichlet(alpha, rng));
  }
  return out;
}

CategoricalKernel::Component CategoricalKernel::draw_prior(const Hyper& hyper, RandomSource& rng) {
  Component out;
  out.pi.reserve(hyper.levels.size());
  for (int d : hyper.levels) out.pi.push_back(draw_dirichlet(Eigen::VectorXd::Constant(d, hyper.prior), rng));
  return out;
}

CategoricalKernel::Hyper CategoricalKernel::update_shared_hyper(std::span<const Component> filled, const Hyper& hyper,
                                                                RandomSource& /*rng*/) {
  if (filled.empty()) throw Error(ErrorKind::contract, "hyper update needs at least one filled component");
  return hyper;
}

CategoricalKernel::Component CategoricalKernel::initial_estimate(const Data& data,
                                                                 std::span<const std::size_t> members,
                                                                 const Hyper& /*hyper*/) {
  Component out;
  for (std::size_t j = 0; j < data.levels.size(); ++j) {
    Eigen::VectorXd freq = Eigen::VectorXd::Ones(data.levels[j]);
    for (std::size_t i : members) freq(data.row(i)[j]) += 1.0;
    out.pi.push_back(freq / freq.sum());
  }
  return out;
}

Eigen::MatrixXd CategoricalKernel::embed(const Data& data) {
  int width = 0;
  for (int d : data.levels) width += d;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), width);
  for (std::size_t i = 0; i < data.size(); ++i) {
    int offset = 0;
    const auto row = data.row(i);
    for (std::size_t j = 0; j < data.levels.size(); ++j) {
      out(static_cast<Eigen::Index>(i), offset + row[j]) = 1.0;
      offset += data.levels[j];
    }
  }
  return out;
}

// ----------------------------------------------------------------------------
// Markov chain
// ----------------------------------------------------------------------------

MarkovKernel::Prepared MarkovKernel::prepare(const Component& theta) {
  Prepared p;
  p.log_xi = theta.xi.unaryExpr([](double x) { return x > 0.0 ? std::log(x) : kNegInf; });
  return p;
}

double MarkovKernel::loglik(const Prepared& p, const Data& data, std::size_t i) {
  const Eigen::MatrixXi& n = data.transitions[i].counts;
  double ll = 0.0;
  for (Eigen::Index j = 0; j < n.rows(); ++j) {
    for (Eigen::Index l = 0; l < n.cols(); ++l) {
      if (n(j, l) > 0) ll += n(j, l) * p.log_xi(j, l);
    }
  }
  return ll;
}

MarkovKernel::Component MarkovKernel::draw_posterior(const Data& data, std::span<const std::size_t> members,
                                                     const Component& /*current*/, const Hyper& hyper,
                                                     RandomSource& rng) {
  require_members(members, "markov");
  Eigen::MatrixXd alpha = hyper.delta;
  for (std::size_t i : members) alpha += data.transitions[i].counts.cast<double>();
  Component out;
  out.xi.resize(alpha.rows(), alpha.cols());
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    out.xi.row(j) = draw_dirichlet(Eigen::VectorXd(alpha.row(j).transpose()), rng).transpose();
  }
  return out;
}

MarkovKernel::Component MarkovKernel::draw_prior(const Hyper& hyper, RandomSource& rng) {
  Component out;
  out.xi.resize(hyper.delta.rows(), hyper.delta.cols());
  for (Eigen::Index j = 0; j < hyper.delta.rows(); ++j) {
    out.xi.row(j) = draw_dirichlet(Eigen::VectorXd(hyper.delta.row(j).transpose()), rng).transpose();
  }
  return out;
}

MarkovKernel::Hyper MarkovKernel::update_shared_hyper(std::span<const Component> filled, const Hyper& hyper,
                                                      RandomSource& /*rng*/) {
  if (filled.empty()) throw Error(ErrorKind::contract, "hyper update needs at least one filled component");
  return hyper;
}

MarkovKernel::Component MarkovKernel::initial_estimate(const Data& data, std::span<const std::size_t> members,
                                                       const Hyper& hyper) {
  Eigen::MatrixXd acc = hyper.delta;
  for (std::size_t i : members) acc += data.transitions[i].counts.cast<double>();
  for (Eigen::Index j = 0; j < acc.rows(); ++j) {
    const double s = acc.row(j).sum();
    if (s > 0.0) {
      acc.row(j) /= s;
    } else {
      acc.row(j).setConstant(1.0 / static_cast<double>(acc.cols()));
    }
  }
  return Component{acc};
}

Eigen::MatrixXd MarkovKernel::embed(const Data& data) {
  const int l = data.states;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), l * l);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::MatrixXi& n = data.transitions[i].counts;
    for (int j = 0; j < l; ++j) {
      const double s = n.row(j).sum();
      for (int k = 0; k < l; ++k) {
        out(static_cast<Eigen::Index>(i), j * l + k) = s > 0 ? n(j, k) / s : 1.0 / l;
      }
    }
  }
  return out;
}

// ----------------------------------------------------------------------------
// Flattening
// ----------------------------------------------------------------------------

KernelKind kind_of(const ComponentParams& theta) {
  return std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GaussianComponent>) return KernelKind::gaussian;
        else if constexpr (std::is_same_v<T, CategoricalComponent>) return KernelKind::categorical;
        else return KernelKind::markov;
      },
      theta);
}

std::vector<double> flatten(const ComponentParams& theta) {
  std::vector<double> out;
  std::visit(
      [&out](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GaussianComponent>) {
          const auto r = c.mu.size();
          out.assign(c.mu.data(), c.mu.data() + r);
          for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = i; j < r; ++j) out.push_back(c.sigma(static_cast<int>(i), static_cast<int>(j)));
        } else if constexpr (std::is_same_v<T, CategoricalComponent>) {
          for (const auto& row : c.pi) out.insert(out.end(), row.data(), row.data() + row.size());
        } else {
          for (Eigen::Index j = 0; j < c.xi.rows(); ++j)
            for (Eigen::Index l = 0; l < c.xi.cols(); ++l) out.push_back(c.xi(j, l));
        }
      },
      theta);
  return out;
}

std::vector<std::string> parameter_names(const ComponentParams& theta) {
  std::vector<std::string> out;
  std::visit(
      [&out](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GaussianComponent>) {
          const auto r = c.mu.size();
          for (Eigen::Index i = 0; i < r; ++i) out.push_back("mu[" + std::to_string(i + 1) + "]");
          for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = i; j < r; ++j)
              out.push_back("sigma[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
        } else if constexpr (std::is_same_v<T, CategoricalComponent>) {
          for (std::size_t j = 0; j < c.pi.size(); ++j)
            for (Eigen::Index l = 0; l < c.pi[j].size(); ++l)
              out.push_back("pi[" + std::to_string(j + 1) + "," + std::to_string(l + 1) + "]");
        } else {
          for (Eigen::Index j = 0; j < c.xi.rows(); ++j)
            for (Eigen::Index l = 0; l < c.xi.cols(); ++l)
              out.push_back("xi[" + std::to_string(j + 1) + "," + std::to_string(l + 1) + "]");
        }
      },
      theta);
  return out;
}

}  // namespace mixclips
