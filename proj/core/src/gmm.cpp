#include "bbgan/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bbgan/error.hpp"
#include "bbgan/logging.hpp"

namespace bbgan {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_matrix(const std::vector<Vector>& data) {
  const auto n = static_cast<Index>(data.size());
  const auto d = static_cast<Index>(data.front().size());
  MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(data[static_cast<std::size_t>(i)].size()) != d) {
      throw DimensionError("GMM data rows have inconsistent dimensions");
    }
    for (Index j = 0; j < d; ++j) x(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return x;
}

// Projection of a scatter matrix onto {eigenvalues >= floor}. This is the
// exact maximizer of the Gaussian likelihood under that constraint.
MatrixXd floor_eigenvalues(const MatrixXd& scatter, double floor) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const VectorXd values = eig.eigenvalues();
  if (values.minCoeff() >= floor) return scatter;
  const VectorXd clipped = values.cwiseMax(floor);
  MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

struct Prepared {
  Eigen::LLT<MatrixXd> llt;
  double log_norm = 0.0;  // log weight - 0.5 (d log 2pi + log det)
};

std::vector<Prepared> prepare(const std::vector<GmmComponent>& comps, Index d) {
  std::vector<Prepared> out;
  out.reserve(comps.size());
  for (const auto& c : comps) {
    Prepared p;
    p.llt.compute(c.covariance);
    if (p.llt.info() != Eigen::Success) throw NumericalError("component covariance is not positive-definite");
    const double logdet = 2.0 * p.llt.matrixLLT().diagonal().array().log().sum();
    p.log_norm = std::log(c.weight) - 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet);
    out.push_back(std::move(p));
  }
  return out;
}

// Per-point, per-component log(w_k N(x | m_k, S_k)).
MatrixXd component_log_densities(const MatrixXd& x, const std::vector<GmmComponent>& comps) {
  const auto prepared = prepare(comps, x.cols());
  MatrixXd out(x.rows(), static_cast<Index>(comps.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const MatrixXd centered = (x.rowwise() - comps[k].mean.transpose()).transpose();
    const MatrixXd solved = prepared[k].llt.matrixL().solve(centered);
    out.col(static_cast<Index>(k)) =
        (prepared[k].log_norm - 0.5 * solved.colwise().squaredNorm().array()).matrix().transpose();
  }
  return out;
}

double logsumexp_row(const MatrixXd& m, Index r) {
  const double top = m.row(r).maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((m.row(r).array() - top).exp().sum());
}

std::vector<Index> kmeanspp(const MatrixXd& x, std::size_t k, SeededSampler& rng) {
  const Index n = x.rows();
  std::vector<Index> centers{static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))};
  VectorXd dist2 = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (centers.size() < k) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= dist2(i);
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

// M-step from responsibilities; drops components with no mass.
std::vector<GmmComponent> m_step(const MatrixXd& x, const MatrixXd& resp, double floor) {
  const auto n = static_cast<double>(x.rows());
  std::vector<GmmComponent> comps;
  std::size_t pruned = 0;
  for (Index k = 0; k < resp.cols(); ++k) {
    const double nk = resp.col(k).sum();
    if (!(nk > 1e-10)) {
      ++pruned;
      continue;
    }
    GmmComponent c;
    c.weight = nk / n;
    c.mean = (x.transpose() * resp.col(k)) / nk;
    const MatrixXd centered = x.rowwise() - c.mean.transpose();
    MatrixXd scatter = (centered.transpose() * resp.col(k).asDiagonal() * centered) / nk;
    scatter = 0.5 * (scatter + scatter.transpose());
    c.covariance = floor_eigenvalues(scatter, floor);
    comps.push_back(std::move(c));
  }
  if (pruned > 0) log_warning("GMM pruned " + std::to_string(pruned) + " empty component(s)");
  if (comps.empty()) throw NumericalError("every GMM component collapsed");
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return comps;
}

}  // namespace

double GmmModel::log_density(std::span<const double> x) const {
  if (x.size() != dims) throw DimensionError("GMM query has the wrong dimension");
  MatrixXd row(1, static_cast<Index>(dims));
  for (std::size_t j = 0; j < dims; ++j) row(0, static_cast<Index>(j)) = x[j];
  return logsumexp_row(component_log_densities(row, components), 0);
}

GmmModel fit_gmm(const std::vector<Vector>& data, std::size_t k, SeededSampler& rng) {
  return fit_gmm(data, k, rng, GmmOptions{});
}

GmmModel fit_gmm(const std::vector<Vector>& data, std::size_t k, SeededSampler& rng, const GmmOptions& options) {
  if (k == 0) throw ConfigError("gmm.components", "must be at least 1");
  if (data.size() <= k) {
    throw ConfigError("gmm.components", "k = " + std::to_string(k) + " needs more than k data points, got " +
                                            std::to_string(data.size()));
  }
  if (data.front().empty()) throw DimensionError("GMM data must have at least one dimension");
  const MatrixXd x = to_matrix(data);
  const Index n = x.rows();

  // Hard assignment to the nearest seed, then a first M-step.
  const auto seeds = kmeanspp(x, k, rng);
  MatrixXd resp = MatrixXd::Zero(n, static_cast<Index>(k));
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double dd = (x.row(i) - x.row(seeds[c])).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = static_cast<Index>(c);
      }
    }
    resp(i, best) = 1.0;
  }

  GmmModel model;
  model.dims = static_cast<std::size_t>(x.cols());
  model.components = m_step(x, resp, options.regularization);

  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const MatrixXd logp = component_log_densities(x, model.components);
    double ll = 0.0;
    resp.resize(n, logp.cols());
    for (Index i = 0; i < n; ++i) {
      const double lse = logsumexp_row(logp, i);
      ll += lse;
      resp.row(i) = (logp.row(i).array() - lse).exp();
    }
    model.log_likelihood_trace.push_back(ll);
    model.iterations = it + 1;
    if (std::isfinite(previous) && (ll - previous) / static_cast<double>(n) < options.tolerance) {
      model.converged = true;
      break;
    }
    previous = ll;
    model.components = m_step(x, resp, options.regularization);
  }
  return model;
}

std::vector<Vector> gmm_sample(const GmmModel& model, std::size_t count, SeededSampler& rng) {
  if (model.components.empty()) throw ConfigError("gmm", "model has no components");
  std::vector<Eigen::MatrixXd> factors;
  for (const auto& c : model.components) {
    Eigen::LLT<MatrixXd> llt(c.covariance);
    if (llt.info() != Eigen::Success) throw NumericalError("component covariance is not positive-definite");
    factors.push_back(llt.matrixL());
  }
  const auto d = static_cast<Index>(model.dims);
  std::vector<Vector> out;
  out.reserve(count);
  VectorXd z(d);
  for (std::size_t i = 0; i < count; ++i) {
    double u = rng.uniform();
    std::size_t pick = model.components.size() - 1;
    for (std::size_t c = 0; c < model.components.size(); ++c) {
      if (model.components[c].weight <= 0.0) continue;
      u -= model.components[c].weight;
      if (u < 0.0) {
        pick = c;
        break;
      }
    }
    while (model.components[pick].weight <= 0.0 && pick > 0) --pick;
    for (Index j = 0; j < d; ++j) z(j) = rng.normal();
    const VectorXd draw = model.components[pick].mean + factors[pick] * z;
    Vector v(model.dims);
    for (Index j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = std::clamp(draw(j), -1.0, 1.0);
    out.push_back(std::move(v));
  }
  return out;
}

std::size_t gmm_components(double fraction, std::size_t samples) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples)));
  return std::max<std::size_t>(1, k);
}

}  // namespace bbgan
