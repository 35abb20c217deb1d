#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace airfl {

/// Binary classification data; labels are strictly +1 / -1.
struct LabeledDataset {
  Eigen::MatrixXd features;  // N x d
  Eigen::VectorXd labels;    // N, entries in {+1, -1}

  long size() const { return features.rows(); }
  long dim() const { return features.cols(); }

  void validate() const {
    if (features.rows() < 1) throw std::invalid_argument("LabeledDataset: empty dataset");
    if (labels.size() != features.rows())
      throw std::invalid_argument("LabeledDataset: label count mismatch");
    for (long i = 0; i < labels.size(); ++i)
      if (labels[i] != 1.0 && labels[i] != -1.0)
        throw std::invalid_argument("LabeledDataset: labels must be +1 or -1");
    if (!features.allFinite())
      throw std::invalid_argument("LabeledDataset: features must be finite");
  }
};

enum class ObjectiveKind { hinge_svm, quadratic };

/// A learning objective over K client datasets with equal weights 1/K.
/// hinge_svm: mean max(0, 1 - y <w,x>) + (lambda/2)||w||^2 per client,
///            targets are +/-1 labels.
/// quadratic: (1/2N)||A w - b||^2 + (lambda/2)||w||^2 per client,
///            targets are real-valued regression targets.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::quadratic;
  double lambda = 0.0;
  std::vector<Eigen::MatrixXd> client_features;
  std::vector<Eigen::VectorXd> client_targets;

  int num_clients() const { return static_cast<int>(client_features.size()); }
  long dim() const { return client_features.empty() ? 0 : client_features[0].cols(); }

  void validate() const {
    if (lambda < 0.0) throw std::invalid_argument("Objective: lambda must be >= 0");
    if (client_features.empty()) throw std::invalid_argument("Objective: no clients");
    if (client_targets.size() != client_features.size())
      throw std::invalid_argument("Objective: targets/features client count mismatch");
    for (std::size_t k = 0; k < client_features.size(); ++k) {
      if (client_features[k].rows() < 1)
        throw std::invalid_argument("Objective: empty client dataset");
      if (client_features[k].cols() != dim())
        throw std::invalid_argument("Objective: inconsistent feature dimension");
      if (client_targets[k].size() != client_features[k].rows())
        throw std::invalid_argument("Objective: client target count mismatch");
    }
  }
};

/// Mini-batch gradient at client `k` over the given sample indices; unbiased
/// for the full local gradient under uniform sampling.
inline Eigen::VectorXd minibatch_gradient(const Objective& obj, int k,
                                          const Eigen::VectorXd& w,
                                          std::span<const std::size_t> batch) {
  if (batch.empty()) throw std::invalid_argument("minibatch_gradient: empty batch");
  const Eigen::MatrixXd& x = obj.client_features.at(k);
  const Eigen::VectorXd& t = obj.client_targets.at(k);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.size());
  for (std::size_t idx : batch) {
    if (idx >= static_cast<std::size_t>(x.rows()))
      throw std::out_of_range("minibatch_gradient: sample index out of range");
    const auto row = x.row(static_cast<long>(idx));
    if (obj.kind == ObjectiveKind::hinge_svm) {
      const double margin = t[static_cast<long>(idx)] * row.dot(w);
      if (margin < 1.0) grad -= t[static_cast<long>(idx)] * row.transpose();
    } else {
      const double residual = row.dot(w) - t[static_cast<long>(idx)];
      grad += residual * row.transpose();
    }
  }
  grad /= static_cast<double>(batch.size());
  grad += obj.lambda * w;
  return grad;
}

/// Loss of `w` on an arbitrary dataset under the objective's rule.
inline double loss(const Objective& obj, const Eigen::VectorXd& w,
                   const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
  if (features.rows() < 1) throw std::invalid_argument("loss: empty dataset");
  const long n = features.rows();
  double acc = 0.0;
  if (obj.kind == ObjectiveKind::hinge_svm) {
    for (long i = 0; i < n; ++i)
      acc += std::max(0.0, 1.0 - targets[i] * features.row(i).dot(w));
  } else {
    acc = 0.5 * (features * w - targets).squaredNorm();
  }
  return acc / static_cast<double>(n) + 0.5 * obj.lambda * w.squaredNorm();
}

/// Equal-weight global objective, (1/K) sum of per-client losses.
inline double global_loss(const Objective& obj, const Eigen::VectorXd& w) {
  double acc = 0.0;
  for (int k = 0; k < obj.num_clients(); ++k)
    acc += loss(obj, w, obj.client_features[k], obj.client_targets[k]);
  return acc / static_cast<double>(obj.num_clients());
}

/// Fraction of correct signs; sign(0) counts as +1.
inline double accuracy(const Eigen::VectorXd& w, const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels) {
  if (features.rows() < 1) throw std::invalid_argument("accuracy: empty dataset");
  long correct = 0;
  for (long i = 0; i < features.rows(); ++i) {
    const double score = features.row(i).dot(w);
    const double predicted = score >= 0.0 ? 1.0 : -1.0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

struct QuadraticConstants {
  double mu = 0.0;   // lambda + smallest eigenvalue of the average Gram
  double lip = 0.0;  // lambda + largest eigenvalue of the average Gram
  Eigen::VectorXd w_star;
  double f_star = 0.0;
};

/// Exact curvature extremes and minimizer of a quadratic objective, from the
/// spectrum of the average Gram matrix and the normal equations.
inline QuadraticConstants quadratic_constants(const Objective& obj) {
  if (obj.kind != ObjectiveKind::quadratic)
    throw std::invalid_argument("quadratic_constants: objective is not quadratic");
  obj.validate();
  const long d = obj.dim();
  const int k = obj.num_clients();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (int c = 0; c < k; ++c) {
    const double n = static_cast<double>(obj.client_features[c].rows());
    gram += obj.client_features[c].transpose() * obj.client_features[c] / n;
    rhs += obj.client_features[c].transpose() * obj.client_targets[c] / n;
  }
  gram /= static_cast<double>(k);
  rhs /= static_cast<double>(k);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("quadratic_constants: eigendecomposition failed");
  QuadraticConstants out;
  out.mu = obj.lambda + eig.eigenvalues().minCoeff();
  out.lip = obj.lambda + eig.eigenvalues().maxCoeff();
  if (!(out.mu > 0.0))
    throw std::runtime_error("quadratic_constants: objective is singular (mu <= 0)");

  Eigen::MatrixXd hessian = gram;
  hessian.diagonal().array() += obj.lambda;
  out.w_star = hessian.llt().solve(rhs);
  out.f_star = global_loss(obj, out.w_star);
  return out;
}

}  // namespace airfl
