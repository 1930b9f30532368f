#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "eeg/error.hpp"
#include "eeg/types.hpp"

namespace eeg {

/// Two-component PCA projection. Axes are unit length and mutually
/// orthogonal; each axis is signed so that its largest-magnitude component
/// is positive.
struct PcaProjection {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> axes;
  std::array<double, 2> explained_variance{};  // sample variance along each axis
  std::vector<std::array<double, 2>> points;
  std::vector<PromptLabel> labels;

  std::vector<double> reconstruct(std::size_t i) const {
    std::vector<double> out = mean;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] += points[i][0] * axes[0][k] + points[i][1] * axes[1][k];
    }
    return out;
  }
};

namespace detail {

inline void apply_sign_convention(Eigen::VectorXd& axis) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < axis.size(); ++k) {
    if (std::abs(axis[k]) > std::abs(axis[best])) best = k;
  }
  if (axis[best] < 0.0) axis = -axis;
}

}  // namespace detail

/// Centers on the mean and projects onto the top two eigenvectors of the
/// sample covariance (N - 1 denominator). When dim exceeds the point count
/// the eigenproblem is solved on the N x N Gram matrix instead.
template <typename T>
PcaProjection pca_project(std::span<const std::vector<T>> points,
                          std::span<const PromptLabel> labels = {}) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "pca needs at least 3 points");
  const std::size_t d = points.front().size();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "pca needs dim >= 2");
  if (!labels.empty() && labels.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "label count does not match point count");
  }

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != d) {
      throw Error(ErrorKind::ShapeMismatch, "point " + std::to_string(i) + " has length " +
                                                std::to_string(points[i].size()));
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double v = points[i][k];
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite point component");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const double denom = static_cast<double>(n - 1);

  std::array<double, 2> lambda{};
  std::array<Eigen::VectorXd, 2> axis;
  if (d <= n) {
    const Eigen::MatrixXd cov = (x.transpose() * x) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::Internal, "eigensolver failed");
    const auto m = static_cast<Eigen::Index>(d);
    for (int k = 0; k < 2; ++k) {
      lambda[k] = solver.eigenvalues()[m - 1 - k];
      axis[k] = solver.eigenvectors().col(m - 1 - k);
    }
  } else {
    const Eigen::MatrixXd gram = (x * x.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::Internal, "eigensolver failed");
    const auto m = static_cast<Eigen::Index>(n);
    for (int k = 0; k < 2; ++k) {
      lambda[k] = solver.eigenvalues()[m - 1 - k];
      axis[k] = x.transpose() * solver.eigenvectors().col(m - 1 - k);
    }
  }

  if (!(lambda[0] > 0.0) || !(lambda[1] > 1e-9 * lambda[0])) {
    throw Error(ErrorKind::Degenerate, "data has fewer than 2 nonzero principal directions");
  }

  PcaProjection out;
  out.mean.assign(mean.data(), mean.data() + d);
  for (int k = 0; k < 2; ++k) {
    axis[k].normalize();
    detail::apply_sign_convention(axis[k]);
    out.axes[k].assign(axis[k].data(), axis[k].data() + d);
    out.explained_variance[k] = lambda[k];
  }
  const Eigen::MatrixXd projected = x * (Eigen::MatrixXd(d, 2) << axis[0], axis[1]).finished();
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.points[i] = {projected(static_cast<Eigen::Index>(i), 0),
                     projected(static_cast<Eigen::Index>(i), 1)};
  }
  out.labels.assign(labels.begin(), labels.end());
  return out;
}

template <typename T>
PcaProjection pca_project(const std::vector<std::vector<T>>& points,
                          const std::vector<PromptLabel>& labels = {}) {
  return pca_project(std::span<const std::vector<T>>(points),
                     std::span<const PromptLabel>(labels));
}

}  // namespace eeg
