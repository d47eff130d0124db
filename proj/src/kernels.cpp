#include "htbo/kernels.hpp"

#include <cmath>
#include <sstream>

#include "htbo/errors.hpp"

namespace htbo {

ArmSet::ArmSet(Eigen::MatrixXd points) : points_(std::move(points)) {}

ArmSet ArmSet::unit_grid(Eigen::Index n) { return unit_grid(n, 1); }

ArmSet ArmSet::unit_grid(Eigen::Index per_dim, Eigen::Index dim) {
  if (per_dim < 1 || dim < 1) throw DomainError("unit_grid: need per_dim >= 1 and dim >= 1");
  Eigen::Index total = 1;
  for (Eigen::Index j = 0; j < dim; ++j) total *= per_dim;
  Eigen::MatrixXd pts(total, dim);
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index rem = i;
    for (Eigen::Index j = dim - 1; j >= 0; --j) {
      const Eigen::Index c = rem % per_dim;
      rem /= per_dim;
      pts(i, j) = per_dim == 1 ? 0.0 : static_cast<double>(c) / static_cast<double>(per_dim - 1);
    }
  }
  return ArmSet(std::move(pts));
}

ArmSet ArmSet::indexed(Eigen::Index n) {
  Eigen::MatrixXd pts(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) pts(i, 0) = static_cast<double>(i);
  return ArmSet(std::move(pts));
}

void ArmSet::validate(bool unit_cube) const {
  if (size() == 0 || dim() == 0) throw DomainError("arm set is empty");
  if (unit_cube && (points_.minCoeff() < 0.0 || points_.maxCoeff() > 1.0)) {
    throw DomainError("arm coordinates must lie in [0, 1]");
  }
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (Eigen::Index j = i + 1; j < size(); ++j) {
      if (points_.row(i) == points_.row(j)) {
        throw DomainError("arm set contains duplicate points " + std::to_string(i) + " and " +
                          std::to_string(j));
      }
    }
  }
}

Kernel::Kernel(Variant v) : variant_(std::move(v)) {}

Kernel Kernel::squared_exponential(double lengthscale) {
  if (!(lengthscale > 0.0)) throw ConfigError("SE lengthscale must be positive");
  return Kernel(SquaredExponential{lengthscale});
}

Kernel Kernel::matern(double lengthscale, MaternSmoothness smoothness) {
  if (!(lengthscale > 0.0)) throw ConfigError("Matern lengthscale must be positive");
  return Kernel(Matern{lengthscale, smoothness});
}

Kernel Kernel::linear() { return Kernel(Linear{}); }

Kernel Kernel::empirical(Eigen::MatrixXd matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw DegenerateDataError("empirical kernel matrix must be square and non-empty");
  }
  return Kernel(Empirical{std::make_shared<const Eigen::MatrixXd>(std::move(matrix))});
}

namespace {

Eigen::Index empirical_index(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index n) {
  if (x.size() != 1) throw DomainError("empirical kernel: points must be 1-d indices");
  const double v = x(0);
  if (!(v >= 0.0) || v >= static_cast<double>(n) || std::floor(v) != v) {
    throw DomainError("empirical kernel: point is not an arm index of the kernel's grid");
  }
  return static_cast<Eigen::Index>(v);
}

double matern_closed_form(double r, double l, MaternSmoothness nu) {
  switch (nu) {
    case MaternSmoothness::kHalf:
      return std::exp(-r / l);
    case MaternSmoothness::kThreeHalves: {
      const double z = std::sqrt(3.0) * r / l;
      return (1.0 + z) * std::exp(-z);
    }
    case MaternSmoothness::kFiveHalves: {
      const double z = std::sqrt(5.0) * r / l;
      return (1.0 + z + 5.0 * r * r / (3.0 * l * l)) * std::exp(-z);
    }
  }
  return 0.0;
}

}  // namespace

double Kernel::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Empirical>) {
          const auto n = k.matrix->rows();
          return (*k.matrix)(empirical_index(x, n), empirical_index(y, n));
        } else {
          if (x.size() != y.size()) throw DomainError("kernel: dimension mismatch");
          if constexpr (std::is_same_v<K, SquaredExponential>) {
            const double r2 = (x - y).squaredNorm();
            return std::exp(-r2 / (2.0 * k.lengthscale * k.lengthscale));
          } else if constexpr (std::is_same_v<K, Matern>) {
            return matern_closed_form((x - y).norm(), k.lengthscale, k.smoothness);
          } else {
            return x.dot(y) / static_cast<double>(x.size());
          }
        }
      },
      variant_);
}

std::string Kernel::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SquaredExponential>) {
          os << "se(l=" << k.lengthscale << ")";
        } else if constexpr (std::is_same_v<K, Matern>) {
          const char* nu = k.smoothness == MaternSmoothness::kHalf          ? "0.5"
                           : k.smoothness == MaternSmoothness::kThreeHalves ? "1.5"
                                                                             : "2.5";
          os << "matern(l=" << k.lengthscale << ", nu=" << nu << ")";
        } else if constexpr (std::is_same_v<K, Linear>) {
          os << "linear";
        } else {
          os << "empirical(n=" << k.matrix->rows() << ")";
        }
      },
      variant_);
  return os.str();
}

Eigen::MatrixXd gram(const Kernel& kernel, const ArmSet& arms) {
  const Eigen::Index n = arms.size();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = kernel.evaluate(arms.points().row(i).transpose(), arms.points().row(i).transpose());
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v =
          kernel.evaluate(arms.points().row(i).transpose(), arms.points().row(j).transpose());
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd cross_gram(const Kernel& kernel, const ArmSet& rows, const ArmSet& cols) {
  Eigen::MatrixXd g(rows.size(), cols.size());
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols.size(); ++j) {
      g(i, j) = kernel.evaluate(rows.points().row(i).transpose(), cols.points().row(j).transpose());
    }
  }
  return g;
}

Kernel empirical_kernel_from_samples(const Eigen::MatrixXd& samples) {
  const Eigen::Index n_obs = samples.rows();
  const Eigen::Index n_arms = samples.cols();
  if (n_obs < 2) throw DegenerateDataError("empirical kernel: need at least 2 observations");
  if (n_arms < 1) throw DegenerateDataError("empirical kernel: need at least one arm");

  Eigen::MatrixXd z = samples;
  for (Eigen::Index c = 0; c < n_arms; ++c) {
    const double mean = z.col(c).mean();
    z.col(c).array() -= mean;
    const double var = z.col(c).squaredNorm() / static_cast<double>(n_obs - 1);
    if (!(var > 0.0)) {
      throw DegenerateDataError("empirical kernel: column " + std::to_string(c) +
                                " has zero variance");
    }
    z.col(c) /= std::sqrt(var);
  }
  Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n_obs - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd repaired =
      eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  repaired = 0.5 * (repaired + repaired.transpose()).eval();
  const double max_diag = repaired.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) throw DegenerateDataError("empirical kernel: covariance vanished");
  repaired /= max_diag;
  return Kernel::empirical(std::move(repaired));
}

}  // namespace htbo
