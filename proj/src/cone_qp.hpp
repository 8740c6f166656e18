#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sced::detail {

// minimize 1/2 x'Px + q'x  s.t.  Ax = b,  Gx + s = h,  s in K
// K = nonnegative orthant of size orthant_dim, then second-order cones.
struct ConeQpData {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  int orthant_dim = 0;
  std::vector<int> soc_dims;
};

struct ConeQpSettings {
  double tol = 1e-8;
  int max_iter = 100;
  bool equilibrate = true;
};

enum class ConeQpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct ConeQpResult {
  ConeQpStatus status = ConeQpStatus::NumericalFailure;
  Eigen::VectorXd x, y, z, s;
  int iterations = 0;
  double pcost = 0.0;
  double dcost = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  // Phase-one multipliers when the problem is infeasible.
  Eigen::VectorXd cert_y, cert_z;
};

ConeQpResult solve_cone_qp(const ConeQpData& data, const ConeQpSettings& settings = {});

}  // namespace sced::detail
