#pragma once

#include <memory>
#include <vector>

#include "rpz/bases.hpp"

namespace rpz::detail {

Basis make_basis(BasisKind kind, double p, std::shared_ptr<const OrthonormalSystem> system, Eigen::MatrixXcd combo,
                 std::vector<double> norms, std::vector<std::vector<cplx>> fekete);

Eigen::VectorXcd project(const OrthonormalSystem& sys, const Eigen::VectorXcd& values, int n);

}  // namespace rpz::detail
