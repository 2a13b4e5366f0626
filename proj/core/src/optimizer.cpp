#include "trgnss/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "trgnss/error.hpp"

namespace trgnss {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Solver = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

Eigen::Matrix3d sqrt_information(const Eigen::Matrix3d& info) {
  Eigen::LLT<Eigen::Matrix3d> llt(info);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularNormalEquations, "factor information not PD");
  return llt.matrixU();
}

/// Whitened system: residual r and Jacobian J with cost = |r|^2.
struct Linearization {
  SparseMatrix jacobian;
  std::vector<Eigen::Matrix3d> velocity_sqrt;
  std::vector<Eigen::Matrix3d> trrtk_sqrt;
};

Linearization build_jacobian(const Graph& g) {
  Linearization lin;
  std::vector<Triplet> t;
  int row = 0;
  auto add_block = [&](int r, int node, const Eigen::Matrix<double, 3, kStateDim>& block) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < kStateDim; ++j)
        if (block(i, j) != 0.0) t.emplace_back(r + i, node * kStateDim + j, block(i, j));
  };
  for (const auto& f : g.velocity_factors) {
    const Eigen::Matrix3d s = sqrt_information(f.information);
    lin.velocity_sqrt.push_back(s);
    const auto [ji, jj] = jacobian_velocity(f);
    add_block(row, f.node_i, s * ji);
    add_block(row, f.node_j, s * jj);
    row += 3;
  }
  for (const auto& f : g.trrtk_factors) {
    const Eigen::Matrix3d s = sqrt_information(f.information);
    lin.trrtk_sqrt.push_back(s);
    const auto [jp, jc] = jacobian_trrtk(f);
    add_block(row, f.node_past, s * jp);
    add_block(row, f.node_current, s * jc);
    row += 3;
  }
  for (const auto& f : g.pseudorange_factors) {
    const double s = std::sqrt(f.information);
    const auto h = jacobian_pseudorange(f);
    for (int j = 0; j < kStateDim; ++j)
      if (h(j) != 0.0) t.emplace_back(row, f.node * kStateDim + j, s * h(j));
    ++row;
  }
  for (const auto& p : g.priors) {
    t.emplace_back(row, p.node * kStateDim + p.dimension, std::sqrt(p.information));
    ++row;
  }
  lin.jacobian.resize(row, static_cast<Eigen::Index>(g.node_count()) * kStateDim);
  lin.jacobian.setFromTriplets(t.begin(), t.end());
  lin.jacobian.makeCompressed();
  return lin;
}

Eigen::VectorXd whitened_residual(const Graph& g, const Linearization& lin, const std::vector<StateVector>& x) {
  Eigen::VectorXd r(lin.jacobian.rows());
  int row = 0;
  for (std::size_t k = 0; k < g.velocity_factors.size(); ++k) {
    const auto& f = g.velocity_factors[k];
    r.segment<3>(row) = lin.velocity_sqrt[k] * residual_velocity(f, x[f.node_i], x[f.node_j]);
    row += 3;
  }
  for (std::size_t k = 0; k < g.trrtk_factors.size(); ++k) {
    const auto& f = g.trrtk_factors[k];
    r.segment<3>(row) = lin.trrtk_sqrt[k] * residual_trrtk(f, x[f.node_past], x[f.node_current]);
    row += 3;
  }
  for (const auto& f : g.pseudorange_factors) r(row++) = std::sqrt(f.information) * residual_pseudorange(f, x[f.node]);
  for (const auto& p : g.priors) r(row++) = std::sqrt(p.information) * (x[p.node].values(p.dimension) - p.mean);
  return r;
}

std::vector<StateVector> apply_step(const std::vector<StateVector>& x, const Eigen::VectorXd& h) {
  std::vector<StateVector> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].values += h.segment<kStateDim>(static_cast<Eigen::Index>(i) * kStateDim);
  return out;
}

/// Rebuilds rows of nodes that moved beyond the threshold. Returns true when anything changed.
bool relinearize(Graph& g, const std::vector<StateVector>& x, double threshold) {
  bool changed = false;
  for (auto& f : g.pseudorange_factors) {
    const EcefVector offset = x[f.node].position_offset();
    if ((offset - f.linearization_point).norm() > threshold) {
      linearize_pseudorange(f, g.origin, offset);
      changed = true;
    }
  }
  return changed;
}

}  // namespace

OptimizationResult optimize(const Graph& graph, const OptimizerConfig& config) {
  if (graph.node_count() == 0) throw Error(ErrorCode::EmptyInput, "graph has no nodes");
  OptimizationResult out;
  out.graph = graph;
  Graph& g = out.graph;
  std::vector<StateVector> x = g.initial_states;

  Linearization lin = build_jacobian(g);
  std::optional<Solver> solver;
  Eigen::VectorXd r = whitened_residual(g, lin, x);
  double cost = r.squaredNorm();
  double radius = config.initial_radius;

  OptimizerReport& report = out.report;
  report.initial_cost = cost;
  report.costs.push_back(cost);
  report.segment_starts.push_back(0);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    report.iterations = iter + 1;
    const Eigen::VectorXd grad = lin.jacobian.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) {
      report.converged = true;
      break;
    }
    if (!solver) {
      const SparseMatrix normal = SparseMatrix(lin.jacobian.transpose() * lin.jacobian);
      solver.emplace();
      solver->compute(normal);
      if (solver->info() != Eigen::Success || (solver->vectorD().array() <= 0.0).any()) {
        throw Error(ErrorCode::SingularNormalEquations, "normal equations are not positive definite");
      }
    }
    const Eigen::VectorXd h_gn = solver->solve(-grad);
    const Eigen::VectorXd jg = lin.jacobian * grad;
    const double alpha = grad.squaredNorm() / std::max(jg.squaredNorm(), 1e-300);
    const Eigen::VectorXd h_sd = -alpha * grad;

    Eigen::VectorXd step;
    if (h_gn.norm() <= radius) {
      step = h_gn;
    } else if (h_sd.norm() >= radius) {
      step = -(radius / grad.norm()) * grad;
    } else {
      // beta solves |h_sd + beta (h_gn - h_sd)| = radius
      const Eigen::VectorXd d = h_gn - h_sd;
      const double a = d.squaredNorm();
      const double b = 2.0 * h_sd.dot(d);
      const double c = h_sd.squaredNorm() - radius * radius;
      const double beta = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
      step = h_sd + beta * d;
    }

    const double predicted = cost - (r + lin.jacobian * step).squaredNorm();
    std::vector<StateVector> candidate = apply_step(x, step);
    const Eigen::VectorXd r_new = whitened_residual(g, lin, candidate);
    const double new_cost = r_new.squaredNorm();
    const double actual = cost - new_cost;
    const double gain = predicted > 0.0 ? actual / predicted : -1.0;

    if (new_cost <= cost) {
      x = std::move(candidate);
      r = r_new;
      const double old_cost = cost;
      cost = new_cost;
      report.costs.push_back(cost);
      if (gain > 0.75) radius = std::min(2.0 * radius, config.max_radius);
      else if (gain < 0.25) radius *= 0.25;

      if (relinearize(g, x, config.relinearization_threshold)) {
        ++report.relinearizations;
        lin = build_jacobian(g);
        solver.reset();
        r = whitened_residual(g, lin, x);
        cost = r.squaredNorm();
        report.segment_starts.push_back(report.costs.size());
        report.costs.push_back(cost);
        continue;
      }
      if (old_cost - cost <= config.relative_tolerance * old_cost) {
        report.converged = true;
        break;
      }
    } else {
      ++report.rejected_steps;
      radius *= 0.25;
    }

    const double x_scale = [&] {
      double s = 0.0;
      for (const auto& v : x) s = std::max(s, v.values.lpNorm<Eigen::Infinity>());
      return s;
    }();
    if (radius < 1e-12 * (x_scale + 1e-12) || std::abs(predicted) <= 1e-15 * std::max(cost, 1e-300)) {
      // Trust region collapsed or no further decrease is representable.
      report.converged = true;
      break;
    }
  }
  report.final_cost = cost;
  out.states = std::move(x);
  return out;
}

}  // namespace trgnss
