#include "rampc/polytope.hpp"

#include <nlohmann/json.hpp>

namespace rampc {

HPolytope HPolytope::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n || n == 0) {
    throw std::invalid_argument("HPolytope::box: inconsistent bounds");
  }
  if ((upper - lower).minCoeff() < 0.0) {
    throw std::invalid_argument("HPolytope::box: lower exceeds upper");
  }
  HPolytope P;
  P.H.setZero(2 * n, n);
  P.h.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    P.H(i, i) = 1.0;
    P.h(i) = upper(i);
    P.H(n + i, i) = -1.0;
    P.h(n + i) = -lower(i);
  }
  return P;
}

nlohmann::json HPolytope::to_json() const {
  nlohmann::json j;
  j["H"] = nlohmann::json::array();
  for (int i = 0; i < rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < dim(); ++c) row.push_back(H(i, c));
    j["H"].push_back(row);
  }
  j["h"] = std::vector<double>(h.data(), h.data() + h.size());
  return j;
}

HPolytope HPolytope::from_json(const nlohmann::json& j) {
  const auto& jh = j.at("H");
  const int r = static_cast<int>(jh.size());
  if (r == 0) throw std::invalid_argument("polytope json: empty H");
  const int n = static_cast<int>(jh.at(0).size());
  HPolytope P;
  P.H.resize(r, n);
  for (int i = 0; i < r; ++i) {
    for (int c = 0; c < n; ++c) P.H(i, c) = jh.at(i).at(c).get<double>();
  }
  const auto hv = j.at("h").get<std::vector<double>>();
  if (static_cast<int>(hv.size()) != r) {
    throw std::invalid_argument("polytope json: H/h row mismatch");
  }
  P.h = Eigen::Map<const Eigen::VectorXd>(hv.data(), r);
  return P;
}

Hyperbox Hyperbox::cube(const Eigen::VectorXd& center, double side) {
  if (side < 0.0) throw std::invalid_argument("Hyperbox::cube: negative side");
  Hyperbox b;
  b.lo = center.array() - side / 2.0;
  b.hi = center.array() + side / 2.0;
  return b;
}

Hyperbox Hyperbox::bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size() || ((hi - lo).array() < 0.0).any()) {
    throw std::invalid_argument("Hyperbox::bounds: lower exceeds upper");
  }
  return Hyperbox{lo, hi};
}

double support(const HPolytope& P, const Eigen::VectorXd& direction) {
  if (direction.size() != P.dim()) {
    throw std::invalid_argument("support: direction dimension mismatch");
  }
  LinearProgram lp{direction, P.H, P.h};
  const SolveReport r = lp_solve(lp);
  switch (r.status) {
    case SolveStatus::Optimal: return r.objective;
    case SolveStatus::Unbounded:
      throw UnboundedSetError("support: polytope unbounded in requested direction");
    case SolveStatus::Infeasible:
      throw EmptySetError("support: empty polytope");
    default:
      throw std::runtime_error("support: LP iteration cap exceeded");
  }
}

std::vector<Eigen::VectorXd> box_vertices(const Hyperbox& B) {
  const int p = B.dim();
  if (p > 20) throw std::invalid_argument("box_vertices: dimension exceeds 2^p guard");
  if (p == 0) return {};

  std::vector<int> active;  // axes with nonzero width
  for (int i = 0; i < p; ++i) {
    if (B.hi(i) - B.lo(i) > 0.0) active.push_back(i);
  }
  const size_t count = size_t{1} << active.size();
  std::vector<Eigen::VectorXd> verts;
  verts.reserve(count);
  for (size_t mask = 0; mask < count; ++mask) {
    Eigen::VectorXd v = B.center();
    for (size_t b = 0; b < active.size(); ++b) {
      const int axis = active[b];
      v(axis) = (mask >> b) & 1 ? B.hi(axis) : B.lo(axis);
    }
    verts.push_back(std::move(v));
  }
  return verts;
}

HPolytope remove_redundant(const HPolytope& P, int protect_rows) {
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> offs;
  for (int i = 0; i < P.rows(); ++i) {
    rows.push_back(P.H.row(i).transpose());
    offs.push_back(P.h(i));
  }

  size_t i = static_cast<size_t>(std::max(protect_rows, 0));
  while (i < rows.size() && rows.size() > 1) {
    // Maximize row i over the polytope formed by all other kept rows.
    const int n = static_cast<int>(rows[i].size());
    Eigen::MatrixXd H(static_cast<int>(rows.size()) - 1, n);
    Eigen::VectorXd h(static_cast<int>(rows.size()) - 1);
    int r = 0;
    for (size_t k = 0; k < rows.size(); ++k) {
      if (k == i) continue;
      H.row(r) = rows[k].transpose();
      h(r) = offs[k];
      ++r;
    }
    const SolveReport rep = lp_solve({rows[i], H, h});
    const bool redundant =
        rep.status == SolveStatus::Optimal && rep.objective <= offs[i] + 1e-9;
    if (redundant) {
      rows.erase(rows.begin() + static_cast<long>(i));
      offs.erase(offs.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }

  HPolytope out;
  out.H.resize(static_cast<int>(rows.size()), P.dim());
  out.h.resize(static_cast<int>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    out.H.row(static_cast<int>(k)) = rows[k].transpose();
    out.h(static_cast<int>(k)) = offs[k];
  }
  return out;
}

}  // namespace rampc
