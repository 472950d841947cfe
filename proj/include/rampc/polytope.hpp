#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampc/lp.hpp"

namespace rampc {

struct UnboundedSetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Half-space polytope {x : H x <= h}.
struct HPolytope {
  Eigen::MatrixXd H;
  Eigen::VectorXd h;

  int dim() const { return static_cast<int>(H.cols()); }
  int rows() const { return static_cast<int>(H.rows()); }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    return ((H * x - h).array() <= tol).all();
  }

  /// Axis-aligned box; lower == upper on an axis pins that coordinate.
  static HPolytope box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  nlohmann::json to_json() const;
  static HPolytope from_json(const nlohmann::json& j);
};

/// Hypercube/box parameter set. Canonical storage is per-axis bounds; the
/// scaled-unit-cube view {center} + side * [-1/2, 1/2]^p is recovered from
/// center() and side().
struct Hyperbox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Hyperbox cube(const Eigen::VectorXd& center, double side);
  static Hyperbox bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  double side() const { return lo.size() ? (hi - lo).maxCoeff() : 0.0; }
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    return (x.array() >= lo.array() - tol).all() &&
           (x.array() <= hi.array() + tol).all();
  }
  HPolytope as_polytope() const { return HPolytope::box(lo, hi); }
};

/// Support function max_{x in P} direction . x, evaluated by LP.
/// Throws UnboundedSetError if P is unbounded in the direction and
/// EmptySetError if P is empty.
double support(const HPolytope& P, const Eigen::VectorXd& direction);

/// Vertices of a box, deduplicated across zero-width axes. Guards the 2^p
/// blowup at p = 20.
std::vector<Eigen::VectorXd> box_vertices(const Hyperbox& B);

/// Removes rows whose removal leaves the point set identical. Rows with
/// index < protect_rows are always kept.
HPolytope remove_redundant(const HPolytope& P, int protect_rows = 0);

}  // namespace rampc
