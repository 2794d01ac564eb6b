#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyclf/input_box.hpp"

namespace hyclf {

using Vec = Eigen::VectorXd;

/// Thrown when a map produces non-finite values; carries the offending point.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, Vec point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

using SetPredicate = std::function<bool(const Vec& x, const Vec& u, const Vec& w)>;
using SystemMap = std::function<Vec(const Vec& x, const Vec& u, const Vec& w)>;
using BoxMap = std::function<InputBox(const Vec& x)>;

/// Data of a hybrid system with inputs and disturbances: flow/jump set
/// predicates and maps, plus the per-state admissible boxes for u and w.
/// The set conditions on u and on w depend only on x; maps are single-valued
/// realizations. All members are immutable after construction and every
/// operation below is a pure function of its arguments.
struct HybridSystemModel {
  std::string name;
  int n = 0;    // state dimension
  int m_c = 0;  // flow input dimension
  int m_d = 0;  // jump input dimension
  int d_c = 0;  // flow disturbance dimension
  int d_d = 0;  // jump disturbance dimension

  SetPredicate flow_set;  // (x, u_c, w_c) in C
  SetPredicate jump_set;  // (x, u_d, w_d) in D
  SystemMap flow_map;     // F(x, u_c, w_c) -> xdot
  SystemMap jump_map;     // G(x, u_d, w_d) -> x+

  BoxMap input_box_flow;  // Psi^u_c
  BoxMap input_box_jump;  // Psi^u_d
  BoxMap dist_box_flow;   // Psi^w_c (all coordinates bounded)
  BoxMap dist_box_jump;   // Psi^w_d (all coordinates bounded)
};

namespace detail {
inline void check_dims(const HybridSystemModel& m, const Vec& x, const Vec& u,
                       const Vec& w, int mu, int dw, const char* op) {
  if (x.size() != m.n || u.size() != mu || w.size() != dw)
    throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}
}  // namespace detail

inline bool flow_allowed(const HybridSystemModel& m, const Vec& x, const Vec& u_c,
                         const Vec& w_c) {
  detail::check_dims(m, x, u_c, w_c, m.m_c, m.d_c, "flow_allowed");
  return m.flow_set(x, u_c, w_c);
}

inline bool jump_allowed(const HybridSystemModel& m, const Vec& x, const Vec& u_d,
                         const Vec& w_d) {
  detail::check_dims(m, x, u_d, w_d, m.m_d, m.d_d, "jump_allowed");
  return m.jump_set(x, u_d, w_d);
}

inline Vec evaluate_flow(const HybridSystemModel& m, const Vec& x, const Vec& u_c,
                         const Vec& w_c) {
  detail::check_dims(m, x, u_c, w_c, m.m_c, m.d_c, "evaluate_flow");
  Vec dx = m.flow_map(x, u_c, w_c);
  if (!dx.allFinite()) throw NumericalError("evaluate_flow: non-finite derivative", x);
  return dx;
}

inline Vec evaluate_jump(const HybridSystemModel& m, const Vec& x, const Vec& u_d,
                         const Vec& w_d) {
  detail::check_dims(m, x, u_d, w_d, m.m_d, m.d_d, "evaluate_jump");
  Vec xp = m.jump_map(x, u_d, w_d);
  if (!xp.allFinite()) throw NumericalError("evaluate_jump: non-finite image", x);
  return xp;
}

/// x in Pi_c(C): some admissible (u, w) pair exists at x.
inline bool in_flow_projection(const HybridSystemModel& m, const Vec& x) {
  const InputBox ub = m.input_box_flow(x);
  const InputBox wb = m.dist_box_flow(x);
  if (ub.empty() || wb.empty()) return false;
  return m.flow_set(x, ub.min_norm_point(), wb.min_norm_point());
}

/// x in Pi_d(D).
inline bool in_jump_projection(const HybridSystemModel& m, const Vec& x) {
  const InputBox ub = m.input_box_jump(x);
  const InputBox wb = m.dist_box_jump(x);
  if (ub.empty() || wb.empty()) return false;
  return m.jump_set(x, ub.min_norm_point(), wb.min_norm_point());
}

/// State-feedback pair. Components of u_c and u_d that denote the same
/// physical input are listed in shared_components as (flow index, jump index)
/// and must agree pointwise.
///
/// switching_surfaces optionally declares scalar functions whose zero sets
/// carry discontinuities of flow_law. The simulator locates crossings of
/// these surfaces and integrates the Filippov sliding field where the
/// surface attracts from both sides; without the declaration a discontinuous
/// law still integrates, but chatters at step resolution.
struct Controller {
  std::string name;
  std::function<Vec(const Vec& x)> flow_law;  // kappa_c
  std::function<Vec(const Vec& x)> jump_law;  // kappa_d
  std::vector<std::pair<int, int>> shared_components;
  std::vector<std::function<double(const Vec& x)>> switching_surfaces;

  bool shared_components_agree(const Vec& x, double tol = 0.0) const {
    const Vec uc = flow_law(x);
    const Vec ud = jump_law(x);
    for (const auto& [ci, di] : shared_components) {
      if (std::abs(uc[ci] - ud[di]) > tol) return false;
    }
    return true;
  }
};

}  // namespace hyclf
