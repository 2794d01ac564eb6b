#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "hyclf/model.hpp"
#include "hyclf/report.hpp"
#include "hyclf/rng.hpp"

namespace hyclf {

/// Sampling region and budget for the model well-formedness checks.
struct SampleSpec {
  Eigen::VectorXd state_lower, state_upper;
  int samples = 400;
  std::uint64_t seed = 1;

  void validate() const {
    if (state_lower.size() != state_upper.size() || state_lower.size() == 0)
      throw std::invalid_argument("SampleSpec: bad region");
    if (samples <= 0) throw std::invalid_argument("SampleSpec: samples must be > 0");
  }
};

namespace detail {

inline Vec sample_box(Rng& rng, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Vec x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
  return x;
}

/// Round to 12 significant digits (0 below 1e-13): boundary limits land on
/// the values predicates are actually written with.
inline double snap12(double v) {
  if (std::abs(v) < 1e-13) return 0.0;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace detail

/// Sampled surrogates of the hybrid basic conditions. Findings are reported,
/// never thrown.
///
/// Set closedness (A1): bisect between an in-set and an out-of-set sample,
/// snap the limit to 12 significant digits, and test the predicate there. A
/// snapped limit point that fails the predicate although in-set points exist
/// at every vanishing offset from it is a missing boundary point (the
/// classic strict-inequality defect). Boundaries at non-representable values
/// are left alone: the vanishing-offset test fails for them.
///
/// Map regularity (A2)/(A3): non-finite values anywhere, finite-difference
/// moduli that grow by orders of magnitude as the probe radius shrinks, and
/// the same growth pattern under per-coordinate probes toward zero (the
/// canonical singular locus) are flagged as continuity defects.
inline VerificationReport validate_model(const HybridSystemModel& model,
                                         const SampleSpec& spec) {
  spec.validate();
  VerificationReport rep;
  ConditionReport closed_c;
  closed_c.condition = "flow_set_closed";
  ConditionReport closed_d;
  closed_d.condition = "jump_set_closed";
  ConditionReport cont_f;
  cont_f.condition = "flow_map_regular";
  ConditionReport cont_g;
  cont_g.condition = "jump_map_regular";

  Rng rng(spec.seed);

  const auto closure_probe = [&](const SetPredicate& set, const BoxMap& ubox_of,
                                 const BoxMap& wbox_of, ConditionReport& out,
                                 const char* phase) {
    for (int s = 0; s < spec.samples; ++s) {
      const Vec x = detail::sample_box(rng, spec.state_lower, spec.state_upper);
      const InputBox ub = ubox_of(x), wb = wbox_of(x);
      if (ub.empty() || wb.empty()) {
        out.record(x, phase, 1.0, 0.0);
        continue;
      }
      const Vec u = ub.min_norm_point(), w = wb.min_norm_point();
      const auto inside = [&](const Vec& xq) { return set(xq, u, w); };
      if (!inside(x)) {
        out.record(x, phase, 1.0, 0.0);
        continue;
      }
      // walk outward until the predicate fails, then bisect the boundary
      Vec dir(x.size());
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.uniform(-1.0, 1.0);
      if (dir.norm() < 1e-12) dir.setOnes();
      dir.normalize();
      const double reach = (spec.state_upper - spec.state_lower).norm();
      double t_out = 0.0;
      for (double t = 1e-3 * reach; t <= 2.0 * reach; t *= 2.0) {
        if (!inside(x + t * dir)) {
          t_out = t;
          break;
        }
      }
      if (t_out == 0.0) {
        out.record(x, phase, 1.0, 0.0);
        continue;
      }
      double t_in = 0.0;
      for (int it = 0; it < 120 && t_out - t_in > 0.0; ++it) {
        const double mid = 0.5 * (t_in + t_out);
        if (mid == t_in || mid == t_out) break;
        (inside(x + mid * dir) ? t_in : t_out) = mid;
      }
      Vec limit = x + t_in * dir;
      for (Eigen::Index i = 0; i < limit.size(); ++i)
        limit[i] = detail::snap12(limit[i]);
      bool violation = false;
      if (!inside(limit)) {
        // in-set points at every vanishing offset from the snapped limit
        const Vec back = (x - limit).normalized();
        violation = true;
        const double scale = std::max(1.0, limit.norm());
        for (double eta : {1e-9, 1e-11, 1e-13, 1e-15}) {
          if (!inside(limit + eta * scale * back)) {
            violation = false;
            break;
          }
        }
      }
      out.record(violation ? limit : x, phase, violation ? -1.0 : 1.0, 0.0);
      if (violation && out.flags.empty()) out.flags.push_back("closure_violation");
    }
  };

  const auto continuity_probe = [&](const SystemMap& map, const BoxMap& ubox_of,
                                    const BoxMap& wbox_of, ConditionReport& out,
                                    const char* phase) {
    for (int s = 0; s < spec.samples; ++s) {
      const Vec x = detail::sample_box(rng, spec.state_lower, spec.state_upper);
      const InputBox ub = ubox_of(x), wb = wbox_of(x);
      if (ub.empty() || wb.empty()) {
        out.record(x, phase, 1.0, 0.0);
        continue;
      }
      const Vec u = ub.min_norm_point(), w = wb.min_norm_point();
      const auto eval = [&](const Vec& xq) { return map(xq, u, w); };
      const Vec f0 = eval(x);
      bool bad = !f0.allFinite();

      if (!bad) {
        // random local moduli at shrinking radii
        double coarse = 0.0, fine = 0.0;
        for (int which = 0; which < 2 && !bad; ++which) {
          const double r = which == 0 ? 1e-2 : 1e-6;
          double worst = 0.0;
          for (int k = 0; k < 8; ++k) {
            Vec xp = x;
            for (Eigen::Index i = 0; i < xp.size(); ++i)
              xp[i] += rng.uniform(-r, r);
            const Vec fp = eval(xp);
            if (!fp.allFinite()) {
              bad = true;
              break;
            }
            const double dx = (xp - x).norm();
            if (dx > 0) worst = std::max(worst, (fp - f0).norm() / dx);
          }
          (which == 0 ? coarse : fine) = worst;
        }
        if (!bad) bad = fine > 1e3 * (1.0 + coarse);

        // per-coordinate probes toward zero
        for (Eigen::Index i = 0; i < x.size() && !bad; ++i) {
          const auto at = [&](double v) {
            Vec xp = x;
            xp[i] = v;
            return eval(xp);
          };
          const auto modulus_near = [&](double eta) {
            const Vec fa = at(eta), fb = at(2.0 * eta);
            if (!fa.allFinite() || !fb.allFinite())
              return std::numeric_limits<double>::infinity();
            return (fb - fa).norm() / eta;
          };
          const double m_coarse = modulus_near(1e-6);
          const double m_fine = modulus_near(1e-12);
          if (m_fine > 1e3 * (1.0 + m_coarse)) bad = true;
        }
      }
      out.record(x, phase, bad ? -1.0 : 1.0, 0.0);
      if (bad && out.flags.empty()) out.flags.push_back("modulus_blowup");
    }
  };

  closure_probe(model.flow_set, model.input_box_flow, model.dist_box_flow,
                closed_c, "flow");
  closure_probe(model.jump_set, model.input_box_jump, model.dist_box_jump,
                closed_d, "jump");
  continuity_probe(model.flow_map, model.input_box_flow, model.dist_box_flow,
                   cont_f, "flow");
  continuity_probe(model.jump_map, model.input_box_jump, model.dist_box_jump,
                   cont_g, "jump");

  rep.conditions = {closed_c, closed_d, cont_f, cont_g};
  return rep;
}

}  // namespace hyclf
