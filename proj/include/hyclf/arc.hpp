#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyclf/hybrid_time.hpp"

namespace hyclf {

/// Sample kind along an arc. Jump events produce two rows (pre and post) at
/// identical t; both serialize as "jump".
enum class SampleKind { Flow, JumpPre, JumpPost };

struct ArcSample {
  double t = 0.0;
  std::int64_t j = 0;
  SampleKind kind = SampleKind::Flow;
  Eigen::VectorXd x;
  Eigen::VectorXd u_c, u_d, w_c, w_d;  // inactive phase columns are zero
  double V = 0.0;
};

/// A solution trace over a hybrid time domain.
struct HybridArc {
  HybridTimeDomain domain;
  std::vector<ArcSample> samples;
  int n = 0, m_c = 0, m_d = 0, d_c = 0, d_d = 0;

  bool empty() const { return samples.empty(); }
  const ArcSample& back() const { return samples.back(); }
};

namespace detail {
inline void fmt17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}
}  // namespace detail

/// CSV with header t,j,kind,x1..xn,uc1..,ud1..,wc1..,wd1..,V; floats printed
/// with 17 significant digits so parsing round-trips bit-exactly.
inline std::string arc_to_csv(const HybridArc& arc) {
  std::string out = "t,j,kind";
  auto cols = [&out](const char* base, int count) {
    for (int i = 1; i <= count; ++i) {
      out += ',';
      out += base;
      out += std::to_string(i);
    }
  };
  cols("x", arc.n);
  cols("uc", arc.m_c);
  cols("ud", arc.m_d);
  cols("wc", arc.d_c);
  cols("wd", arc.d_d);
  out += ",V\n";
  for (const auto& s : arc.samples) {
    detail::fmt17(out, s.t);
    out += ',';
    out += std::to_string(s.j);
    out += ',';
    out += s.kind == SampleKind::Flow ? "flow" : "jump";
    auto emit = [&out](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += ',';
        detail::fmt17(out, v[i]);
      }
    };
    emit(s.x);
    emit(s.u_c);
    emit(s.u_d);
    emit(s.w_c);
    emit(s.w_d);
    out += ',';
    detail::fmt17(out, s.V);
    out += '\n';
  }
  return out;
}

inline void write_arc_csv(const HybridArc& arc, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << arc_to_csv(arc);
}

/// Parse an emitted arc CSV. Dimensions are recovered from the header; jump
/// rows are classified pre/post from the j sequence.
inline HybridArc arc_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("arc CSV: empty input");

  HybridArc arc;
  {
    std::istringstream hdr(line);
    std::string col;
    int xs = 0, ucs = 0, uds = 0, wcs = 0, wds = 0;
    while (std::getline(hdr, col, ',')) {
      if (col.rfind("x", 0) == 0 && col != "x") ++xs;
      else if (col.rfind("uc", 0) == 0) ++ucs;
      else if (col.rfind("ud", 0) == 0) ++uds;
      else if (col.rfind("wc", 0) == 0) ++wcs;
      else if (col.rfind("wd", 0) == 0) ++wds;
    }
    arc.n = xs;
    arc.m_c = ucs;
    arc.m_d = uds;
    arc.d_c = wcs;
    arc.d_d = wds;
  }

  bool domain_started = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    ArcSample s;
    std::getline(row, cell, ',');
    s.t = std::stod(cell);
    std::getline(row, cell, ',');
    s.j = std::stoll(cell);
    std::getline(row, cell, ',');
    const bool is_jump = cell == "jump";
    auto read_vec = [&row, &cell](int count) {
      Eigen::VectorXd v(count);
      for (int i = 0; i < count; ++i) {
        if (!std::getline(row, cell, ','))
          throw std::runtime_error("arc CSV: truncated row");
        v[i] = std::stod(cell);
      }
      return v;
    };
    s.x = read_vec(arc.n);
    s.u_c = read_vec(arc.m_c);
    s.u_d = read_vec(arc.m_d);
    s.w_c = read_vec(arc.d_c);
    s.w_d = read_vec(arc.d_d);
    if (!std::getline(row, cell, ',')) throw std::runtime_error("arc CSV: missing V");
    s.V = std::stod(cell);

    if (is_jump) {
      const bool post = !arc.samples.empty() &&
                        arc.samples.back().kind == SampleKind::JumpPre &&
                        arc.samples.back().j + 1 == s.j;
      s.kind = post ? SampleKind::JumpPost : SampleKind::JumpPre;
    }

    if (!domain_started) {
      arc.domain.start(s.t, s.j);
      domain_started = true;
    } else if (s.kind == SampleKind::JumpPost) {
      arc.domain.append_jump();
    } else {
      arc.domain.extend_flow(s.t);
    }
    arc.samples.push_back(std::move(s));
  }
  return arc;
}

inline HybridArc read_arc_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return arc_from_csv(ss.str());
}

}  // namespace hyclf
