#pragma once

// Generalized bicharacteristic flow of p = |xi|^2 - 1 on a domain with
// boundary: straight lines x' = 2 xi in the interior, the collar Hamiltonian
// system near each boundary component, reflection eta -> +sqrt(r0) at
// hyperbolic contacts, and gliding along H_{-r0} at glancing points that are
// not diffractive.
//
// Built-in charts switch between global Cartesian coordinates and the collar
// at y = width / 2. Model charts only have a collar; rays leaving y = width
// stop with a CollarExit event.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mslab/boundary_classifier.hpp"
#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"
#include "mslab/ode.hpp"

namespace mslab {

enum class SegmentMode { Interior, Gliding };
enum class EventKind { HyperbolicReflection, DiffractiveTangency, GlidingEntry, GlidingExit, CollarExit };

inline std::string to_string(SegmentMode m) { return m == SegmentMode::Interior ? "interior" : "gliding"; }

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::HyperbolicReflection: return "hyperbolic_reflection";
    case EventKind::DiffractiveTangency: return "diffractive_tangency";
    case EventKind::GlidingEntry: return "gliding_entry";
    case EventKind::GlidingExit: return "gliding_exit";
    case EventKind::CollarExit: return "collar_exit";
  }
  return "?";
}

struct RaySample {
  double s = 0.0;
  PhasePoint p;
  int component = 0;  ///< 0: the traced chart, 1: its annulus sibling
};

struct RayEvent {
  EventKind kind = EventKind::HyperbolicReflection;
  double s = 0.0;
  PhasePoint point;  ///< state after the event
  int component = 0;
  BoundaryClass cls;
  double eta_before = 0.0;
  double eta_after = 0.0;
  bool shallow = false;  ///< hyperbolic with r0 below tol_shallow
};

struct RaySegment {
  SegmentMode mode = SegmentMode::Interior;
  std::vector<RaySample> samples;
  std::optional<RayEvent> entry;
  std::optional<RayEvent> exit;
};

enum class Region { Cartesian, Collar, Gliding, Exited };

struct FlowState {
  double s = 0.0;
  Region region = Region::Collar;
  int component = 0;
  PhasePoint p;      ///< valid in Collar / Gliding (and Exited)
  CartesianPoint c;  ///< valid in Cartesian
};

struct GeneralizedRay {
  std::vector<RaySegment> segments;
  std::vector<RayEvent> events;
  FlowState end;
};

struct TraceOptions {
  double step = 1e-2;  ///< largest integrator step
  double tol_event = 1e-10;
  double tol_g = 1e-8;
  double tol_bracket = 1e-6;
  double tol_shallow = 1e-4;
  double tol_p = 1e-8;
  ode::Tolerance ode{1e-12, 1e-13};
  double sample_ds = 0.02;  ///< sample spacing on straight interior pieces
  int max_events = 100000;
  long max_steps = 50000000;
};

namespace detail {

inline auto glide_rhs(const CollarChart& c) {
  return [&c](const ode::State<2>& u) {
    const RValues v = c.eval_r_extended(0.0, u[0], u[1]);
    return ode::State<2>{-v.r_xi, v.r_x};
  };
}

inline void project(const CollarChart& c, ode::State<2>& u, double target) {
  for (int it = 0; it < 3; ++it) {
    const RValues v = c.eval_r_extended(0.0, u[0], u[1]);
    const double g2 = v.r_x * v.r_x + v.r_xi * v.r_xi;
    if (g2 == 0.0) return;
    const double d = (v.r - target) / g2;
    u[0] -= d * v.r_x;
    u[1] -= d * v.r_xi;
  }
}

}  // namespace detail

class Tracer {
 public:
  explicit Tracer(const CollarChart& chart, TraceOptions opt = {}) : opt_(opt) {
    charts_.push_back(chart);
    if (chart.kind() == ChartKind::Annulus) charts_.push_back(chart.sibling());
  }

  [[nodiscard]] const TraceOptions& options() const { return opt_; }
  [[nodiscard]] const CollarChart& chart(int component = 0) const { return charts_.at(component); }

  /// Full trajectory from a collar point of the primary chart.
  [[nodiscard]] GeneralizedRay trace(const PhasePoint& start, double s_max) const {
    GeneralizedRay ray;
    Recorder rec{&ray};
    FlowState st = initial_state(start, 0);
    run(st, s_max, &rec);
    ray.end = st;
    return ray;
  }

  /// Full trajectory from a global Cartesian point (built-in charts only).
  [[nodiscard]] GeneralizedRay trace_cartesian(const CartesianPoint& start, double s_max) const {
    GeneralizedRay ray;
    Recorder rec{&ray};
    FlowState st = initial_state_cartesian(start);
    run(st, s_max, &rec);
    ray.end = st;
    return ray;
  }

  /// Endpoint only, no samples kept.
  [[nodiscard]] FlowState endpoint(const PhasePoint& start, double s) const {
    FlowState st = initial_state(start, 0);
    run(st, s, nullptr);
    return st;
  }

  [[nodiscard]] FlowState endpoint_cartesian(const CartesianPoint& start, double s) const {
    FlowState st = initial_state_cartesian(start);
    run(st, s, nullptr);
    return st;
  }

  /// Cartesian form of any state (built-in charts).
  [[nodiscard]] CartesianPoint to_cartesian(const FlowState& st) const {
    if (st.region == Region::Cartesian) return st.c;
    return charts_[st.component].to_cartesian(st.p);
  }

  /// Collar form of any state; Cartesian states use the nearest component.
  [[nodiscard]] std::pair<PhasePoint, int> to_collar(const FlowState& st, double x_ref = 0.0) const {
    if (st.region != Region::Cartesian) return {st.p, st.component};
    const int comp = nearest_component(st.c);
    PhasePoint p = charts_[comp].from_cartesian(st.c);
    p.x = unwrap(p.x, x_ref);
    return {p, comp};
  }

  /// One DP5 step along H_{-r0} followed by projection back to the level set of r0.
  [[nodiscard]] std::pair<PhasePoint, bool> glide_step(const PhasePoint& p, double ds, int component = 0) const {
    const CollarChart& c = charts_[component];
    const double target = c.r0(p.x, p.xi);
    ode::State<2> y{p.x, p.xi}, out;
    (void)ode::dp45_step(detail::glide_rhs(c), y, ds, out, opt_.ode);
    detail::project(c, out, target);
    PhasePoint q{0.0, out[0], 0.0, out[1]};
    const bool left = std::abs(c.r0(q.x, q.xi)) > opt_.tol_p;
    return {q, left};
  }

 private:
  struct Recorder {
    GeneralizedRay* ray;
    void ensure(SegmentMode mode) {
      if (ray->segments.empty()) ray->segments.push_back(RaySegment{mode, {}, std::nullopt, std::nullopt});
    }
    void sample(double s, const PhasePoint& p, int comp, SegmentMode mode) {
      ensure(mode);
      auto& seg = ray->segments.back().samples;
      if (!seg.empty() && seg.back().s == s) return;
      seg.push_back({s, p, comp});
    }
    void event(const RayEvent& e, SegmentMode next) {
      ray->events.push_back(e);
      if (!ray->segments.empty()) ray->segments.back().exit = e;
      if (e.kind == EventKind::CollarExit) return;
      ray->segments.push_back(RaySegment{next, {}, e, std::nullopt});
      ray->segments.back().samples.push_back({e.s, e.point, e.component});
    }
  };

  static double unwrap(double theta, double ref) { return theta + kTwoPi * std::round((ref - theta) / kTwoPi); }

  [[nodiscard]] bool builtin() const { return charts_[0].kind() != ChartKind::Model; }
  [[nodiscard]] double width() const { return charts_[0].collar_width(); }

  [[nodiscard]] int nearest_component(const CartesianPoint& c) const {
    if (charts_.size() == 1) return 0;
    const double rho = std::hypot(c.x1, c.x2);
    const auto dist = [&](int k) { return charts_[k].orientation() * (rho - charts_[k].boundary_radius()); };
    return dist(0) <= dist(1) ? 0 : 1;
  }

  void check_on_shell(const CollarChart& c, const PhasePoint& p) const {
    const double r = c.eval_r_extended(p.y, p.x, p.xi).r;
    if (std::abs(p.eta * p.eta - r) > opt_.tol_p * std::max(1.0, std::abs(r)))
      throw ValidationError("start point is off-shell: |eta^2 - r| = " + std::to_string(std::abs(p.eta * p.eta - r)));
  }

  [[nodiscard]] FlowState initial_state(const PhasePoint& start, int comp) const {
    const CollarChart& c = charts_[comp];
    if (start.y < 0.0) throw ValidationError("start point has y < 0");
    check_on_shell(c, start);
    FlowState st;
    st.component = comp;
    if (builtin() && start.y > 0.5 * width()) {
      st.region = Region::Cartesian;
      st.c = c.to_cartesian(start);
      st.p = start;
      return st;
    }
    st.region = Region::Collar;
    st.p = start;
    return st;
  }

  [[nodiscard]] FlowState initial_state_cartesian(const CartesianPoint& start) const {
    if (!builtin()) throw ValidationError("Cartesian starts need a disk or annulus chart");
    const double n = std::hypot(start.xi1, start.xi2);
    if (std::abs(n * n - 1.0) > opt_.tol_p) throw ValidationError("Cartesian start must have |xi| = 1");
    const int comp = nearest_component(start);
    const CollarChart& c = charts_[comp];
    PhasePoint p = c.from_cartesian(start);
    if (p.y < 0.0) throw ValidationError("Cartesian start lies outside the domain");
    FlowState st;
    st.component = comp;
    st.p = p;
    if (p.y > 0.5 * width()) {
      st.region = Region::Cartesian;
      st.c = start;
    } else {
      st.region = Region::Collar;
    }
    return st;
  }

  void run(FlowState& st, double s_end, Recorder* rec) const {
    const double dir = s_end >= st.s ? 1.0 : -1.0;
    double x_ref = st.p.x;
    bool first = true;
    int events = 0;
    long steps = 0;
    while (st.region != Region::Exited) {
      if (first) {
        first = false;
        start_boundary(st, dir, rec, events);
        if (rec) record(st, rec, x_ref);
      }
      if (dir * (s_end - st.s) <= 0.0) break;
      if (events > opt_.max_events) throw IntegratorError("event budget exhausted");
      switch (st.region) {
        case Region::Cartesian: advance_cartesian(st, s_end, dir, rec, x_ref); break;
        case Region::Collar: advance_collar(st, s_end, dir, rec, events, steps, x_ref); break;
        case Region::Gliding: advance_gliding(st, s_end, dir, rec, events, steps); break;
        case Region::Exited: break;
      }
      if (st.region != Region::Cartesian) x_ref = st.p.x;
    }
  }

  void record(const FlowState& st, Recorder* rec, double& x_ref) const {
    if (st.region == Region::Cartesian) {
      auto [p, comp] = to_collar(st, x_ref);
      x_ref = p.x;
      rec->sample(st.s, p, comp, SegmentMode::Interior);
    } else {
      rec->sample(st.s, st.p, st.component,
                  st.region == Region::Gliding ? SegmentMode::Gliding : SegmentMode::Interior);
    }
  }

  // Dispatch for trajectories that start exactly on the boundary.
  void start_boundary(FlowState& st, double dir, Recorder* rec, int& events) const {
    if (st.region != Region::Collar || st.p.y != 0.0) return;
    const CollarChart& c = charts_[st.component];
    if (dir * st.p.eta > 0.0) return;  // already leaving the boundary
    if (dir * st.p.eta < 0.0) {
      handle_contact(st, dir, rec, events);
      return;
    }
    // eta == 0: glancing start
    const BoundaryClass cls = classify(c, st.p.x, st.p.xi, {opt_.tol_g, opt_.tol_bracket, 0});
    if (cls.tag != BoundaryTag::Glancing)
      throw ValidationError("tangent start (eta = 0) at a non-glancing point: " + cls.label());
    if (cls.glancing->unresolved)
      throw ClassificationError("contact order exceeds K_max at start point x' = " + std::to_string(st.p.x));
    RayEvent e;
    e.s = st.s;
    e.point = st.p;
    e.component = st.component;
    e.cls = cls;
    if (cls.diffractive()) {
      e.kind = EventKind::DiffractiveTangency;
      if (rec) rec->event(e, SegmentMode::Interior);
    } else {
      e.kind = EventKind::GlidingEntry;
      st.region = Region::Gliding;
      if (rec) rec->event(e, SegmentMode::Gliding);
    }
    ++events;
  }

  // ---- interior straight lines ------------------------------------------

  void advance_cartesian(FlowState& st, double s_end, double dir, Recorder* rec, double& x_ref) const {
    const CartesianPoint c0 = st.c;
    const double vx = 2.0 * dir * c0.xi1, vy = 2.0 * dir * c0.xi2;
    const double a = vx * vx + vy * vy;
    const double b = 2.0 * (c0.x1 * vx + c0.x2 * vy);
    const double r2 = c0.x1 * c0.x1 + c0.x2 * c0.x2;
    double t_hit = std::numeric_limits<double>::infinity();
    int comp_hit = -1;
    for (int k = 0; k < static_cast<int>(charts_.size()); ++k) {
      const CollarChart& ch = charts_[k];
      const double rt = ch.radius_at(0.5 * width());
      const double cc = r2 - rt * rt;
      const double disc = b * b - 4.0 * a * cc;
      if (a == 0.0 || disc < 0.0) continue;
      double t;
      if (ch.orientation() < 0.0) {
        t = (-b + std::sqrt(disc)) / (2.0 * a);  // leaving through the outer transition circle
      } else {
        if (b >= 0.0) continue;  // moving away from the inner circle
        t = (-b - std::sqrt(disc)) / (2.0 * a);
      }
      if (t > 0.0 && t < t_hit) {
        t_hit = t;
        comp_hit = k;
      }
    }
    const double t_avail = dir * (s_end - st.s);
    const double t_go = std::min(t_hit, t_avail);
    auto at = [&](double t) { return CartesianPoint{c0.x1 + t * vx, c0.x2 + t * vy, c0.xi1, c0.xi2}; };
    if (rec) {
      const int n = static_cast<int>(std::floor(t_go / opt_.sample_ds));
      for (int i = 1; i <= n; ++i) {
        FlowState tmp = st;
        tmp.c = at(i * opt_.sample_ds);
        tmp.s = st.s + dir * i * opt_.sample_ds;
        record(tmp, rec, x_ref);
      }
    }
    st.c = at(t_go);
    st.s = t_go == t_avail ? s_end : st.s + dir * t_go;
    if (t_go < t_avail && comp_hit >= 0) {
      const CollarChart& ch = charts_[comp_hit];
      PhasePoint p = ch.from_cartesian(st.c);
      p.y = 0.5 * width();
      p.x = unwrap(p.x, x_ref);
      st.p = p;
      st.component = comp_hit;
      st.region = Region::Collar;
    }
    if (rec) record(st, rec, x_ref);
    if (st.region == Region::Cartesian) {
      auto [p, comp] = to_collar(st, x_ref);
      st.p = p;
    }
  }

  // ---- collar integration -----------------------------------------------

  static auto collar_rhs(const CollarChart& c) {
    return [&c](const ode::State<4>& u) {
      const PhaseVelocity v = c.hamiltonian_field_extended({u[0], u[1], u[2], u[3]});
      return ode::State<4>{v.dy, v.dx, v.deta, v.dxi};
    };
  }

  // Bisection for the first sign change of g along a single step from u0.
  template <std::size_t N, class F, class G>
  std::pair<double, ode::State<N>> localize(const F& f, const ode::State<N>& u0, double h, const ode::State<N>& u1,
                                            const G& g) const {
    const bool neg0 = g(u0) < 0.0;
    double lo = 0.0, hi = std::abs(h);
    ode::State<N> s_hi = u1, tmp;
    const double sgn = h >= 0.0 ? 1.0 : -1.0;
    int it = 0;
    while (hi - lo > opt_.tol_event) {
      const double mid = 0.5 * (lo + hi);
      (void)ode::dp45_step(f, u0, sgn * mid, tmp, opt_.ode);
      if ((g(tmp) < 0.0) == neg0) {
        lo = mid;
      } else {
        hi = mid;
        s_hi = tmp;
      }
      if (++it > 200) throw IntegratorError("event localization did not converge");
    }
    if ((g(s_hi) < 0.0) == neg0) throw IntegratorError("event localization lost the bracketed sign change");
    return {sgn * hi, s_hi};
  }

  void advance_collar(FlowState& st, double s_end, double dir, Recorder* rec, int& events, long& steps,
                      double& x_ref) const {
    const CollarChart& c = charts_[st.component];
    const auto f = collar_rhs(c);
    ode::State<4> u{st.p.y, st.p.x, st.p.eta, st.p.xi}, trial;
    double h = opt_.step;
    const double transition = builtin() ? 0.5 * width() : width();
    for (;;) {
      const double remain = dir * (s_end - st.s);
      if (remain <= 0.0) break;
      if (++steps > opt_.max_steps) throw IntegratorError("step budget exhausted");
      const double hs = std::min({h, remain, opt_.step});
      const double err = ode::dp45_step(f, u, dir * hs, trial, opt_.ode);
      if (err > 1.0) {
        h = ode::next_step(hs, err);
        if (h < 1e-15) throw IntegratorError("step size underflow in collar integration");
        continue;
      }
      h = ode::next_step(hs, err);
      const bool last = hs == remain;

      // contact with the boundary
      auto gy = [](const ode::State<4>& v) { return v[0]; };
      auto geta = [dir](const ode::State<4>& v) { return dir * v[2]; };
      if (trial[0] < 0.0) {
        auto [tau, v] = localize<4>(f, u, dir * hs, trial, gy);
        st.s += tau;
        st.p = {0.0, v[1], v[2], v[3]};
        if (rec) rec->sample(st.s, st.p, st.component, SegmentMode::Interior);
        handle_contact(st, dir, rec, events);
        return;
      }
      // turning point inside the step: contact may hide between samples
      if (geta(u) < 0.0 && geta(trial) >= 0.0) {
        auto [tau, v] = localize<4>(f, u, dir * hs, trial, geta);
        if (v[0] < 0.0) {
          auto [tau2, v2] = localize<4>(f, u, tau, v, gy);
          st.s += tau2;
          st.p = {0.0, v2[1], v2[2], v2[3]};
          if (rec) rec->sample(st.s, st.p, st.component, SegmentMode::Interior);
          handle_contact(st, dir, rec, events);
          return;
        }
        if (v[0] <= opt_.tol_event) {
          // grazing turn at a diffractive point
          RayEvent e;
          e.kind = EventKind::DiffractiveTangency;
          e.s = st.s + tau;
          e.point = {v[0], v[1], v[2], v[3]};
          e.component = st.component;
          e.cls = classify(c, v[1], v[3], {opt_.tol_g, opt_.tol_bracket, 0});
          e.eta_before = e.eta_after = v[2];
          if (rec) rec->event(e, SegmentMode::Interior);
          ++events;
        }
      }
      // leaving the collar
      if (trial[0] > transition) {
        auto gt = [transition](const ode::State<4>& v) { return v[0] - transition; };
        auto [tau, v] = localize<4>(f, u, dir * hs, trial, gt);
        st.s += tau;
        st.p = {v[0], v[1], v[2], v[3]};
        x_ref = st.p.x;
        if (builtin()) {
          st.c = c.to_cartesian(st.p);
          st.region = Region::Cartesian;
          if (rec) rec->sample(st.s, st.p, st.component, SegmentMode::Interior);
        } else {
          st.region = Region::Exited;
          RayEvent e;
          e.kind = EventKind::CollarExit;
          e.s = st.s;
          e.point = st.p;
          e.component = st.component;
          e.eta_before = e.eta_after = st.p.eta;
          if (rec) {
            rec->sample(st.s, st.p, st.component, SegmentMode::Interior);
            rec->event(e, SegmentMode::Interior);
          }
          ++events;
        }
        return;
      }
      u = trial;
      st.s = last ? s_end : st.s + dir * hs;
      st.p = {u[0], u[1], u[2], u[3]};
      if (rec) rec->sample(st.s, st.p, st.component, SegmentMode::Interior);
    }
  }

  // Boundary contact at y = 0 with incoming eta.
  void handle_contact(FlowState& st, double dir, Recorder* rec, int& events) const {
    const CollarChart& c = charts_[st.component];
    st.p.y = 0.0;
    const BoundaryClass cls = classify(c, st.p.x, st.p.xi, {opt_.tol_g, opt_.tol_bracket, 0});
    RayEvent e;
    e.s = st.s;
    e.component = st.component;
    e.cls = cls;
    e.eta_before = st.p.eta;
    ++events;
    if (cls.tag == BoundaryTag::Elliptic)
      throw IntegratorError("boundary contact at an elliptic point (r0 = " + std::to_string(cls.r0) +
                            "); trajectory drifted off-shell");
    if (cls.tag == BoundaryTag::Hyperbolic) {
      st.p.eta = dir * std::sqrt(cls.r0);
      e.kind = EventKind::HyperbolicReflection;
      e.shallow = cls.r0 <= opt_.tol_shallow;
      e.eta_after = st.p.eta;
      e.point = st.p;
      if (rec) rec->event(e, SegmentMode::Interior);
      return;
    }
    if (cls.glancing->unresolved)
      throw ClassificationError("contact order exceeds K_max at x' = " + std::to_string(st.p.x) +
                                ", xi' = " + std::to_string(st.p.xi));
    st.p.eta = 0.0;
    e.eta_after = 0.0;
    e.point = st.p;
    if (cls.diffractive()) {
      e.kind = EventKind::DiffractiveTangency;
      if (rec) rec->event(e, SegmentMode::Interior);
      return;
    }
    e.kind = EventKind::GlidingEntry;
    st.region = Region::Gliding;
    if (rec) rec->event(e, SegmentMode::Gliding);
  }

  // ---- gliding -----------------------------------------------------------

  void advance_gliding(FlowState& st, double s_end, double dir, Recorder* rec, int& events, long& steps) const {
    const CollarChart& c = charts_[st.component];
    const auto f = detail::glide_rhs(c);
    const double target = 0.0;
    ode::State<2> u{st.p.x, st.p.xi}, trial;
    double h = opt_.step;
    auto release = [&c, this](const ode::State<2>& v) { return c.r1(v[0], v[1]) - opt_.tol_g; };
    for (;;) {
      const double remain = dir * (s_end - st.s);
      if (remain <= 0.0) break;
      if (++steps > opt_.max_steps) throw IntegratorError("step budget exhausted");
      const double hs = std::min({h, remain, opt_.step});
      const double err = ode::dp45_step(f, u, dir * hs, trial, opt_.ode);
      if (err > 1.0) {
        h = ode::next_step(hs, err);
        if (h < 1e-15) throw IntegratorError("step size underflow in gliding integration");
        continue;
      }
      h = ode::next_step(hs, err);
      const bool last = hs == remain;
      detail::project(c, trial, target);
      if (release(u) <= 0.0 && release(trial) > 0.0) {
        auto [tau, v] = localize<2>(f, u, dir * hs, trial, release);
        detail::project(c, v, target);
        st.s += tau;
        st.p = {0.0, v[0], 0.0, v[1]};
        st.region = Region::Collar;
        RayEvent e;
        e.kind = EventKind::GlidingExit;
        e.s = st.s;
        e.point = st.p;
        e.component = st.component;
        e.cls = classify(c, v[0], v[1], {opt_.tol_g, opt_.tol_bracket, 0});
        if (rec) {
          rec->sample(st.s, st.p, st.component, SegmentMode::Gliding);
          rec->event(e, SegmentMode::Interior);
        }
        ++events;
        return;
      }
      u = trial;
      st.s = last ? s_end : st.s + dir * hs;
      st.p = {0.0, u[0], 0.0, u[1]};
      if (rec) rec->sample(st.s, st.p, st.component, SegmentMode::Gliding);
    }
  }

  std::vector<CollarChart> charts_;
  TraceOptions opt_;
};

// ---- free-function interface ----------------------------------------------

inline GeneralizedRay trace(const CollarChart& chart, const PhasePoint& start, double s_max,
                            const TraceOptions& opt = {}) {
  return Tracer(chart, opt).trace(start, s_max);
}

/// Incoming hyperbolic boundary point -> outgoing point eta = +sqrt(r0).
inline PhasePoint reflect_hyperbolic(const CollarChart& chart, const PhasePoint& p, const TraceOptions& opt = {}) {
  if (std::abs(p.y) > opt.tol_event) throw ValidationError("reflection needs a boundary point (y = 0)");
  const BoundaryClass cls = classify(chart, p.x, p.xi, {opt.tol_g, opt.tol_bracket, 0});
  if (cls.tag != BoundaryTag::Hyperbolic)
    throw ClassificationError("reflect_hyperbolic at a " + to_string(cls.tag) + " point");
  const double root = std::sqrt(cls.r0);
  if (std::abs(p.eta + root) > opt.tol_p)
    throw ValidationError("incoming eta must equal -sqrt(r0) = " + std::to_string(-root));
  return {0.0, p.x, root, p.xi};
}

struct GlideResult {
  PhasePoint point;
  bool left_glancing = false;  ///< |r0| exceeded tol_p after projection
};

inline GlideResult step_gliding(const CollarChart& chart, const PhasePoint& p, double ds,
                                const TraceOptions& opt = {}) {
  if (p.y != 0.0 || p.eta != 0.0) throw ValidationError("gliding points have y = eta = 0");
  if (std::abs(chart.r0(p.x, p.xi)) > opt.tol_p) throw ValidationError("gliding point is not glancing");
  if (ds == 0.0) return {p, false};
  auto [q, left] = Tracer(chart, opt).glide_step(p, ds);
  return {q, left};
}

struct PullbackResult {
  PhasePoint point;
  int component = 0;
  bool ok = true;
  std::string error;
};

/// Endpoint of the flow for time s from each point; failures are marked per point.
inline std::vector<PullbackResult> flow_pullback(const CollarChart& chart, const std::vector<PhasePoint>& points,
                                                 double s, const TraceOptions& opt = {}, int jobs = 1) {
  const Tracer tracer(chart, opt);
  std::vector<PullbackResult> out(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    try {
      const FlowState end = tracer.endpoint(points[i], s);
      auto [p, comp] = tracer.to_collar(end, points[i].x);
      out[i].point = p;
      out[i].component = comp;
    } catch (const Error& e) {
      out[i].ok = false;
      out[i].error = e.what();
      out[i].point = points[i];
    }
  });
  return out;
}

/// Flow of a Cartesian phase point for any |xi| > 0, using homogeneity:
/// gamma_s(x, rho w) = (X(rho s), rho W(rho s)) with (X, W) the unit-speed ray.
inline CartesianPoint flow_cartesian(const Tracer& tracer, const CartesianPoint& q, double s) {
  const double rho = std::hypot(q.xi1, q.xi2);
  if (rho == 0.0 || s == 0.0) return q;
  const CartesianPoint unit{q.x1, q.x2, q.xi1 / rho, q.xi2 / rho};
  const CartesianPoint e = tracer.to_cartesian(tracer.endpoint_cartesian(unit, rho * s));
  return {e.x1, e.x2, rho * e.xi1, rho * e.xi2};
}

}  // namespace mslab
