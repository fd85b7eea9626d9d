#include "zs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

#include "zs/parallel.hpp"

namespace zs {

namespace odeint = boost::numeric::odeint;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

double wrap(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  return kTwoPi - r < 1e-13 ? 0.0 : r;
}
double wrap_signed(double a) { return std::remainder(a, kTwoPi); }

using State3 = std::array<double, 3>;
}  // namespace

double circular_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

CospherePoint reduce(const SymbolDescriptor& s, CospherePoint p) {
  if (s.family != Family::NormalForm) p.x1 = wrap(p.x1);
  p.x2 = wrap(p.x2);
  p.theta = wrap(p.theta);
  return p;
}

double symbol_at(const SymbolDescriptor& s, const CospherePoint& p) {
  return evaluate(s, p.x1, p.x2, std::cos(p.theta), std::sin(p.theta));
}

std::array<double, 3> rescaled_field(const SymbolDescriptor& s, const CospherePoint& p) {
  if (!s.is_homogeneous())
    throw std::invalid_argument("the rescaled field needs a homogeneous symbol family");
  double c = std::cos(p.theta), sn = std::sin(p.theta);
  SymbolGradient g = gradient(s, p.x1, p.x2, c, sn);
  return {g.dxi1, g.dxi2, sn * g.dx1 - c * g.dx2};
}

double project_to_sigma(const SymbolDescriptor& s, double omega, double x1, double x2,
                        double theta) {
  for (int it = 0; it < 60; ++it) {
    double c = std::cos(theta), sn = std::sin(theta);
    double f = evaluate(s, x1, x2, c, sn) - omega;
    SymbolGradient g = gradient(s, x1, x2, c, sn);
    double df = -sn * g.dxi1 + c * g.dxi2;
    if (std::abs(df) < 1e-14) throw GeometryError("Sigma is tangent to the fibre here");
    double step = f / df;
    step = std::clamp(step, -0.5, 0.5);
    theta -= step;
    if (std::abs(step) < 1e-15) break;
  }
  double res = evaluate(s, x1, x2, std::cos(theta), std::sin(theta)) - omega;
  if (std::abs(res) > 1e-11) throw GeometryError("projection to Sigma did not converge");
  return theta;
}

Trajectory integrate(const SymbolDescriptor& s, double omega, const CospherePoint& start,
                     double t0, double t1, double tol, double drift_limit) {
  double d0 = std::abs(symbol_at(s, start) - omega);
  if (d0 > 1e-8) throw std::invalid_argument("start point is not on Sigma(omega)");
  auto sys = [&](const State3& x, State3& dx, double) {
    auto f = rescaled_field(s, {x[0], x[1], x[2]});
    dx = {f[0], f[1], f[2]};
  };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State3>());
  Trajectory tr;
  State3 x{start.x1, start.x2, start.theta};
  double t = t0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double dt = 0.01 * dir;
  tr.t.push_back(t);
  tr.points.push_back(start);
  tr.max_drift = d0;
  int fails = 0;
  while (dir * (t1 - t) > 1e-14) {
    if (dir * (t + dt - t1) > 0) dt = t1 - t;
    auto res = stepper.try_step(sys, x, t, dt);
    if (res != odeint::success) {
      if (++fails > 200 || std::abs(dt) < 1e-14) throw StepUnderflow("step size underflow");
      continue;
    }
    fails = 0;
    CospherePoint p{x[0], x[1], x[2]};
    double drift = std::abs(symbol_at(s, p) - omega);
    tr.max_drift = std::max(tr.max_drift, drift);
    tr.t.push_back(t);
    tr.points.push_back(p);
    if (drift > drift_limit) throw DriftAbort("energy drift above limit", drift);
  }
  return tr;
}

namespace {

// d(x1, theta, t)/dx2
struct X2System {
  const SymbolDescriptor& s;
  void operator()(const State3& y, State3& dy, double x2) const {
    auto f = rescaled_field(s, {y[0], x2, y[1]});
    if (std::abs(f[1]) < 1e-9) throw GeometryError("flow tangent to x2 = const");
    dy = {f[0] / f[1], f[2] / f[1], 1.0 / f[1]};
  }
};

State3 x2_flow(const SymbolDescriptor& s, State3 y, double x2a, double x2b, double tol) {
  X2System sys{s};
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State3>());
  double x = x2a;
  const double dir = x2b >= x2a ? 1.0 : -1.0;
  double h = 0.05 * dir;
  int fails = 0;
  while (dir * (x2b - x) > 1e-15) {
    if (dir * (x + h - x2b) > 0) h = x2b - x;
    if (stepper.try_step(sys, y, x, h) != odeint::success) {
      if (++fails > 200 || std::abs(h) < 1e-14) throw StepUnderflow("step size underflow");
    } else {
      fails = 0;
    }
  }
  return y;
}

}  // namespace

ReturnResult return_map(const SymbolDescriptor& s, double omega, double x1, double theta_guess,
                        double x2_start, int direction, double tol) {
  double th = project_to_sigma(s, omega, x1, x2_start, theta_guess);
  State3 y = x2_flow(s, {x1, th, 0.0}, x2_start, x2_start + direction * kTwoPi, tol);
  return {y[0], y[1], std::abs(y[2])};
}

namespace {

double normal_gamma(const SymbolDescriptor& s, double x1, double theta) {
  double c = std::cos(theta), sn = std::sin(theta);
  int orient = c >= 0 ? 1 : -1;
  SymbolGradient g = gradient(s, x1, 0.0, c, sn);
  // p ~ a xi2/xi1loc + b x1loc near the cycle
  double a = g.dxi2;
  double b = orient * g.dx1;
  return -a / b;
}

LimitCycle refine_cycle(const SymbolDescriptor& s, double omega, double x1, double theta,
                        CycleKind kind) {
  const int dir = kind == CycleKind::Sink ? 1 : -1;
  for (int it = 0; it < 60; ++it) {
    auto r = return_map(s, omega, x1, theta, 0.0, dir);
    double g = r.x1 - x1;
    if (s.family != Family::NormalForm) g = wrap_signed(g);
    if (std::abs(g) <= 1e-10) {
      theta = project_to_sigma(s, omega, x1, 0.0, theta);
      break;
    }
    const double h = 1e-6;
    auto rp = return_map(s, omega, x1 + h, theta, 0.0, dir);
    auto rm = return_map(s, omega, x1 - h, theta, 0.0, dir);
    double dR = (rp.x1 - rm.x1) / (2 * h);
    if (s.family != Family::NormalForm) dR = wrap_signed(rp.x1 - rm.x1) / (2 * h);
    double step = g / (dR - 1.0);
    x1 -= std::clamp(step, -0.2, 0.2);
    theta = project_to_sigma(s, omega, x1, 0.0, theta);
    if (it == 59) throw AssumptionViolation("return-map Newton did not converge");
  }
  LimitCycle c;
  c.kind = kind;
  c.symbol = s;
  c.omega = omega;
  c.x1 = s.family == Family::NormalForm ? x1 : wrap(x1);
  c.theta = wrap(theta);
  c.orientation = std::cos(c.theta) >= 0 ? 1 : -1;
  c.gamma = normal_gamma(s, c.x1, c.theta);
  // samples along one lap, run in the stable direction
  const int m = 64;
  State3 y{c.x1, c.theta, 0.0};
  double x2 = 0;
  for (int i = 0; i < m; ++i) {
    c.samples.push_back(reduce(s, {y[0], x2, y[1]}));
    double nx2 = dir * (i + 1) * kTwoPi / m;
    y = x2_flow(s, y, x2, nx2, 1e-12);
    x2 = nx2;
  }
  auto est = lyapunov(c);
  c.lyapunov = est.lambda;
  c.lyapunov_monodromy = est.lambda_monodromy;
  c.multiplier = est.multiplier;
  c.period = est.period;
  return c;
}

}  // namespace

LyapunovEstimate lyapunov(const LimitCycle& c, double section_x2) {
  const auto& s = c.symbol;
  const int dir = c.kind == CycleKind::Sink ? 1 : -1;
  // anchor on the requested section
  double x1 = c.x1, th = c.theta;
  if (section_x2 != 0.0) {
    State3 y = x2_flow(s, {c.x1, c.theta, 0.0}, 0.0, section_x2, 1e-13);
    x1 = y[0];
    th = y[1];
  }
  auto base = return_map(s, c.omega, x1, th, section_x2, dir);
  auto diffq = [&](double h) {
    auto rp = return_map(s, c.omega, x1 + h, th, section_x2, dir);
    auto rm = return_map(s, c.omega, x1 - h, th, section_x2, dir);
    double d = rp.x1 - rm.x1;
    if (s.family != Family::NormalForm) d = wrap_signed(d);
    return d / (2 * h);
  };
  const double h = 1e-3;
  double mu = (4 * diffq(h / 2) - diffq(h)) / 3;
  if (std::abs(mu - 1.0) < 1e-6) throw NonHyperbolic("Floquet multiplier too close to 1");

  // variational monodromy in x2-time with a finite-difference Jacobian of the field
  using State7 = std::array<double, 7>;
  auto G = [&](double a, double b, double x2) {
    auto f = rescaled_field(s, {a, x2, b});
    return std::array<double, 2>{f[0] / f[1], f[2] / f[1]};
  };
  auto sys = [&](const State7& y, State7& dy, double x2) {
    auto f = rescaled_field(s, {y[0], x2, y[1]});
    dy[0] = f[0] / f[1];
    dy[1] = f[2] / f[1];
    dy[2] = 1.0 / f[1];
    const double e = 1e-6;
    auto ga = G(y[0] + e, y[1], x2), gb = G(y[0] - e, y[1], x2);
    auto gc = G(y[0], y[1] + e, x2), gd = G(y[0], y[1] - e, x2);
    double J[2][2] = {{(ga[0] - gb[0]) / (2 * e), (gc[0] - gd[0]) / (2 * e)},
                      {(ga[1] - gb[1]) / (2 * e), (gc[1] - gd[1]) / (2 * e)}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dy[3 + 2 * i + j] = J[i][0] * y[3 + j] + J[i][1] * y[5 + j];
  };
  State7 y{x1, project_to_sigma(s, c.omega, x1, section_x2, th), 0.0, 1, 0, 0, 1};
  odeint::integrate_adaptive(odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State7>()),
                             sys, y, section_x2, section_x2 + dir * kTwoPi, dir * 0.05);
  double tr = y[3] + y[6], det = y[3] * y[6] - y[4] * y[5];
  double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  double e1 = tr / 2 + disc, e2 = tr / 2 - disc;
  double mu_m = std::abs(std::log(std::abs(e1))) > std::abs(std::log(std::abs(e2))) ? e1 : e2;

  LyapunovEstimate out;
  out.period = base.time;
  out.multiplier = mu;
  out.lambda = -std::log(std::abs(mu)) / out.period;
  out.lambda_monodromy = -std::log(std::abs(mu_m)) / out.period;
  return out;
}

void check_no_fixed_points(const SymbolDescriptor& s, double omega, int grid) {
  if (s.family == Family::NormalForm) return;  // x2' = 1/cos theta never vanishes in the cone
  auto residual = [&](double x1, double th) {
    auto f = rescaled_field(s, {x1, 0.0, th});
    double p = symbol_at(s, {x1, 0.0, th}) - omega;
    return Eigen::Vector4d(f[0], f[1], f[2], p);
  };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double x1 = kTwoPi * (i + 0.5) / grid, th = kTwoPi * (j + 0.5) / grid;
      if (residual(x1, th).norm() > 0.6) continue;
      for (int it = 0; it < 40; ++it) {
        Eigen::Vector4d r = residual(x1, th);
        const double e = 1e-7;
        Eigen::Matrix<double, 4, 2> J;
        J.col(0) = (residual(x1 + e, th) - residual(x1 - e, th)) / (2 * e);
        J.col(1) = (residual(x1, th + e) - residual(x1, th - e)) / (2 * e);
        Eigen::Vector2d step = J.completeOrthogonalDecomposition().solve(r);
        x1 -= std::clamp(step[0], -0.3, 0.3);
        th -= std::clamp(step[1], -0.3, 0.3);
      }
      if (residual(x1, th).norm() < 1e-9)
        throw AssumptionViolation("rescaled field vanishes on Sigma(omega): fixed point near x1=" +
                                  std::to_string(wrap(x1)) + " theta=" + std::to_string(wrap(th)));
    }
}

std::vector<LimitCycle> find_cycles(const SymbolDescriptor& spec, double omega,
                                    const FindOptions& opt) {
  const SymbolDescriptor s = principal(spec);
  std::vector<LimitCycle> sinks, sources;
  if (s.family == Family::NormalForm) {
    SymbolDescriptor mirror = s;
    mirror.lambda = -s.lambda;
    double xs = -omega / s.lambda;
    sinks.push_back(refine_cycle(s, omega, xs + 0.01, std::atan(omega + s.lambda * (xs + 0.01)),
                                 CycleKind::Sink));
    double xm = omega / s.lambda;
    sources.push_back(refine_cycle(mirror, omega, xm + 0.01,
                                   std::atan(omega - s.lambda * (xm + 0.01)), CycleKind::Source));
  } else {
    check_no_fixed_points(s, omega);
    const int n = opt.seeds;
    std::vector<CospherePoint> seeds;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          CospherePoint p{kTwoPi * (i + 0.5) / n, kTwoPi * j / n, kTwoPi * (l + 0.5) / n};
          if (std::abs(symbol_at(s, p) - omega) > 0.2) continue;
          try {
            p.theta = project_to_sigma(s, omega, p.x1, p.x2, p.theta);
          } catch (const GeometryError&) {
            continue;
          }
          seeds.push_back(p);
        }
    // endpoints of long forward/backward runs, carried to the section x2 = 0
    struct End {
      bool ok = false;
      double x1 = 0, theta = 0;
    };
    std::vector<End> fwd(seeds.size()), bwd(seeds.size());
    parallel_for(int(seeds.size()) * 2, opt.workers, [&](int job) {
      int i = job / 2, dir = job % 2 == 0 ? 1 : -1;
      End& e = dir > 0 ? fwd[i] : bwd[i];
      try {
        auto tr = integrate(s, omega, seeds[i], 0.0, dir * opt.horizon, opt.tol);
        CospherePoint q = tr.points.back();
        double target = dir > 0 ? std::ceil(q.x2 / kTwoPi) * kTwoPi : std::floor(q.x2 / kTwoPi) * kTwoPi;
        State3 y = x2_flow(s, {q.x1, q.theta, 0.0}, q.x2, target, 1e-12);
        e.x1 = wrap(y[0]);
        e.theta = wrap(y[1]);
        e.ok = true;
      } catch (const std::exception&) {
        e.ok = false;
      }
    });
    auto cluster = [&](const std::vector<End>& ends, CycleKind kind, std::vector<LimitCycle>& out) {
      std::vector<std::pair<double, double>> reps;
      for (const auto& e : ends) {
        if (!e.ok) continue;
        bool found = false;
        for (auto& r : reps)
          if (circular_distance(r.first, e.x1) < 1e-3 && circular_distance(r.second, e.theta) < 1e-3)
            found = true;
        if (!found) reps.push_back({e.x1, e.theta});
      }
      for (auto& r : reps) {
        LimitCycle c;
        try {
          c = refine_cycle(s, omega, r.first, r.second, kind);
        } catch (const AssumptionViolation&) {
          continue;
        }
        bool dup = false;
        for (auto& o : out)
          if (circular_distance(o.x1, c.x1) < 1e-8 && circular_distance(o.theta, c.theta) < 1e-8) dup = true;
        if (!dup) out.push_back(std::move(c));
      }
    };
    cluster(fwd, CycleKind::Sink, sinks);
    cluster(bwd, CycleKind::Source, sources);
    if (sinks.size() != sources.size())
      throw AssumptionViolation("found " + std::to_string(sinks.size()) + " sinks but " +
                                std::to_string(sources.size()) + " sources");
    if (sinks.empty()) throw AssumptionViolation("no limit cycles on Sigma(omega)");
  }
  auto order = [](const LimitCycle& a, const LimitCycle& b) {
    double xa = wrap_signed(a.x1), xb = wrap_signed(b.x1);
    if (std::abs(xa - xb) > 1e-9) return xa < xb;
    return a.theta < b.theta;
  };
  std::sort(sinks.begin(), sinks.end(), order);
  std::sort(sources.begin(), sources.end(), order);
  std::vector<LimitCycle> all;
  for (auto& c : sinks) all.push_back(c);
  for (auto& c : sources) all.push_back(c);
  for (size_t i = 0; i < all.size(); ++i) all[i].id = int(i);
  return all;
}

double local_x1(const LimitCycle& c, double x1) {
  double d = x1 - c.x1;
  if (c.symbol.family != Family::NormalForm) d = wrap_signed(d);
  return c.orientation * d;
}

double section_phase(const LimitCycle& c, double x1, double x2) {
  return x2 + c.gamma * std::log(std::abs(local_x1(c, x1)));
}

namespace {
void require_line(const LimitCycle& c) {
  for (const auto& p : c.samples)
    if (circular_distance(p.x1, c.x1) > 1e-7 && std::abs(p.x1 - c.x1) > 1e-7)
      throw GeometryError("cycle is not a line x1 = const; local coordinates unavailable");
}

CospherePoint section_point(const LimitCycle& c, double z, double x1loc) {
  CospherePoint p;
  p.x1 = c.x1 + c.orientation * x1loc;
  p.x2 = z - c.gamma * std::log(std::abs(x1loc));
  p.theta = project_to_sigma(c.symbol, c.omega, p.x1, p.x2, c.theta);
  return p;
}

double periodic_interp(const std::vector<double>& v, double z) {
  const int m = int(v.size());
  double t = wrap(z) / kTwoPi * m;
  int i = int(std::floor(t)) % m;
  double f = t - std::floor(t);
  return (1 - f) * v[i] + f * v[(i + 1) % m];
}
}  // namespace

CrossSection build_section(const LimitCycle& c, double offset, int side, int m) {
  require_line(c);
  if (!(offset > 0)) throw std::invalid_argument("offset must be positive");
  CrossSection sec;
  sec.cycle_id = c.id;
  sec.side = side;
  sec.offset = offset;
  sec.gamma = c.gamma;
  const int dir = c.kind == CycleKind::Sink ? 1 : -1;
  sec.min_angle_deg = 90;
  for (int i = 0; i < m; ++i) {
    double z = kTwoPi * i / m;
    CospherePoint p = section_point(c, z, side * offset);
    sec.z.push_back(z);
    sec.points.push_back(p);
    auto f = rescaled_field(c.symbol, p);
    double x1loc = local_x1(c, p.x1);
    double rho_dot = c.orientation * f[0] / x1loc;
    double z_dot = f[1] + c.gamma * rho_dot;
    double ang = std::atan2(std::abs(rho_dot), std::abs(z_dot)) * 180 / kPi;
    sec.min_angle_deg = std::min(sec.min_angle_deg, ang);
  }
  if (sec.min_angle_deg < 10.0)
    throw GeometryError("section is not transversal to the flow; offset too large");

  // one lap towards the cycle, read back on the section through the phase z
  std::vector<double> shift(m);
  for (int i = 0; i < m; ++i) {
    const auto& p = sec.points[i];
    State3 y = x2_flow(c.symbol, {p.x1, p.theta, 0.0}, p.x2, p.x2 + dir * kTwoPi, 1e-13);
    double zz = section_phase(c, y[0], p.x2 + dir * kTwoPi) - dir * kTwoPi;
    shift[i] = wrap_signed(zz - sec.z[i]);
  }
  std::vector<double> dphi(m);
  for (int i = 0; i < m; ++i) {
    double a = shift[(i + 1) % m], b = shift[(i + m - 1) % m];
    dphi[i] = 1.0 + wrap_signed(a - b) / (2 * kTwoPi / m);
  }
  auto pull = [&](const std::vector<double>& mu) {
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) out[i] = periodic_interp(mu, sec.z[i] + shift[i]) * dphi[i];
    return out;
  };
  std::vector<double> mu(m, 1.0), acc(m, 1.0), avg(m, 1.0);
  int n = 1;
  for (; n < 400; ++n) {
    mu = pull(mu);
    double change = 0;
    for (int i = 0; i < m; ++i) {
      acc[i] += mu[i];
      double next = acc[i] / (n + 1);
      change = std::max(change, std::abs(next - avg[i]));
      avg[i] = next;
    }
    if (change <= 1e-9) break;
  }
  sec.birkhoff_iterations = n;
  double mean = 0;
  for (double v : avg) mean += v / m;
  const double lam = c.lyapunov > 0 ? c.lyapunov : 1.0 / std::abs(c.gamma);
  for (auto& v : avg) v *= (1.0 / lam) / mean;
  auto pulled = pull(avg);
  sec.invariance_defect = 0;
  for (int i = 0; i < m; ++i)
    sec.invariance_defect = std::max(sec.invariance_defect, std::abs(pulled[i] - avg[i]) * lam);
  sec.mu = avg;
  return sec;
}

double RelationRow::predict(double z0) const {
  const int m = int(z.size());
  double span = kTwoPi * winding;
  double t = wrap(z0 - z[0]) / kTwoPi * m;
  int i = int(std::floor(t));
  double f = t - i;
  i %= m;
  double ya = y[i];
  double yb = i + 1 < m ? y[i + 1] : y[0] + span;
  return (1 - f) * ya + f * yb;
}

namespace {

struct Target {
  std::function<double(const CospherePoint&)> event;  // positive before the crossing
};

struct Crossing {
  int target = -1;
  CospherePoint p;
  double t = 0;
};

// integrates until the first target event changes sign, then bisects on the dense output
Crossing run_leg(const SymbolDescriptor& s, double omega, const CospherePoint& start, int dir,
                 double budget, const std::vector<Target>& targets) {
  auto sys = [&](const State3& x, State3& dx, double) {
    auto f = rescaled_field(s, {x[0], x[1], x[2]});
    dx = {f[0], f[1], f[2]};
  };
  auto ds = odeint::make_dense_output(1e-12, 1e-12, odeint::runge_kutta_dopri5<State3>());
  ds.initialize(State3{start.x1, start.x2, start.theta}, 0.0, dir * 1e-3);
  std::vector<double> prev(targets.size());
  for (size_t k = 0; k < targets.size(); ++k) prev[k] = targets[k].event(start);
  while (std::abs(ds.current_time()) < budget) {
    auto span = ds.do_step(sys);
    const State3& x = ds.current_state();
    CospherePoint p{x[0], x[1], x[2]};
    if (std::abs(symbol_at(s, p) - omega) > 1e-6)
      throw DriftAbort("energy drift above limit", std::abs(symbol_at(s, p) - omega));
    Crossing best;
    double best_t = INFINITY;
    for (size_t k = 0; k < targets.size(); ++k) {
      double v = targets[k].event(p);
      if (prev[k] > 0 && v <= 0) {
        double a = span.first, b = span.second;
        State3 xm;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (a + b);
          ds.calc_state(mid, xm);
          if (targets[k].event({xm[0], xm[1], xm[2]}) > 0) a = mid;
          else b = mid;
        }
        ds.calc_state(b, xm);
        if (std::abs(b) < best_t) {
          best_t = std::abs(b);
          best.target = int(k);
          best.p = {xm[0], xm[1], xm[2]};
          best.t = b;
        }
      }
      prev[k] = v;
    }
    if (best.target >= 0) return best;
  }
  const State3& x = ds.current_state();
  throw BudgetError("trajectory not captured within the time budget", {x[0], x[1], x[2]});
}

Target near_cycle(const LimitCycle& c, double offset) {
  return {[&c, offset](const CospherePoint& p) {
    if (c.symbol.family != Family::NormalForm && circular_distance(p.theta, c.theta) > 0.6) return 1.0;
    return std::abs(local_x1(c, p.x1)) - offset;
  }};
}

}  // namespace

ScatteringRelationTable scattering_relation(const std::vector<LimitCycle>& sources,
                                            const std::vector<LimitCycle>& sinks,
                                            const RelationOptions& opt) {
  const auto& from = opt.reverse ? sinks : sources;
  const auto& to = opt.reverse ? sources : sinks;
  for (const auto& c : from) require_line(c);
  for (const auto& c : to) require_line(c);
  const int dir = opt.reverse ? -1 : 1;
  const bool glued = !from.empty() && from[0].symbol.family == Family::NormalForm;

  ScatteringRelationTable table;
  table.offset = opt.offset;
  const int m = opt.samples;
  struct Sample {
    int sink = -1, sigma_out = 0;
    double y = 0;
  };
  std::vector<std::pair<int, int>> branches;
  for (int j = 0; j < int(from.size()); ++j)
    for (int sg : {+1, -1}) branches.push_back({j, sg});
  std::vector<std::vector<Sample>> out(branches.size(), std::vector<Sample>(m));

  parallel_for(int(branches.size()) * m, opt.workers, [&](int job) {
    auto [j, sg] = branches[job / m];
    int i = job % m;
    const LimitCycle& src = from[j];
    double z = kTwoPi * i / m;
    CospherePoint p = section_point(src, z, sg * opt.offset);
    Crossing cr;
    if (!glued) {
      std::vector<Target> targets;
      for (const auto& c : to) targets.push_back(near_cycle(c, opt.offset));
      cr = run_leg(src.symbol, src.omega, p, dir, opt.budget, targets);
    } else {
      // leave the first model at |x1loc| = glue, continue in the second one
      Target leave{[&src, &opt](const CospherePoint& q) { return opt.glue - std::abs(local_x1(src, q.x1)); }};
      Crossing mid = run_leg(src.symbol, src.omega, p, dir, opt.budget, {leave});
      const LimitCycle& dst = to[0];
      CospherePoint q;
      q.x1 = dst.x1 + dst.orientation * src.orientation * (mid.p.x1 - src.x1);
      q.x2 = mid.p.x2;
      q.theta = project_to_sigma(dst.symbol, dst.omega, q.x1, q.x2, dst.theta);
      cr = run_leg(dst.symbol, dst.omega, q, dir, opt.budget, {near_cycle(dst, opt.offset)});
    }
    const LimitCycle& dst = to[cr.target];
    double x1loc = local_x1(dst, cr.p.x1);
    Sample& smp = out[job / m][i];
    smp.sink = cr.target;
    smp.sigma_out = x1loc > 0 ? 1 : -1;
    smp.y = section_phase(dst, cr.p.x1, cr.p.x2);
  });

  for (size_t b = 0; b < branches.size(); ++b) {
    RelationRow row;
    row.source = branches[b].first;
    row.sigma = branches[b].second;
    row.sink = out[b][0].sink;
    row.sigma_out = out[b][0].sigma_out;
    for (int i = 0; i < m; ++i) {
      if (out[b][i].sink != row.sink || out[b][i].sigma_out != row.sigma_out) row.single_target = false;
      row.z.push_back(kTwoPi * i / m);
      double yv = out[b][i].y;
      if (i > 0) yv = row.y.back() + wrap_signed(yv - row.y.back());
      row.y.push_back(yv);
    }
    double step0 = row.y.size() > 1 ? row.y[1] - row.y[0] : 0.0;
    row.winding = int(std::lround((row.y.back() - row.y.front() + step0) / kTwoPi));
    double span = kTwoPi * row.winding;
    row.monotone = row.winding != 0;
    for (int i = 0; i < m; ++i) {
      double next = i + 1 < m ? row.y[i + 1] : row.y[0] + span;
      double prev = i > 0 ? row.y[i - 1] : row.y[m - 1] - span;
      double d = next - row.y[i];
      if (row.winding * d <= 0) row.monotone = false;
      row.dydz.push_back((next - prev) / (2 * kTwoPi / m));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double off_lagrangian_fraction(const SpectralField& u, const std::vector<LimitCycle>& cycles,
                               double h, int workers) {
  const int ndir = int(std::ceil(kTwoPi / std::sqrt(h)));
  const double tol = 3 * std::sqrt(h);
  const auto& g = u.grid;
  std::vector<double> on(ndir, 0.0), tot(ndir, 0.0);
  parallel_for(ndir, workers, [&](int d) {
    double th = kTwoPi * d / ndir;
    auto I = wavepacket_scan(u, th, h);
    for (int i = 0; i < g.n1; ++i) {
      double x1 = g.x1(i);
      bool hit = false;
      for (const auto& c : cycles)
        if (circular_distance(x1, c.x1) <= tol && circular_distance(th, c.theta) <= tol) hit = true;
      for (int j = 0; j < g.n2; ++j) {
        double e = I[i * g.n2 + j] * I[i * g.n2 + j];
        tot[d] += e;
        if (hit) on[d] += e;
      }
    }
  });
  double a = 0, b = 0;
  for (int d = 0; d < ndir; ++d) {
    a += on[d];
    b += tot[d];
  }
  return b > 0 ? 1.0 - a / b : 0.0;
}

}  // namespace zs
