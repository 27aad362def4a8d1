#include "qrad/emission.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "qrad/fields.hpp"
#include "qrad/ray_quadrature.hpp"
#include "qrad/serialization.hpp"

namespace qrad {

Mat3 transverse_projector(const Vec3& p) {
  const double w2 = p.squaredNorm();
  if (w2 == 0.0) throw ZeroMomentumError("transverse projector is singular at p = 0");
  return Mat3::Identity() - p * p.transpose() / w2;
}

CVec3 project_transverse(const Vec3& p, const CVec3& h) {
  const double w = p.norm();
  if (w == 0.0) throw ZeroMomentumError("transverse projector is singular at p = 0");
  const Vec3 n = p / w;
  const cplx nh = n.x() * h.x() + n.y() * h.y() + n.z() * h.z();
  return h - nh * n.cast<cplx>();
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::Direct: return "direct";
    case Representation::Ibp1: return "ibp1";
    case Representation::Ibp2: return "ibp2";
    case Representation::ClosedForm: return "closed-form";
    case Representation::Zero: return "zero";
  }
  return "?";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Auto: return "auto";
    case Strategy::Direct: return "direct";
    case Strategy::Ibp1: return "ibp1";
    case Strategy::Ibp2: return "ibp2";
  }
  return "?";
}

std::string to_string(Engine e) { return e == Engine::Ray ? "ray" : "adaptive"; }

Engine engine_from_string(const std::string& s) {
  if (s == "ray") return Engine::Ray;
  if (s == "adaptive") return Engine::Adaptive;
  throw ValidationError(fmt::format("unknown engine '{}' (ray, adaptive)", s));
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "auto") return Strategy::Auto;
  if (s == "direct") return Strategy::Direct;
  if (s == "ibp1") return Strategy::Ibp1;
  if (s == "ibp2") return Strategy::Ibp2;
  throw ValidationError(fmt::format("unknown strategy '{}'", s));
}

namespace {

constexpr long double two_pi_l = 6.283185307179586476925286766559005768L;

// e^{i psi(p, t)} with psi accumulated in extended precision, piece given explicitly.
cplx phase_factor(const Trajectory::Piece& pc, const Vec3& p, double omega, double t) {
  const long double tau = static_cast<long double>(t) - static_cast<long double>(pc.origin);
  long double px = 0.0L;
  for (int d = 0; d < 3; ++d) {
    long double x = 0.0L;
    for (std::size_t k = kMaxDegree + 1; k-- > 0;) x = x * tau + pc.poly.c[k][d];
    px += static_cast<long double>(p[d]) * x;
  }
  long double psi = static_cast<long double>(omega) * static_cast<long double>(t) - px;
  psi -= two_pi_l * std::nearbyint(psi / two_pi_l);
  return std::polar(1.0, static_cast<double>(psi));
}

// Trajectory re-expanded about a panel center, so that node phases are small
// offsets from an accurately computed center phase.
class LocalPhase {
public:
  LocalPhase(const Trajectory& tr, const Vec3& p) : tr_(tr), p_(p), omega_(p.norm()) {}

  struct Node {
    Vec3 v, a, j;
    double psi_t, psi_tt, psi_ttt;
    cplx phase;
  };

  void move_to(double center) {
    if (center == center_) return;
    center_ = center;
    const auto& pc = tr_.pieces()[tr_.piece_index(center, Side::Right)];
    base_ = phase_factor(pc, p_, omega_, center);
    q_ = pc.poly.shifted(center - pc.origin);
    for (std::size_t k = 0; k <= kMaxDegree; ++k) a_[k] = p_.dot(q_.c[k]);
  }

  Node at(double s) const {
    const auto jt = q_.jet(s);
    double d = a_[kMaxDegree];
    for (std::size_t k = kMaxDegree; k-- > 1;) d = d * s + a_[k];
    d *= s;
    return {jt.v, jt.a, jt.j, omega_ - p_.dot(jt.v), -p_.dot(jt.a), -p_.dot(jt.j),
            base_ * std::polar(1.0, omega_ * s - d)};
  }

private:
  const Trajectory& tr_;
  Vec3 p_;
  double omega_;
  double center_ = std::numeric_limits<double>::quiet_NaN();
  cplx base_{1.0, 0.0};
  VecPoly q_;
  std::array<double, kMaxDegree + 1> a_{};
};

double require_momentum(const Vec3& p) {
  const double w = p.norm();
  if (w == 0.0) throw ZeroMomentumError("amplitude undefined at p = 0");
  if (!p.allFinite()) throw ValidationError("momentum must be finite");
  return w;
}

std::vector<Interval> support_of(const Trajectory& tr, bool velocity) {
  std::vector<Interval> out;
  const auto pieces = tr.pieces();
  for (std::size_t i = 1; i + 1 < pieces.size(); ++i) {
    const bool vanishes = velocity ? tr.velocity_vanishes_on(i) : tr.acceleration_vanishes_on(i);
    if (!vanishes) out.push_back({pieces[i].lo, pieces[i].hi});
  }
  return out;
}

template <class Integrand>
AmplitudeValue run_integral(const Trajectory& tr, const Vec3& p, bool velocity_support,
                            Integrand&& integrand, const OscOptions& opt) {
  const double omega = p.norm();
  LocalPhase lp(tr, p);
  auto f = [&](double c, double s) -> CVec3 {
    lp.move_to(c);
    return integrand(lp.at(s));
  };
  const auto support = support_of(tr, velocity_support);
  AmplitudeValue out;
  if (support.empty()) return out;
  const auto res = integrate_oscillatory(f, support, omega * (1.0 + tr.v0()), opt);
  out.value = res.value;
  out.error = res.error_estimate;
  out.panels = res.subdivisions;
  out.converged = res.converged;
  return out;
}

void finish(AmplitudeValue& v) {
  v.value *= amplitude_prefactor;
  v.error *= std::abs(amplitude_prefactor);
}

}  // namespace

bool applicable(const Trajectory& tr, Representation rep) {
  switch (rep) {
    case Representation::Direct: return tr.has_compact_velocity();
    case Representation::Ibp1: return true;
    case Representation::Ibp2: return !tr.has_velocity_jump();
    default: return false;
  }
}

AmplitudeValue amplitude_direct(const Trajectory& tr, const Vec3& p, const OscOptions& opt) {
  require_momentum(p);
  if (!applicable(tr, Representation::Direct)) {
    throw RepresentationError("direct representation needs compactly supported velocity");
  }
  auto g = [](const LocalPhase::Node& n) -> CVec3 { return n.v.cast<cplx>() * n.phase; };
  AmplitudeValue out = run_integral(tr, p, true, g, opt);
  finish(out);
  return out;
}

AmplitudeValue amplitude_ibp1(const Trajectory& tr, const Vec3& p, const OscOptions& opt) {
  const double omega = require_momentum(p);
  auto g = [](const LocalPhase::Node& n) -> CVec3 {
    const Vec3 a = (n.psi_tt / (n.psi_t * n.psi_t)) * n.v - n.a / n.psi_t;
    return a.cast<cplx>() * (n.phase * cplx(0.0, -1.0));
  };
  AmplitudeValue out = run_integral(tr, p, false, g, opt);
  const auto b = tr.breakpoints();
  const auto cls = tr.classes();
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (cls[k] != Smoothness::C0) continue;
    const auto l = tr.phase(p, b[k], Side::Left);
    const auto r = tr.phase(p, b[k], Side::Right);
    const Vec3 delta = tr.eval(b[k], 1, Side::Left) / l.psi_t - tr.eval(b[k], 1, Side::Right) / r.psi_t;
    const cplx e = phase_factor(tr.pieces()[tr.piece_index(b[k], Side::Left)], p, omega, b[k]);
    out.value += delta.cast<cplx>() * (e * cplx(0.0, -1.0));
  }
  finish(out);
  return out;
}

AmplitudeValue amplitude_ibp2(const Trajectory& tr, const Vec3& p, const OscOptions& opt) {
  const double omega = require_momentum(p);
  if (!applicable(tr, Representation::Ibp2)) {
    throw RepresentationError("second integration by parts needs a continuous velocity");
  }
  auto g = [](const LocalPhase::Node& n) -> CVec3 {
    const double it = 1.0 / n.psi_t;
    const double it2 = it * it, it3 = it2 * it;
    const Vec3 a = (n.psi_ttt * it3 - 3.0 * n.psi_tt * n.psi_tt * it2 * it2) * n.v +
                   (3.0 * n.psi_tt * it3) * n.a - it2 * n.j;
    return a.cast<cplx>() * n.phase;
  };
  AmplitudeValue out = run_integral(tr, p, false, g, opt);
  const auto b = tr.breakpoints();
  const auto cls = tr.classes();
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (cls[k] != Smoothness::C1) continue;
    const Vec3 da = tr.eval(b[k], 2, Side::Left) - tr.eval(b[k], 2, Side::Right);
    const Vec3 v = tr.eval(b[k], 1, Side::Left);
    const double pt = tr.phase(p, b[k], Side::Left).psi_t;
    const Vec3 term = (p.dot(da) / (pt * pt * pt)) * v + da / (pt * pt);
    const cplx e = phase_factor(tr.pieces()[tr.piece_index(b[k], Side::Left)], p, omega, b[k]);
    out.value += term.cast<cplx>() * e;
  }
  finish(out);
  return out;
}

AmplitudeValue amplitude(const Trajectory& tr, const Vec3& p, Representation rep, const OscOptions& opt) {
  switch (rep) {
    case Representation::Direct: return amplitude_direct(tr, p, opt);
    case Representation::Ibp1: return amplitude_ibp1(tr, p, opt);
    case Representation::Ibp2: return amplitude_ibp2(tr, p, opt);
    case Representation::Zero: return {};
    default: throw RepresentationError("closed forms are not a full amplitude representation");
  }
}

namespace {

constexpr double degenerate_threshold = 1e-14;

// Shared algebra of Delta and F: a/(omega - p.a) - b/(omega - p.b) with
// a - b = dv and the transverse split (|dv|/omega)(n_dv - n (n.n_dv))/den and
// (1/omega) n x (b x a)/den.
void split_pair(const Vec3& a, const Vec3& b, const Vec3& p, Vec3& total, Vec3& first, Vec3& second) {
  const double omega = require_momentum(p);
  const Vec3 n = p / omega;
  const Vec3 dv = a - b;
  total = first = second = Vec3::Zero();
  if (dv.norm() < degenerate_threshold) return;
  total = a / (omega - p.dot(a)) - b / (omega - p.dot(b));
  const double den = (1.0 - n.dot(a)) * (1.0 - n.dot(b));
  const Vec3 ndv = dv.normalized();
  first = (dv.norm() / omega) * (ndv - n * n.dot(ndv)) / den;
  const Vec3 cross = b.cross(a);
  if (cross.norm() >= degenerate_threshold) second = n.cross(cross) / (omega * den);
}

}  // namespace

JumpPieces closed_form_delta(const Vec3& v_minus, const Vec3& v_plus, const Vec3& p) {
  if (v_minus.norm() >= 1.0 || v_plus.norm() >= 1.0) throw SuperluminalError("|v| must be < 1");
  JumpPieces out;
  split_pair(v_minus, v_plus, p, out.delta, out.delta1_T, out.delta2);
  return out;
}

InfraredPieces closed_form_ir(const Vec3& v_in, const Vec3& v_out, const Vec3& p) {
  if (v_in.norm() >= 1.0 || v_out.norm() >= 1.0) throw SuperluminalError("|v| must be < 1");
  InfraredPieces out;
  split_pair(v_out, v_in, p, out.F, out.F1_T, out.F2);
  return out;
}

AmplitudeValue amplitude_regular(const SeparableCurrent& j, const Vec3& p, const OscOptions& opt) {
  const double omega = require_momentum(p);
  if (j.spatial == nullptr) throw ValidationError("separable current needs a spatial factor");
  if (!(j.duration > 0.0)) throw ValidationError("temporal support must have positive length");
  j.spatial->validate();
  auto g = [&](double t) -> CVec3 {
    return CVec3(std::polar(poly::evaluate(j.temporal, t), omega * t), 0.0, 0.0);
  };
  const Interval support[] = {{0.0, j.duration}};
  const auto res = integrate_plain(g, support, omega, opt);
  const CVec3 ft = j.spatial->transform(p);
  AmplitudeValue out;
  out.value = cplx(0.0, -1.0) * res.value.x() * ft;
  out.error = res.error_estimate * ft.norm();
  out.panels = res.subdivisions;
  out.converged = res.converged;
  return out;
}

double relative_gap(const CVec3& a, const CVec3& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

Representation choose_representation(const Trajectory& tr, double omega, const EmissionOptions& opt) {
  switch (opt.strategy) {
    case Strategy::Direct: return Representation::Direct;
    case Strategy::Ibp1: return Representation::Ibp1;
    case Strategy::Ibp2: return Representation::Ibp2;
    case Strategy::Auto: break;
  }
  if (omega < opt.omega_switch && tr.has_compact_velocity()) return Representation::Direct;
  if (tr.has_velocity_jump() || !tr.has_compact_velocity()) return Representation::Ibp1;
  return Representation::Ibp2;
}

namespace {

std::optional<Representation> alternative_for(const Trajectory& tr, Representation primary) {
  for (auto r : {Representation::Direct, Representation::Ibp1, Representation::Ibp2}) {
    if (r != primary && applicable(tr, r)) return r;
  }
  return std::nullopt;
}

bool radiates(const Trajectory& tr) {
  if (tr.has_velocity_jump()) return true;
  const auto pieces = tr.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!tr.acceleration_vanishes_on(i)) return true;
  }
  return false;
}

// Deterministic thinning for the cross-validation sample.
bool selected(std::size_t key, std::size_t stride) {
  std::uint64_t h = key * 0x9E3779B97F4A7C15ULL;
  h ^= h >> 29;
  return h % stride == 0;
}

}  // namespace

EmissionAmplitude compute_amplitude(const Trajectory& tr, std::shared_ptr<const SphericalGrid> grid,
                                    const EmissionOptions& opt) {
  if (!grid) throw ValidationError("compute_amplitude needs a grid");
  if (opt.strategy == Strategy::Direct && !applicable(tr, Representation::Direct)) {
    throw RepresentationError("direct strategy needs compactly supported velocity");
  }
  if (opt.strategy == Strategy::Ibp2 && !applicable(tr, Representation::Ibp2)) {
    throw RepresentationError("ibp2 strategy is not applicable to trajectories with velocity jumps");
  }
  const auto& g = *grid;
  const std::size_t n = g.size();
  std::vector<CVec3> J(n, CVec3::Zero());
  std::vector<Representation> rep(n, Representation::Zero);
  std::vector<double> err(n, 0.0);
  std::vector<CrossCheck> checks;

  const auto axis = tr.motion_axis();
  const bool symmetric =
      opt.use_symmetry && axis && g.frame().col(2).cross(*axis).norm() < 1e-12;
  const Vec3 x_ref = axis ? Vec3(tr.data().anchor - tr.data().anchor.dot(*axis) * *axis) : Vec3::Zero();

  if (radiates(tr)) {
    const bool ray = opt.engine == Engine::Ray;
    // A task is one direction for the ray engine and one (r, theta) ring otherwise.
    const std::size_t tasks = ray ? (symmetric ? g.n_theta() : g.n_angular()) : g.n_radial() * g.n_theta();
    const std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(1.0 / std::max(opt.cross_check_fraction, 1e-9))));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex mu;

    auto work = [&] {
      std::vector<CrossCheck> local;
      auto store = [&](std::size_t i, double omega, Representation r, const AmplitudeValue& v) {
        J[i] = v.value;
        err[i] = v.error;
        rep[i] = r;
        if (omega >= opt.cross_check_omega_lo && omega <= opt.cross_check_omega_hi && selected(i, stride)) {
          if (const auto alt = alternative_for(tr, r)) {
            const AmplitudeValue w = amplitude(tr, g.momentum(i), *alt, opt.osc);
            const double gap = relative_gap(v.value, w.value);
            local.push_back({i, omega, r, *alt, gap, gap <= opt.cross_check_tol});
          }
        }
      };
      auto spread = [&](std::size_t ir, std::size_t it) {
        const std::size_t i0 = g.index(ir, it, 0);
        const Vec3 p0 = g.momentum(i0);
        for (std::size_t ip = 1; ip < g.n_phi(); ++ip) {
          const std::size_t i = g.index(ir, it, ip);
          J[i] = J[i0] * std::polar(1.0, -(g.momentum(i) - p0).dot(x_ref));
          err[i] = err[i0];
          rep[i] = rep[i0];
        }
      };
      try {
        for (std::size_t task; !failed && (task = next.fetch_add(1)) < tasks;) {
          if (ray) {
            const std::size_t it = symmetric ? task : task / g.n_phi();
            const std::size_t ip = symmetric ? 0 : task % g.n_phi();
            const Vec3 dir = g.direction(it, ip);
            std::array<std::optional<RayQuadrature>, 3> quad;
            for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
              const double omega = g.radii()[ir];
              const Representation r = choose_representation(tr, omega, opt);
              auto& q = quad[static_cast<std::size_t>(r)];
              if (!q) q.emplace(tr, dir, r, opt.ray);
              store(g.index(ir, it, ip), omega, r, (*q)(omega));
              if (symmetric) spread(ir, it);
            }
          } else {
            const std::size_t ir = task / g.n_theta();
            const std::size_t it = task % g.n_theta();
            const double omega = g.radii()[ir];
            const Representation r = choose_representation(tr, omega, opt);
            for (std::size_t ip = 0; ip < (symmetric ? 1 : g.n_phi()); ++ip) {
              const std::size_t i = g.index(ir, it, ip);
              store(i, omega, r, amplitude(tr, g.momentum(i), r, opt.osc));
            }
            if (symmetric) spread(ir, it);
          }
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
      std::lock_guard lock(mu);
      checks.insert(checks.end(), local.begin(), local.end());
    };

    unsigned threads = opt.threads > 0 ? static_cast<unsigned>(opt.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (first_error) std::rethrow_exception(first_error);
    std::sort(checks.begin(), checks.end(),
              [](const CrossCheck& a, const CrossCheck& b) { return a.index < b.index; });
  }

  std::vector<CVec3> JT(n);
  for (std::size_t i = 0; i < n; ++i) JT[i] = project_transverse(g.momentum(i), J[i]);

  EmissionAmplitude out{grid,
                        ModeFunction(grid, std::move(J), false),
                        ModeFunction(grid, std::move(JT), true),
                        std::move(rep),
                        std::move(err),
                        std::move(checks),
                        opt.strategy,
                        opt.osc,
                        trajectory_hash(tr),
                        symmetric,
                        opt.engine,
                        opt.ray.rel_tol};
  return out;
}

double EmissionAmplitude::max_error() const {
  return error.empty() ? 0.0 : *std::max_element(error.begin(), error.end());
}

bool EmissionAmplitude::cross_checks_passed() const {
  return std::all_of(cross_checks.begin(), cross_checks.end(), [](const CrossCheck& c) { return c.passed; });
}

nlohmann::json EmissionAmplitude::metadata() const {
  std::size_t passed = 0;
  double worst = 0.0;
  for (const auto& c : cross_checks) {
    passed += c.passed ? 1 : 0;
    worst = std::max(worst, c.rel_gap);
  }
  return {{"trajectory_hash", trajectory_hash},
          {"strategy", to_string(strategy)},
          {"engine", to_string(engine)},
          {"tolerances",
           {{"oscillatory_rel", tolerances.rel_tol},
            {"panels_per_period", tolerances.panels_per_period},
            {"ray_rel", ray_tolerance}}},
          {"symmetric_fast_path", symmetric_fast_path},
          {"cross_checks", {{"count", cross_checks.size()}, {"passed", passed}, {"max_rel_gap", worst}}},
          {"max_error_estimate", max_error()}};
}

void EmissionAmplitude::write_csv(std::ostream& os, std::size_t stride) const {
  nlohmann::json meta = metadata();
  meta["grid"] = grid_metadata(*grid);
  stride = std::max<std::size_t>(stride, 1);
  meta["stride"] = stride;
  os << "# " << meta.dump() << '\n';
  os << "p_x,p_y,p_z,re_J_x,im_J_x,re_J_y,im_J_y,re_J_z,im_J_z,"
        "re_JT_x,im_JT_x,re_JT_y,im_JT_y,re_JT_z,im_JT_z,error,representation\n";
  for (std::size_t i = 0; i < J.size(); i += stride) {
    const Vec3 p = grid->momentum(i);
    const CVec3& a = J[i];
    const CVec3& b = J_T[i];
    os << fmt::format("{:.17g},{:.17g},{:.17g}", p.x(), p.y(), p.z());
    for (int k = 0; k < 3; ++k) os << fmt::format(",{:.17g},{:.17g}", a[k].real(), a[k].imag());
    for (int k = 0; k < 3; ++k) os << fmt::format(",{:.17g},{:.17g}", b[k].real(), b[k].imag());
    os << fmt::format(",{:.17g},{}\n", error[i], to_string(representation[i]));
  }
}

}  // namespace qrad
