#include "mmp/rocp.hpp"

#include "mmp/errors.hpp"
#include "mmp/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace mmp {

// ---------------------------------------------------------------------------
// Cost and terminal ingredients

namespace {
bool is_diagonal(const Mat2& m) { return m.a12 == 0.0 && m.a21 == 0.0; }
Mat2 symmetrized(const Mat2& m) { return m + m.transposed(); }
}  // namespace

double CostWeights::m_low() const {
  return std::min({Q.a11, Q.a22, R.a11, R.a22, P.a11, P.a22});
}

double CostWeights::m_high() const {
  return std::max({Q.a11, Q.a22, R.a11, R.a22, P.a11, P.a22});
}

void CostWeights::validate() const {
  if (!is_diagonal(Q) || !is_diagonal(R) || !is_diagonal(P)) throw ValidationError("cost weights must be diagonal");
  if (Q.a11 < 0.0 || Q.a22 < 0.0) throw ValidationError("Q must be nonnegative");
  if (R.a11 <= 0.0 || R.a22 <= 0.0 || P.a11 <= 0.0 || P.a22 <= 0.0)
    throw ValidationError("R and P must be positive");
}

double running_cost(const Vec2& e, const Vec2& u, const CostWeights& w) { return quad(w.Q, e) + quad(w.R, u); }

double terminal_cost(const Vec2& e, const CostWeights& w) { return quad(w.P, e); }

double lipschitz_F(const CostWeights& w, double eps_bar) { return 2.0 * eps_bar * spectral_norm(w.Q); }

double lipschitz_V(const CostWeights& w, double alpha1) {
  const double lmin = symmetric_eigenvalues(w.P).first;
  return 2.0 * spectral_norm(w.P) * std::sqrt(alpha1 / lmin);
}

double pair_union_radius(double side) { return std::sqrt(7.0) * side; }

double terminal_decrease(const AgentContext& ctx, const CostWeights& w, double kappa, const Vec2& x_des,
                         const Vec2& e, const std::vector<Vec2>& xbar) {
  const Vec2 df = eval_coupling(ctx.spec, x_des + e, xbar) - eval_coupling(ctx.spec, x_des, xbar);
  const Vec2 ke = kappa * e;
  return 2.0 * dot(e, w.P * (df - ke)) + quad(w.Q, e) + quad(w.R, ke);
}

TerminalIngredients design_terminal(const AgentContext& ctx, const CostWeights& w, const Partition& p,
                                    std::uint64_t seed, int samples) {
  w.validate();
  const double lmin = symmetric_eigenvalues(w.P).first;
  const double rh = p.inscribed_radius();
  const Rect& b = p.bounds();
  static constexpr double kFactors[] = {0.95, 0.75, 0.5, 0.25, 0.1};
  static constexpr double kGains[] = {1.0, 0.5, 2.0, 0.25, 4.0, 8.0};

  for (double factor : kFactors) {
    const double alpha1 = factor * lmin * rh * rh;
    const double r_phi = std::sqrt(alpha1 / lmin);
    for (double kappa : kGains) {
      if (ctx.M + kappa * r_phi > ctx.spec.u_max) continue;
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> ux(b.xmin, b.xmax), uy(b.ymin, b.ymax), unit(-1.0, 1.0);
      bool ok = true;
      std::vector<Vec2> xbar(ctx.neighbor_count());
      for (int s = 0; s < samples && ok; ++s) {
        const Vec2 x_des{ux(rng), uy(rng)};
        for (auto& xj : xbar) xj = {ux(rng), uy(rng)};
        Vec2 d;
        do {
          d = {unit(rng), unit(rng)};
        } while (squared_norm(d) > 1.0);
        const Vec2 e{d.x * std::sqrt(alpha1 / w.P.a11), d.y * std::sqrt(alpha1 / w.P.a22)};
        if (terminal_decrease(ctx, w, kappa, x_des, e, xbar) > 1e-12) ok = false;
      }
      if (!ok) continue;
      TerminalIngredients t;
      t.kappa = kappa;
      t.alpha1 = alpha1;
      t.alpha2 = 0.5 * alpha1;
      t.r_phi = r_phi;
      t.r_term = std::sqrt(t.alpha2 / lmin);
      t.eps_bar = pair_union_radius(p.side());
      t.L_F = lipschitz_F(w, t.eps_bar);
      t.L_V = lipschitz_V(w, alpha1);
      t.rho_bar = (t.alpha1 - t.alpha2) / t.L_V;
      if (!(t.r_term < rh)) continue;
      log::write(log::Level::info, "terminal_design",
                 log::Fields{}.add("agent", ctx.id + 1).add("kappa", kappa).add("alpha1", alpha1).add("r_term", t.r_term).str());
      return t;
    }
  }
  throw TerminalDesignError("no terminal controller passes for agent " + std::to_string(ctx.id + 1));
}

std::string_view to_string(Tightening t) { return t == Tightening::sampled ? "sampled" : "horizon"; }

Tightening parse_tightening(std::string_view s) {
  if (s == "horizon") return Tightening::horizon;
  if (s == "sampled") return Tightening::sampled;
  throw ValidationError("tightening must be horizon or sampled");
}

RocpProblem make_problem(const AgentContext& ctx, const Partition& p, const CostWeights& w,
                         const TerminalIngredients& term, const SolverConfig& cfg, int src, int dir, double h, int m) {
  auto dst = neighbor_in_direction(p, src, dir);
  if (!dst) throw ValidationError("no region in direction " + std::to_string(dir) + " of " + std::to_string(src));
  RocpProblem prob;
  prob.ctx = &ctx;
  prob.partition = &p;
  prob.weights = w;
  prob.terminal = term;
  prob.config = cfg;
  prob.src = src;
  prob.dir = dir;
  prob.dst = *dst;
  prob.x_des = p.region(*dst).center;
  prob.union_edges = pair_union_edges(p, src, *dst);
  prob.h = h;
  prob.m = m;
  return prob;
}

// ---------------------------------------------------------------------------
// Constraint sets

namespace {

double neighbor_extra(const RocpProblem& prob) {
  return prob.config.tightening == Tightening::horizon ? 2.0 * std::numbers::sqrt3 * prob.partition->side() : 0.0;
}

double point_sd(const kernels::PolygonEdges& poly, const Vec2& x) {
  double out = 0.0;
  kernels::signed_distance(poly, std::span<const double>(&x.x, 1), std::span<const double>(&x.y, 1),
                           std::span<double>(&out, 1));
  return out;
}

// Signed distance and its gradient (scalar; used by the optimizer).
double sd_with_gradient(const kernels::PolygonEdges& poly, const Vec2& p, Vec2& grad) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_d;
  bool inside = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 r{p.x - poly.ax[i], p.y - poly.ay[i]};
    const Vec2 d{poly.dx[i], poly.dy[i]};
    const double t = std::clamp(dot(r, d) * poly.inv_len2[i], 0.0, 1.0);
    const Vec2 c = r - t * d;
    const double d2 = squared_norm(c);
    if (d2 < best) {
      best = d2;
      best_d = c;
    }
    const double by = poly.ay[i] + poly.dy[i];
    if ((poly.ay[i] > p.y) != (by > p.y)) {
      const double xint = poly.ax[i] + (p.y - poly.ay[i]) * poly.slope_x[i];
      if (p.x < xint) inside = !inside;
    }
  }
  const double dist = std::sqrt(best);
  grad = dist > 0.0 ? (1.0 / dist) * best_d : Vec2{};
  if (inside) {
    grad = -grad;
    return -dist;
  }
  return dist;
}

}  // namespace

double tightening_radius(const RocpInstance& inst, double s_rel) {
  const RocpProblem& prob = *inst.problem;
  const double dt = prob.config.tightening == Tightening::sampled ? std::min(s_rel, prob.h) : s_rel;
  return rho(*prob.ctx, std::max(0.0, dt), norm(inst.e0));
}

bool tightened_membership(const RocpInstance& inst, const Vec2& e_hat, double s_rel) {
  const RocpProblem& prob = *inst.problem;
  const double r = tightening_radius(inst, s_rel);
  const Vec2 x = prob.x_des + e_hat;
  if (!(point_sd(prob.union_edges, x) < -r)) return false;
  const double conn = prob.ctx->spec.sensing - r - neighbor_extra(prob);
  for (const auto& xj : inst.neighbors)
    if (!(norm(x - xj) < conn)) return false;
  if (norm(eval_coupling(prob.ctx->spec, x, inst.neighbors)) > prob.ctx->M * (1.0 + 1e-12)) return false;
  const Rect& b = prob.partition->bounds();
  return x.x > b.xmin + r && x.x < b.xmax - r && x.y > b.ymin + r && x.y < b.ymax - r;
}

bool state_admissible(const RocpProblem& prob, const Vec2& x, const std::vector<Vec2>& neighbors) {
  if (point_sd(prob.union_edges, x) > 0.0) return false;
  for (const auto& xj : neighbors)
    if (norm(x - xj) > prob.ctx->spec.sensing) return false;
  if (norm(eval_coupling(prob.ctx->spec, x, neighbors)) > prob.ctx->M * (1.0 + 1e-12)) return false;
  return prob.partition->bounds().contains(x);
}

// ---------------------------------------------------------------------------
// Frozen-neighbor model

namespace {

struct FrozenModel {
  const DynamicsSpec* spec;
  std::vector<Vec2> nb;
  Vec2 bias;  // Σ A_ij x̂_j

  FrozenModel(const DynamicsSpec& s, const std::vector<Vec2>& neighbors) : spec(&s), nb(neighbors) {
    for (std::size_t j = 0; j < nb.size(); ++j) bias += s.neighbors[j].gain * nb[j];
  }

  Vec2 f(const Vec2& x) const {
    Vec2 out = spec->self * x + bias;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const double c = spec->neighbors[j].sin2;
      if (c == 0.0) continue;
      const double sx = std::sin(x.x - nb[j].x);
      const double sy = std::sin(x.y - nb[j].y);
      out += c * Vec2{sx * sx, sy * sy};
    }
    return out;
  }

  Vec2 step(const Vec2& x, const Vec2& u, double dt) const {
    const Vec2 k1 = f(x) + u;
    const Vec2 k2 = f(x + 0.5 * dt * k1) + u;
    const Vec2 k3 = f(x + 0.5 * dt * k2) + u;
    const Vec2 k4 = f(x + dt * k3) + u;
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // f and its Jacobian from one sincos per coupled component.
  Vec2 f_jac(const Vec2& x, Mat2& J) const {
    Vec2 out = spec->self * x + bias;
    J = spec->self;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const double c = spec->neighbors[j].sin2;
      if (c == 0.0) continue;
      double sx, cx, sy, cy;
      ::sincos(x.x - nb[j].x, &sx, &cx);
      ::sincos(x.y - nb[j].y, &sy, &cy);
      out += c * Vec2{sx * sx, sy * sy};
      J.a11 += 2.0 * c * sx * cx;
      J.a22 += 2.0 * c * sy * cy;
    }
    return out;
  }

  // RK4 step with its Jacobians with respect to x and u.
  Vec2 step_jac(const Vec2& x, const Vec2& u, double dt, Mat2& Fx, Mat2& Fu) const {
    const Mat2 I = Mat2::identity();
    Mat2 J1, J2, J3, J4;
    const Vec2 k1 = f_jac(x, J1) + u;
    const Vec2 p2 = x + 0.5 * dt * k1;
    const Vec2 k2 = f_jac(p2, J2) + u;
    const Vec2 p3 = x + 0.5 * dt * k2;
    const Vec2 k3 = f_jac(p3, J3) + u;
    const Vec2 p4 = x + dt * k3;
    const Vec2 k4 = f_jac(p4, J4) + u;
    const Mat2 D1x = J1;
    const Mat2 D2x = J2 * (I + (0.5 * dt) * D1x);
    const Mat2 D3x = J3 * (I + (0.5 * dt) * D2x);
    const Mat2 D4x = J4 * (I + dt * D3x);
    const Mat2 D1u = I;
    const Mat2 D2u = I + (0.5 * dt) * (J2 * D1u);
    const Mat2 D3u = I + (0.5 * dt) * (J3 * D2u);
    const Mat2 D4u = I + dt * (J4 * D3u);
    Fx = I + (dt / 6.0) * (D1x + 2.0 * D2x + 2.0 * D3x + D4x);
    Fu = (dt / 6.0) * (D1u + 2.0 * D2u + 2.0 * D3u + D4u);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

Vec2 project_ball(const Vec2& u, double r) {
  const double n = norm(u);
  if (n <= r || n == 0.0) return u;
  return (r / n) * u;
}

class Solver {
 public:
  explicit Solver(const RocpInstance& inst)
      : inst_(inst),
        prob_(*inst.problem),
        cfg_(prob_.config),
        model_(prob_.ctx->spec, inst.neighbors),
        n_(inst.pieces()),
        sub_(std::max(1, cfg_.substeps)),
        delta_(prob_.h / sub_),
        x0_(prob_.x_des + inst.e0),
        u_ss_(-model_.f(prob_.x_des)) {
    const int N = n_ * sub_;
    rho_coarse_.resize(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) rho_coarse_[static_cast<std::size_t>(i)] = tightening_radius(inst, i * delta_);
    const int K = n_ * cfg_.dense_factor;
    const double dt = prob_.h / cfg_.dense_factor;
    rho_dense_.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) rho_dense_[static_cast<std::size_t>(k)] = tightening_radius(inst, k * dt);
    conn_ = prob_.ctx->spec.sensing - neighbor_extra(prob_);
  }

  std::optional<RocpSolution> solve(const WarmStart* warm) {
    if (cfg_.budget == 0) return std::nullopt;
    if (n_ == 0) return solve_degenerate();
    if (terminal_set_excluded()) return std::nullopt;

    if (warm && static_cast<int>(warm->controls.size()) == n_) {
      auto opt = optimize(warm->controls, cfg_.warm_iterations);
      std::optional<DenseTrajectory> dense;
      if (!opt.moved && warm->dense) dense = warm->dense;
      if (auto sol = verify(opt.u, dense)) {
        sol->reused_warm = !opt.moved;
        return sol;
      }
      if (budget_exhausted()) return std::nullopt;
      // The shifted tail of a feasible solution stays feasible in the nominal loop.
      if (opt.moved) {
        if (auto sol = verify(warm->controls, warm->dense)) {
          sol->reused_warm = true;
          return sol;
        }
        if (budget_exhausted()) return std::nullopt;
      }
    }

    // Multi-start: screen all starts by the penalized objective, refine the best.
    std::vector<std::vector<Vec2>> starts = make_starts(warm);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t s = 0; s < starts.size(); ++s) order.emplace_back(objective(starts[s], nullptr), s);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t refine = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg_.refine)), order.size());
    for (std::size_t phase = 0; phase < 2; ++phase) {
      const std::size_t lo = phase == 0 ? 0 : refine;
      const std::size_t hi = phase == 0 ? refine : order.size();
      if (lo >= hi) break;
      std::vector<Optimized> cands;
      for (std::size_t k = lo; k < hi; ++k) cands.push_back(optimize(starts[order[k].second], cfg_.iterations));
      std::vector<std::size_t> idx(cands.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cands[a].obj < cands[b].obj; });
      for (std::size_t k : idx) {
        if (auto sol = verify(cands[k].u, std::nullopt)) return sol;
        if (budget_exhausted()) return std::nullopt;
      }
    }
    return std::nullopt;
  }

  int verifications() const { return verifications_; }

 private:
  struct Optimized {
    std::vector<Vec2> u;
    double obj = 0.0;
    bool moved = false;
  };

  // Necessary condition: some point of the terminal disk must pass the final check.
  bool terminal_set_excluded() const {
    const double r = rho_dense_.back();
    const double rt = prob_.terminal.r_term;
    for (const auto& xj : inst_.neighbors)
      if (norm(prob_.x_des - xj) - rt >= conn_ - r) return true;
    const Rect& b = prob_.partition->bounds();
    const Vec2& c = prob_.x_des;
    return c.x + rt <= b.xmin + r || c.x - rt >= b.xmax - r || c.y + rt <= b.ymin + r || c.y - rt >= b.ymax - r;
  }

  bool budget_exhausted() const { return cfg_.budget >= 0 && verifications_ >= cfg_.budget; }

  std::optional<RocpSolution> solve_degenerate() {
    ++verifications_;
    if (norm(inst_.e0) > prob_.terminal.r_term) return std::nullopt;
    if (!(point_sd(prob_.union_edges, x0_) < 0.0)) return std::nullopt;
    RocpSolution sol;
    sol.cost = terminal_cost(inst_.e0, prob_.weights);
    sol.dense.x = {x0_};
    sol.verifications = verifications_;
    return sol;
  }

  // Penalized objective on the coarse model; fills grad when requested.
  double objective(const std::vector<Vec2>& u, std::vector<Vec2>* grad) const {
    const int N = n_ * sub_;
    const auto& w = prob_.weights;
    const double mu = cfg_.penalty;
    const double margin = cfg_.margin;
    const Rect& b = prob_.partition->bounds();
    std::vector<Vec2> xs(static_cast<std::size_t>(N) + 1);
    std::vector<Mat2> Fx, Fu;
    if (grad) {
      Fx.resize(static_cast<std::size_t>(N));
      Fu.resize(static_cast<std::size_t>(N));
    }
    xs[0] = x0_;
    for (int i = 0; i < N; ++i) {
      const Vec2& ui = u[static_cast<std::size_t>(i / sub_)];
      const auto si = static_cast<std::size_t>(i);
      xs[si + 1] = grad ? model_.step_jac(xs[si], ui, delta_, Fx[si], Fu[si]) : model_.step(xs[si], ui, delta_);
    }
    std::vector<Vec2> gx(grad ? xs.size() : 0);
    double J = 0.0;
    const Mat2 Qs = symmetrized(w.Q), Rs = symmetrized(w.R), Ps = symmetrized(w.P);
    for (int i = 0; i <= N; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Vec2 e = xs[si] - prob_.x_des;
      const double wq = (i == 0 || i == N) ? 0.5 * delta_ : delta_;
      J += wq * quad(w.Q, e);
      if (grad) gx[si] += wq * (Qs * e);
      if (i == 0) continue;
      const double r = rho_coarse_[si];
      const Vec2& x = xs[si];
      Vec2 gsd;
      const double g1 = sd_with_gradient(prob_.union_edges, x, gsd) + r + margin;
      if (g1 > 0.0) {
        J += mu * g1 * g1;
        if (grad) gx[si] += (2.0 * mu * g1) * gsd;
      }
      for (const auto& xj : inst_.neighbors) {
        const Vec2 d = x - xj;
        const double dn = norm(d);
        const double g2 = dn - (conn_ - r) + margin;
        if (g2 > 0.0) {
          J += mu * g2 * g2;
          if (grad && dn > 0.0) gx[si] += (2.0 * mu * g2 / dn) * d;
        }
      }
      const double lims[4] = {b.xmin + r + margin - x.x, x.x - (b.xmax - r - margin), b.ymin + r + margin - x.y,
                              x.y - (b.ymax - r - margin)};
      const Vec2 dirs[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (int k = 0; k < 4; ++k) {
        if (lims[k] > 0.0) {
          J += mu * lims[k] * lims[k];
          if (grad) gx[si] += (2.0 * mu * lims[k]) * dirs[k];
        }
      }
    }
    const Vec2 eN = xs.back() - prob_.x_des;
    J += quad(w.P, eN);
    if (grad) gx.back() += Ps * eN;
    const double en = norm(eN);
    const double gt = en - prob_.terminal.r_term * 0.9;
    if (gt > 0.0) {
      J += mu * gt * gt;
      if (grad && en > 0.0) gx.back() += (2.0 * mu * gt / en) * eN;
    }
    if (grad) grad->assign(static_cast<std::size_t>(n_), Vec2{});
    for (int k = 0; k < n_; ++k) {
      const Vec2 v = u[static_cast<std::size_t>(k)] - u_ss_;
      J += prob_.h * quad(w.R, v);
      if (grad) (*grad)[static_cast<std::size_t>(k)] += prob_.h * (Rs * v);
    }
    if (grad) {
      Vec2 lam = gx.back();
      for (int i = N - 1; i >= 0; --i) {
        const auto si = static_cast<std::size_t>(i);
        (*grad)[static_cast<std::size_t>(i / sub_)] += Fu[si].transposed() * lam;
        lam = gx[si] + Fx[si].transposed() * lam;
      }
    }
    return J;
  }

  Optimized optimize(const std::vector<Vec2>& u0, int iterations) const {
    const double umax = prob_.ctx->spec.u_max;
    Optimized out;
    std::vector<Vec2> u(u0.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = project_ball(u0[k], umax);
    std::vector<Vec2> g, gn, un(u.size());
    double f = objective(u, &g);
    const double f0 = f;
    const double rmax = std::max(w_max(prob_.weights.R), 1e-12);
    double alpha = 1.0 / (2.0 * prob_.h * rmax);
    int stall = 0;
    bool moved = false;
    for (int it = 0; it < iterations; ++it) {
      bool accepted = false;
      double fn = f;
      for (int bt = 0; bt < 40; ++bt) {
        double dd = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
          un[k] = project_ball(u[k] - alpha * g[k], umax);
          dd += squared_norm(un[k] - u[k]);
        }
        if (dd == 0.0) break;
        fn = objective(un, nullptr);
        if (fn <= f - 1e-4 / alpha * dd) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      objective(un, &gn);
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec2 s = un[k] - u[k];
        ss += squared_norm(s);
        sy += dot(s, gn[k] - g[k]);
      }
      alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-8, 1e6) : std::min(alpha * 2.0, 1e6);
      const double gain = f - fn;
      u.swap(un);
      g.swap(gn);
      f = fn;
      moved = true;
      stall = gain <= 1e-8 * (1.0 + std::abs(f)) ? stall + 1 : 0;
      if (stall >= 3) break;
    }
    if (!moved || f0 - f <= cfg_.keep_tolerance * (1.0 + std::abs(f0))) {
      out.u = u0;
      out.obj = f0;
      out.moved = false;
      for (std::size_t k = 0; k < out.u.size(); ++k)
        if (!(project_ball(u0[k], umax) == u0[k])) out.moved = true;
      if (out.moved) {
        for (auto& v : out.u) v = project_ball(v, umax);
      }
      return out;
    }
    out.u = std::move(u);
    out.obj = f;
    out.moved = true;
    return out;
  }

  static double w_max(const Mat2& m) { return std::max(m.a11, m.a22); }

  std::vector<Vec2> rollout(const auto& policy) const {
    std::vector<Vec2> u(static_cast<std::size_t>(n_));
    Vec2 x = x0_;
    for (int k = 0; k < n_; ++k) {
      const Vec2 uk = project_ball(policy(k, x), prob_.ctx->spec.u_max);
      u[static_cast<std::size_t>(k)] = uk;
      for (int s = 0; s < sub_; ++s) x = model_.step(x, uk, delta_);
    }
    return u;
  }

  std::vector<std::vector<Vec2>> make_starts(const WarmStart* warm) const {
    std::vector<std::vector<Vec2>> out;
    if (warm && static_cast<int>(warm->controls.size()) == n_) out.push_back(warm->controls);
    const double T = inst_.horizon();
    const double h = prob_.h;
    const Vec2 target = prob_.x_des;
    auto feedback = [&](double kappa) {
      return rollout([&, kappa](int, const Vec2& x) { return u_ss_ - kappa * (x - target); });
    };
    auto straight = [&](double tau, double lateral) {
      const Vec2 d = target - x0_;
      const Vec2 perp = norm(d) > 0.0 ? (1.0 / norm(d)) * Vec2{-d.y, d.x} : Vec2{};
      const Vec2 mid = x0_ + 0.5 * d + lateral * prob_.partition->side() * perp;
      auto ref = [=, this](double t) {
        const double s = std::min(t / tau, 1.0);
        if (lateral == 0.0) return x0_ + s * d;
        return s < 0.5 ? x0_ + (2.0 * s) * (mid - x0_) : mid + (2.0 * s - 1.0) * (target - mid);
      };
      return rollout([&, ref](int k, const Vec2& x) { return (1.0 / h) * (ref((k + 1) * h) - x) - model_.f(x); });
    };
    // Through the source center, which keeps clear of the concave corners of the union.
    auto via_center = [&](double tau) {
      const Vec2 c = prob_.partition->region(prob_.src).center;
      auto ref = [=, this](double t) {
        const double s = std::min(t / tau, 1.0);
        return s < 0.5 ? x0_ + (2.0 * s) * (c - x0_) : c + (2.0 * s - 1.0) * (target - c);
      };
      return rollout([&, ref](int k, const Vec2& x) { return (1.0 / h) * (ref((k + 1) * h) - x) - model_.f(x); });
    };
    out.push_back(feedback(8.0));
    out.push_back(feedback(4.0));
    out.push_back(via_center(T / 4));
    out.push_back(straight(T / 8, 0.0));
    out.push_back(straight(T / 4, 0.0));
    out.push_back(straight(T / 16, 0.0));
    out.push_back(straight(T / 2, 0.0));
    out.push_back(straight(T, 0.0));
    out.push_back(feedback(2.0));
    out.push_back(feedback(1.0));
    out.push_back(straight(T / 4, 0.25));
    out.push_back(straight(T / 4, -0.25));
    out.push_back(straight(T / 2, 0.25));
    out.push_back(straight(T / 2, -0.25));
    out.push_back(straight(T / 8, 0.25));
    out.push_back(straight(T / 8, -0.25));
    out.push_back(std::vector<Vec2>(static_cast<std::size_t>(n_), u_ss_));
    out.push_back(std::vector<Vec2>(static_cast<std::size_t>(n_), Vec2{}));
    const auto limit = static_cast<std::size_t>(std::max(1, cfg_.starts)) + (warm ? 1 : 0);
    if (out.size() > limit) out.resize(limit);
    return out;
  }

  DenseTrajectory integrate(const std::vector<Vec2>& u) const {
    const int df = cfg_.dense_factor;
    const double dt = prob_.h / df;
    DenseTrajectory traj;
    traj.x.reserve(static_cast<std::size_t>(n_ * df) + 1);
    Vec2 x = x0_;
    traj.x.push_back(x);
    for (int k = 0; k < n_; ++k)
      for (int s = 0; s < df; ++s) {
        x = model_.step(x, u[static_cast<std::size_t>(k)], dt);
        traj.x.push_back(x);
      }
    return traj;
  }

 public:
  double dense_cost(const std::vector<Vec2>& u, const DenseTrajectory& traj) const {
    const auto& w = prob_.weights;
    const double dt = prob_.h / cfg_.dense_factor;
    double J = 0.0;
    const std::size_t K = traj.x.size() - 1;
    for (std::size_t k = 0; k <= K; ++k) {
      const double wq = (k == 0 || k == K) ? 0.5 * dt : dt;
      J += wq * quad(w.Q, traj.x[k] - prob_.x_des);
    }
    for (const auto& uk : u) J += prob_.h * quad(w.R, uk - u_ss_);
    return J + quad(w.P, traj.x.back() - prob_.x_des);
  }

 private:
  std::optional<RocpSolution> verify(const std::vector<Vec2>& u, std::optional<DenseTrajectory> cached) {
    ++verifications_;
    const bool usable = cached && cached->x.size() == rho_dense_.size() && cached->x.front() == x0_;
    DenseTrajectory traj = usable ? std::move(*cached) : integrate(u);
    const std::size_t K = traj.x.size();
    xs_.resize(K);
    ys_.resize(K);
    sd_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      xs_[k] = traj.x[k].x;
      ys_[k] = traj.x[k].y;
    }
    kernels::signed_distance(prob_.union_edges, xs_, ys_, sd_);
    const Rect& b = prob_.partition->bounds();
    const double M = prob_.ctx->M * (1.0 + 1e-12);
    for (std::size_t k = 0; k < K; ++k) {
      const double r = rho_dense_[k];
      const Vec2& x = traj.x[k];
      if (!(sd_[k] < -r)) return std::nullopt;
      for (const auto& xj : inst_.neighbors)
        if (!(norm(x - xj) < conn_ - r)) return std::nullopt;
      if (!(x.x > b.xmin + r && x.x < b.xmax - r && x.y > b.ymin + r && x.y < b.ymax - r)) return std::nullopt;
      if (norm(model_.f(x)) > M) return std::nullopt;
    }
    if (norm(traj.x.back() - prob_.x_des) > prob_.terminal.r_term) return std::nullopt;
    RocpSolution sol;
    sol.controls = u;
    sol.cost = dense_cost(u, traj);
    sol.dense = std::move(traj);
    sol.verifications = verifications_;
    return sol;
  }

  const RocpInstance& inst_;
  const RocpProblem& prob_;
  const SolverConfig& cfg_;
  FrozenModel model_;
  int n_;
  int sub_;
  double delta_;
  Vec2 x0_;
  Vec2 u_ss_;
  double conn_ = 0.0;
  std::vector<double> rho_coarse_, rho_dense_;
  std::vector<double> xs_, ys_, sd_;
  int verifications_ = 0;
};

}  // namespace

std::optional<RocpSolution> solve_rocp(const RocpInstance& inst, const WarmStart* warm) {
  if (!inst.problem || inst.z < 0 || inst.z > inst.problem->m) throw ValidationError("malformed ROCP instance");
  if (inst.neighbors.size() != inst.problem->ctx->neighbor_count())
    throw ValidationError("neighbor estimate count mismatch");
  Solver s(inst);
  auto sol = s.solve(warm);
  if (log::enabled(log::Level::debug))
    log::write(log::Level::debug, "rocp_solve",
               log::Fields{}
                   .add("agent", inst.problem->ctx->id + 1)
                   .add("src", inst.problem->src)
                   .add("dir", inst.problem->dir)
                   .add("z", inst.z)
                   .add("feasible", sol ? 1 : 0)
                   .add("verifications", s.verifications())
                   .add("cost", sol ? sol->cost : -1.0)
                   .str());
  return sol;
}

double trajectory_cost(const RocpInstance& inst, const std::vector<Vec2>& controls, const DenseTrajectory& traj) {
  Solver s(inst);
  return s.dense_cost(controls, traj);
}

DenseTrajectory integrate_frozen(const RocpProblem& prob, const Vec2& x0, const std::vector<Vec2>& neighbors,
                                 const std::vector<Vec2>& controls) {
  FrozenModel model(prob.ctx->spec, neighbors);
  const int df = prob.config.dense_factor;
  const double dt = prob.h / df;
  DenseTrajectory traj;
  Vec2 x = x0;
  traj.x.push_back(x);
  for (const auto& u : controls)
    for (int s = 0; s < df; ++s) {
      x = model.step(x, u, dt);
      traj.x.push_back(x);
    }
  return traj;
}

std::optional<TransitionPlan> transition_controller(const RocpProblem& prob, const Vec2& x0,
                                                    const std::vector<Vec2>& neighbors) {
  TransitionPlan plan;
  plan.src = prob.src;
  plan.dir = prob.dir;
  plan.dst = prob.dst;
  const int df = prob.config.dense_factor;
  Vec2 x = x0;
  std::optional<WarmStart> warm;
  for (int z = 0; z < prob.m; ++z) {
    RocpInstance inst{&prob, z, x - prob.x_des, neighbors};
    auto sol = solve_rocp(inst, warm ? &*warm : nullptr);
    ++plan.solver_calls;
    if (!sol) {
      log::write(log::Level::debug, "transition_infeasible",
                 log::Fields{}.add("agent", prob.ctx->id + 1).add("src", prob.src).add("dir", prob.dir).add("z", z).str());
      return std::nullopt;
    }
    plan.costs.push_back(sol->cost);
    if (rho(*prob.ctx, inst.horizon(), norm(inst.e0)) > prob.terminal.rho_bar) ++plan.rho_bar_violations;
    plan.controls.push_back(sol->controls.front());
    plan.nominal.push_back(x);
    x = sol->dense.x[static_cast<std::size_t>(df)];
    WarmStart next;
    next.controls.assign(sol->controls.begin() + 1, sol->controls.end());
    DenseTrajectory tail;
    tail.x.assign(sol->dense.x.begin() + df, sol->dense.x.end());
    next.dense = std::move(tail);
    warm = std::move(next);
  }
  plan.nominal.push_back(x);
  plan.terminal_error = x - prob.x_des;
  return plan;
}

}  // namespace mmp
