#include "amforge/amcore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "amforge/error.hpp"

namespace amforge {

namespace {

std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Direction opposite(Direction d) {
  return d == Direction::FromLower ? Direction::FromUpper : Direction::FromLower;
}

Direction direction_of(BoundaryType t) {
  return t == BoundaryType::I ? Direction::FromLower : Direction::FromUpper;
}

}  // namespace

std::vector<double> GridFn::values() const {
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = nodes[i].value;
  return v;
}

GridFn sample(const WaveFn& f, const GridPtr& grid, double energy, std::optional<BoundaryType> seed_type) {
  GridFn out;
  out.eval = f;
  out.energy = energy;
  out.seed_type = seed_type;
  out.nodes.resize(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) out.nodes[i] = f(grid->x()[i]);
  return out;
}

// ---------------------------------------------------------------------------
// GramTrack

namespace {

/// Reciprocal condition estimate of the diagonally equilibrated matrix, 0 if
/// it is not numerically positive definite.
double equilibrated_rcond(const Eigen::MatrixXd& f) {
  Eigen::VectorXd d(f.rows());
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    if (!(f(j, j) > 0.0) || !std::isfinite(f(j, j))) return 0.0;
    d[j] = 1.0 / std::sqrt(f(j, j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(d.asDiagonal() * f * d.asDiagonal());
  if (llt.info() != Eigen::Success) return 0.0;
  return llt.rcond();
}

}  // namespace

std::shared_ptr<const GramTrack> GramTrack::make(GridPtr grid, std::vector<GridFn> phi, int sigma,
                                                 Direction dir, bool complement, double edge_potential) {
  return std::shared_ptr<const GramTrack>(
      new GramTrack(std::move(grid), std::move(phi), sigma, dir, complement, edge_potential));
}

double GramTrack::tail_offset(const GridFn& a, const GridFn& b, const RunningInner& ri) const {
  // outward coordinate y = s x; the integrand q = a b decays like exp(-int kappa dy)
  // and its tail is q / (kappa + kappa_y / kappa), exact for power-law decay
  const bool upper = ri.direction() == Direction::FromUpper;
  const std::size_t i = upper ? grid_->size() - 1 : 0;
  const double s = upper ? 1.0 : -1.0;
  const FnValue fa = a.nodes[i], fb = b.nodes[i];
  if (fa.value == 0.0 || fb.value == 0.0) return 0.0;
  const double la = fa.derivative / fa.value, lb = fb.derivative / fb.value;
  const double kappa = -s * (la + lb);
  const double kappa_y = -((edge_u_ - a.energy) - la * la + (edge_u_ - b.energy) - lb * lb);
  const double den = kappa + kappa_y / kappa;
  if (!(kappa > 0.0) || !(den > 0.0)) return 0.0;
  return fa.value * fb.value / den - ri.values()[i];
}

GramTrack::GramTrack(GridPtr grid, std::vector<GridFn> phi, int sigma, Direction dir, bool complement,
                     double edge_potential)
    : grid_(std::move(grid)),
      phi_(std::move(phi)),
      sigma_(sigma),
      dir_(dir),
      complement_(complement),
      edge_u_(edge_potential) {
  const std::size_t m = phi_.size();
  const std::size_t n = grid_->size();
  const Direction gdir = complement_ ? opposite(dir_) : dir_;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j; k < m; ++k) {
      std::vector<double> fg(n);
      for (std::size_t i = 0; i < n; ++i) fg[i] = phi_[j].nodes[i].value * phi_[k].nodes[i].value;
      gram_.push_back(std::make_shared<const RunningInner>(grid_, std::move(fg), gdir));
      offset_.push_back(complement_ ? tail_offset(phi_[j], phi_[k], *gram_.back()) : 0.0);
    }
  }
  assign_frames();

  minv_.reserve(n);
  dU_.resize(n);
  const double st = static_cast<double>(sigma_ * tau());
  for (std::size_t i = 0; i < n; ++i) {
    const Frame fr = frame_node(i);
    const Eigen::VectorXd mp = fr.minv * fr.p;
    const double s = fr.p.dot(mp);
    dU_[i] = -2.0 * (2.0 * st * fr.dp.dot(mp) - s * s);
    minv_.push_back(fr.minv);
  }
}

std::optional<GramTrack::Rotation> GramTrack::rotation_at(std::size_t e, int prev) const {
  // psi = A phi with <psi, psi^T> = I at node e: when the phi share their
  // leading behaviour, F is nearly singular there while A F A^T is not. A
  // refines the frame prev, whose basis already cancels the leading part, so
  // the Gram matrix factored here stays well above rounding.
  const std::size_t m = phi_.size();
  const std::size_t n = grid_->size();
  const auto mm = static_cast<Eigen::Index>(m);
  const Rotation* base = prev >= 0 ? &rots_[static_cast<std::size_t>(prev)] : nullptr;
  Eigen::MatrixXd p(m, m), o(m, m);
  std::size_t idx = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j; k < m; ++k, ++idx) {
      o(j, k) = o(k, j) = offset_[idx];
      p(j, k) = p(k, j) = base ? base->gram[idx]->values()[e] : gram_[idx]->values()[e] + offset_[idx];
    }
  }
  const Eigen::MatrixXd a0 = base ? base->a : Eigen::MatrixXd::Identity(mm, mm);
  if (base && complement_) p += a0 * o * a0.transpose();
  Eigen::VectorXd d(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(p(j, j) > 0.0) || !std::isfinite(p(j, j))) return std::nullopt;
    d[j] = 1.0 / std::sqrt(p(j, j));
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(d.asDiagonal() * p * d.asDiagonal());
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd dg = ldlt.vectorD();
  const double floor = 1e-30 * std::max(1.0, dg.maxCoeff());
  Eigen::VectorXd w(m);
  for (Eigen::Index j = 0; j < mm; ++j) w[j] = 1.0 / std::sqrt(std::max(dg[j], floor));
  const Eigen::MatrixXd linv = ldlt.matrixL().solve(Eigen::MatrixXd::Identity(mm, mm));
  const Eigen::MatrixXd perm = ldlt.transpositionsP() * Eigen::MatrixXd::Identity(mm, mm);
  const Eigen::MatrixXd b = w.asDiagonal() * linv * perm * d.asDiagonal();

  Rotation r;
  r.a = b * a0;
  // complement blocks carry no identity, only the rotated tail beyond the grid
  r.fixed = complement_ ? Eigen::MatrixXd(r.a * o * r.a.transpose()) : Eigen::MatrixXd(r.a * r.a.transpose());
  r.log_det = std::log(std::abs(r.a.determinant()));
  if (!std::isfinite(r.log_det)) return std::nullopt;
  r.psi.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    r.psi[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      FnValue v{0.0, 0.0};
      for (std::size_t k = 0; k < m; ++k) {
        const double c = b(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        const FnValue src = base ? base->psi[k][i] : phi_[k].nodes[i];
        v.value += c * src.value;
        v.derivative += c * src.derivative;
      }
      r.psi[j][i] = v;
    }
  }
  const Direction gdir = complement_ ? opposite(dir_) : dir_;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j; k < m; ++k) {
      std::vector<double> fg(n);
      for (std::size_t i = 0; i < n; ++i) fg[i] = r.psi[j][i].value * r.psi[k][i].value;
      r.gram.push_back(std::make_shared<const RunningInner>(grid_, std::move(fg), gdir));
    }
  }
  return r;
}

void GramTrack::assign_frames() {
  // walk in from the growing end; fit a new rotation wherever neither F nor
  // the latest rotation is well conditioned
  constexpr double kRcondFloor = 1e-4;
  const std::size_t n = grid_->size();
  frame_.assign(n, -1);
  if (phi_.size() < 2) return;
  int current = -1;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = dir_ == Direction::FromLower ? n - 1 - step : step;
    const double rf = equilibrated_rcond(matrix_node(i));
    int best = -1;
    double rbest = rf;
    if (current >= 0) {
      const double r = equilibrated_rcond(rotated_node(current, i));
      if (r > rbest) {
        best = current;
        rbest = r;
      }
    }
    if (rbest < kRcondFloor) {
      if (auto rot = rotation_at(i, current)) {
        rots_.push_back(std::move(*rot));
        const int k = static_cast<int>(rots_.size()) - 1;
        const double r = equilibrated_rcond(rotated_node(k, i));
        if (r > rbest) {
          best = k;
          current = k;
        }
      }
    }
    frame_[i] = best;
  }
}

Eigen::MatrixXd GramTrack::assemble(const std::function<double(std::size_t)>& gram, int rot) const {
  const std::size_t m = phi_.size();
  Eigen::MatrixXd f(m, m);
  std::size_t idx = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j; k < m; ++k, ++idx) {
      const double v = gram(idx);
      double e;
      if (rot >= 0) {
        const auto& r = rots_[static_cast<std::size_t>(rot)];
        e = r.fixed(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) + (complement_ ? v : sigma_ * v);
      } else {
        e = complement_ ? v : (j == k ? 1.0 : 0.0) + sigma_ * v;
      }
      f(j, k) = f(k, j) = e;
    }
  }
  return f;
}

Eigen::MatrixXd GramTrack::rotated_node(int rot, std::size_t i) const {
  const auto& g = rots_[static_cast<std::size_t>(rot)].gram;
  return assemble([&](std::size_t idx) { return g[idx]->values()[i]; }, rot);
}

Eigen::MatrixXd GramTrack::rotated_at(int rot, double x) const {
  const auto& g = rots_[static_cast<std::size_t>(rot)].gram;
  return assemble([&](std::size_t idx) { return g[idx]->at(x); }, rot);
}

Eigen::MatrixXd GramTrack::matrix_node(std::size_t i) const {
  return assemble([&](std::size_t idx) { return gram_[idx]->values()[i] + offset_[idx]; }, -1);
}

Eigen::MatrixXd GramTrack::matrix_at(double x) const {
  return assemble([&](std::size_t idx) { return gram_[idx]->at(x) + offset_[idx]; }, -1);
}

Eigen::MatrixXd GramTrack::inverse_node(std::size_t i) const {
  if (frame_[i] < 0) return minv_[i];
  const Eigen::MatrixXd& a = rots_[static_cast<std::size_t>(frame_[i])].a;
  return a.transpose() * minv_[i] * a;
}

Eigen::MatrixXd GramTrack::invert(const Eigen::MatrixXd& f, std::size_t node) const {
  const auto m = f.rows();
  // diagonal equilibration keeps the factorization accurate when entries span
  // many orders of magnitude near a growing end
  Eigen::VectorXd d(m);
  bool ok = true;
  for (Eigen::Index j = 0; j < m; ++j) {
    ok = ok && f(j, j) > 0.0 && std::isfinite(f(j, j));
    d[j] = ok ? 1.0 / std::sqrt(f(j, j)) : 1.0;
  }
  const Eigen::MatrixXd scaled = d.asDiagonal() * f * d.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (ok && llt.info() == Eigen::Success) {
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    return d.asDiagonal() * inv * d.asDiagonal();
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(f);
  const double pivot = ldlt.vectorD().minCoeff();
  const double x = node < grid_->size() ? grid_->x()[node] : std::numeric_limits<double>::quiet_NaN();
  const std::string where = "node " + std::to_string(node) + " (x=" + num(x) + "), smallest pivot " + num(pivot);
  if (sigma_ < 0) {
    throw Error(Errc::SingularDeformation, "deletion matrix is not positive definite at " + where +
                                               "; the deformed Hamiltonian would be singular");
  }
  throw Error(Errc::NotPositiveDefinite, "Gram matrix is not positive definite at " + where);
}

GramTrack::Frame GramTrack::frame_node(std::size_t i) const {
  const std::size_t m = phi_.size();
  Frame out;
  out.rot = frame_[i];
  out.minv = invert(out.rot < 0 ? matrix_node(i) : rotated_node(out.rot, i), i);
  out.p.resize(m);
  out.dp.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const FnValue v = out.rot < 0 ? phi_[j].nodes[i] : rots_[static_cast<std::size_t>(out.rot)].psi[j][i];
    out.p[j] = v.value;
    out.dp[j] = v.derivative;
  }
  return out;
}

GramTrack::Frame GramTrack::stored_frame(std::size_t i) const {
  const std::size_t m = phi_.size();
  Frame out;
  out.rot = frame_[i];
  out.minv = minv_[i];
  out.p.resize(m);
  out.dp.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const FnValue v = out.rot < 0 ? phi_[j].nodes[i] : rots_[static_cast<std::size_t>(out.rot)].psi[j][i];
    out.p[j] = v.value;
    out.dp[j] = v.derivative;
  }
  return out;
}

std::pair<int, Eigen::MatrixXd> GramTrack::best_matrix_at(double x) const {
  std::pair<int, Eigen::MatrixXd> best{-1, matrix_at(x)};
  if (rots_.empty()) return best;
  // candidates: F and the frames of the bracketing nodes
  const auto& xs = grid_->x();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = std::min(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1);
  const std::size_t lo = hi > 0 ? hi - 1 : 0;
  double rbest = equilibrated_rcond(best.second);
  for (const int k : {frame_[lo], frame_[hi]}) {
    if (k < 0 || k == best.first) continue;
    Eigen::MatrixXd f = rotated_at(k, x);
    const double r = equilibrated_rcond(f);
    if (r > rbest) {
      rbest = r;
      best = {k, std::move(f)};
    }
  }
  return best;
}

GramTrack::Frame GramTrack::frame_at(double x) const {
  const std::size_t m = phi_.size();
  auto [rot, f] = best_matrix_at(x);
  Frame out;
  out.rot = rot;
  out.minv = invert(f, std::numeric_limits<std::size_t>::max());
  Eigen::VectorXd v(m), dv(m);
  for (std::size_t j = 0; j < m; ++j) {
    const FnValue fv = phi_[j].eval(x);
    v[j] = fv.value;
    dv[j] = fv.derivative;
  }
  if (rot >= 0) {
    const Eigen::MatrixXd& a = rots_[static_cast<std::size_t>(rot)].a;
    v = a * v;
    dv = a * dv;
  }
  out.p = v;
  out.dp = dv;
  return out;
}

double GramTrack::log_det(double x) const {
  // log det F = log det (A F A^T) - 2 log |det A|
  const auto [rot, f] = best_matrix_at(x);
  Eigen::LLT<Eigen::MatrixXd> llt(f);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd& l = llt.matrixLLT();
  double acc = rot >= 0 ? -2.0 * rots_[static_cast<std::size_t>(rot)].log_det : 0.0;
  for (Eigen::Index j = 0; j < l.rows(); ++j) acc += 2.0 * std::log(l(j, j));
  return acc;
}

double GramTrack::potential_shift(double x) const {
  const Frame fr = frame_at(x);
  const Eigen::VectorXd mp = fr.minv * fr.p;
  const double s = fr.p.dot(mp);
  return -2.0 * (2.0 * sigma_ * tau() * fr.dp.dot(mp) - s * s);
}

GridFn GramTrack::map(const GridFn& psi) const {
  const std::size_t m = phi_.size();
  const std::size_t n = grid_->size();
  // c_k = <phi_k, psi> running in the block direction. In complement form a
  // bound psi is orthogonal to every phi, so c = -(integral from the other end).
  const bool flip = complement_ && !psi.seed_type;
  const Direction cdir = flip ? opposite(dir_) : dir_;
  const double csign = flip ? -1.0 : 1.0;
  std::vector<std::shared_ptr<const RunningInner>> c;
  std::vector<double> coff(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> fg(n);
    for (std::size_t i = 0; i < n; ++i) fg[i] = phi_[k].nodes[i].value * psi.nodes[i].value;
    c.push_back(std::make_shared<const RunningInner>(grid_, std::move(fg), cdir));
    if (flip) coff[k] = tail_offset(phi_[k], psi, *c.back());
  }

  const double sg = sigma_, tu = tau();
  auto self = shared_from_this();
  auto combine = [self, sg, tu](const Frame& fr, const Eigen::VectorXd& cv, FnValue ps) {
    const Eigen::VectorXd gc =
        fr.minv * (fr.rot >= 0 ? Eigen::VectorXd(self->rots_[static_cast<std::size_t>(fr.rot)].a * cv) : cv);
    const double a = fr.p.dot(gc);
    const double b = fr.dp.dot(gc);
    const double s = fr.p.dot(fr.minv * fr.p);
    return FnValue{ps.value - sg * a, ps.derivative - sg * b + tu * s * a - sg * tu * s * ps.value};
  };

  GridFn out;
  out.energy = psi.energy;
  out.seed_type = psi.seed_type;
  out.nodes.resize(n);
  Eigen::VectorXd cv(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) cv[j] = csign * (c[j]->values()[i] + coff[j]);
    out.nodes[i] = combine(stored_frame(i), cv, psi.nodes[i]);
  }
  WaveFn inner = psi.eval;
  out.eval = [self, c, coff, csign, inner, combine, m](double x) {
    Eigen::VectorXd cv(m);
    for (std::size_t j = 0; j < m; ++j) cv[j] = csign * (c[j]->at(x) + coff[j]);
    return combine(self->frame_at(x), cv, inner(x));
  };
  return out;
}

std::vector<GridFn> GramTrack::new_states() const {
  const std::size_t m = phi_.size();
  const std::size_t n = grid_->size();
  const double st = static_cast<double>(sigma_ * tau());
  std::optional<BoundaryType> type;
  if (sigma_ < 0) type = dir_ == Direction::FromLower ? BoundaryType::I : BoundaryType::II;

  // G phi = T^T M^{-1} (T phi) and likewise for phi'
  auto self = shared_from_this();
  auto rows = [self, st](const Frame& fr) {
    Eigen::VectorXd gp = fr.minv * fr.p;
    const double s = fr.p.dot(gp);
    Eigen::VectorXd gdp = fr.minv * fr.dp;
    if (fr.rot >= 0) {
      const Eigen::MatrixXd& a = self->rots_[static_cast<std::size_t>(fr.rot)].a;
      gp = a.transpose() * gp;
      gdp = a.transpose() * gdp;
    }
    std::vector<FnValue> out(static_cast<std::size_t>(gp.size()));
    for (Eigen::Index j = 0; j < gp.size(); ++j) {
      out[static_cast<std::size_t>(j)] = FnValue{gp[j], gdp[j] - st * s * gp[j]};
    }
    return out;
  };

  std::vector<GridFn> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j].energy = phi_[j].energy;
    out[j].seed_type = type;
    out[j].nodes.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rows(stored_frame(i));
    for (std::size_t j = 0; j < m; ++j) out[j].nodes[i] = r[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    out[j].eval = [self, rows, j](double x) { return rows(self->frame_at(x))[j]; };
  }
  return out;
}

// ---------------------------------------------------------------------------
// TransformedSystem

TransformedSystem::TransformedSystem(SolvableSystem base, GridPtr grid)
    : base_(std::move(base)), grid_(std::move(grid)), g_(base_.params().g), h_(base_.params().h) {
  u_nodes_.resize(grid_->size());
  for (std::size_t i = 0; i < grid_->size(); ++i) u_nodes_[i] = base_.potential(grid_->x()[i]);
}

Domain TransformedSystem::support() const {
  if (blocks_.empty()) return base_.domain();
  return {grid_->lower_edge(), grid_->upper_edge()};
}

double TransformedSystem::potential(double x) const {
  if (!blocks_.empty() && (x < grid_->lower_edge() || x > grid_->upper_edge())) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double u = base_.potential(x);
  for (const auto& b : blocks_) u += b->potential_shift(x);
  return u;
}

GridFn TransformedSystem::map_from(std::size_t first_block, GridFn fn) const {
  for (std::size_t b = first_block; b < blocks_.size(); ++b) fn = blocks_[b]->map(fn);
  return fn;
}

GridFn TransformedSystem::map(const GridFn& base_fn) const { return map_from(0, base_fn); }

GridFn TransformedSystem::eigenfunction(int n) const {
  if (!base_.has_level(n)) {
    throw Error(Errc::IndexOutOfRange, "level " + std::to_string(n) + " does not exist in " + base_.label());
  }
  if (std::find(deleted_base_.begin(), deleted_base_.end(), n) != deleted_base_.end()) {
    throw Error(Errc::IndexOutOfRange, "level " + std::to_string(n) + " of " + base_.label() + " was deleted");
  }
  return map(sample(base_.eigenfunction(n), grid_, base_.eigen_energy(n)));
}

std::vector<TransformedSystem::Slot> TransformedSystem::slots(int k) const {
  std::vector<Slot> out;
  const int extra = static_cast<int>(deleted_base_.size());
  const int top = base_.n_max() ? *base_.n_max() : (k < 0 ? 50 : k) + extra;
  for (int n = 0; n <= top; ++n) {
    if (std::find(deleted_base_.begin(), deleted_base_.end(), n) != deleted_base_.end()) continue;
    out.push_back({{base_.eigen_energy(n), "base:n=" + std::to_string(n)}, false, n});
  }
  for (std::size_t a = 0; a < added_.size(); ++a) out.push_back({added_[a].level, true, static_cast<int>(a)});
  std::stable_sort(out.begin(), out.end(),
                   [](const Slot& a, const Slot& b) { return a.level.energy < b.level.energy; });
  if (k >= 0 && static_cast<std::size_t>(k) < out.size()) out.resize(static_cast<std::size_t>(k));
  return out;
}

std::vector<Level> TransformedSystem::levels(int k) const {
  std::vector<Level> out;
  for (const auto& s : slots(k)) out.push_back(s.level);
  return out;
}

GridFn TransformedSystem::state(int k) const {
  const auto s = slots(k + 1);
  if (k < 0 || static_cast<std::size_t>(k) >= s.size()) {
    throw Error(Errc::IndexOutOfRange, "spectrum index " + std::to_string(k) + " is out of range");
  }
  const Slot& slot = s[static_cast<std::size_t>(k)];
  if (!slot.added) return eigenfunction(slot.index);
  const Added& a = added_[static_cast<std::size_t>(slot.index)];
  return map_from(a.block + 1, a.state);
}

std::vector<GridFn> TransformedSystem::added_states() const {
  std::vector<GridFn> out;
  for (const auto& a : added_) out.push_back(map_from(a.block + 1, a.state));
  return out;
}

std::vector<Level> TransformedSystem::added_levels() const {
  std::vector<Level> out;
  for (const auto& a : added_) out.push_back(a.level);
  return out;
}

double TransformedSystem::param(char p) const { return p == 'g' ? g_ : p == 'h' ? h_ : base_.params().mu; }

// ---------------------------------------------------------------------------
// Chain operations

namespace {

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_system(const SolvableSystem& a, const SolvableSystem& b) {
  return a.kind() == b.kind() && same_value(a.params().g, b.params().g) &&
         same_value(a.params().h, b.params().h) && same_value(a.params().mu, b.params().mu);
}

bool polynomial_family(SeedFamily f) {
  switch (f) {
    case SeedFamily::L1:
    case SeedFamily::L2:
    case SeedFamily::J1:
    case SeedFamily::J2:
    case SeedFamily::Eigenstate: return true;
    default: return false;
  }
}

std::optional<BoundaryType> polynomial_type(SeedFamily f) {
  switch (f) {
    case SeedFamily::L1:
    case SeedFamily::J1: return BoundaryType::I;
    case SeedFamily::L2:
    case SeedFamily::J2: return BoundaryType::II;
    default: return std::nullopt;
  }
}

struct PendingSeed {
  GridFn fn;  // at the stage
  std::string tag;
  std::optional<ParamShift> shift;
  bool creates_level = true;
};

}  // namespace

struct ChainBuilder {
  static void check_energy_free(const TransformedSystem& stage, double e, const std::string& tag) {
    for (const auto& a : stage.added_) {
      if (std::abs(a.level.energy - e) <= 1e-9 * std::max(1.0, std::abs(e))) {
        throw Error(Errc::SeedInSpectrum, tag + " has energy " + num(e) + ", already an added level (" +
                                              a.level.provenance + ")");
      }
    }
  }

  static void check_type(const TransformedSystem& stage, BoundaryType t) {
    if (stage.add_type_ && *stage.add_type_ != t) {
      throw Error(Errc::MixedTypes, "chain already adds type " + std::string(to_string(*stage.add_type_)) +
                                        " seeds; mixing type I and type II additions is not supported "
                                        "(no generic formulas are known for mixed types)");
    }
  }

  static PendingSeed prepare(const TransformedSystem& stage, const SeedSolution& seed, const AddOptions& opts) {
    if (!same_system(seed.source, stage.base_)) {
      throw Error(Errc::Config, seed.tag() + " belongs to " + seed.source.label() + ", but the chain starts from " +
                                    stage.base_.label());
    }
    if (seed.family != SeedFamily::Eigenstate) check_energy_free(stage, seed.energy, seed.tag());
    if (const auto t = polynomial_type(seed.family); t && *t != seed.btype) {
      throw Error(Errc::BoundaryMismatch, seed.tag() + " is tagged type " + std::string(to_string(seed.btype)) +
                                              ", but the family is type " + std::string(to_string(*t)));
    }
    if (opts.classify && !polynomial_family(seed.family)) {
      const BoundaryType found = classify_boundary(seed);
      if (found != seed.btype) {
        throw Error(Errc::BoundaryMismatch, seed.tag() + " is tagged type " + std::string(to_string(seed.btype)) +
                                                " but is square-integrable only at the " +
                                                (found == BoundaryType::I ? "lower" : "upper") + " endpoint");
      }
    }
    check_type(stage, seed.btype);
    PendingSeed p;
    p.fn = stage.map(sample(seed.eval, stage.grid_, seed.energy, seed.btype));
    p.tag = seed.tag();
    p.shift = seed.shift;
    p.creates_level = seed.family != SeedFamily::Eigenstate;
    return p;
  }

  static TransformedSystem add_block(const TransformedSystem& stage, std::vector<PendingSeed> seeds,
                                     BoundaryType btype, bool enforce_budget) {
    TransformedSystem out = stage;
    StepRecord rec;
    rec.op = "add";
    rec.boundary = std::string(to_string(btype));
    for (const auto& s : seeds) {
      rec.items.push_back(s.tag);
      if (!s.shift) continue;
      double& p = s.shift->param == 'g' ? out.g_ : out.h_;
      const double next = p + s.shift->delta;
      if (enforce_budget && !(next > 1.5)) {
        throw Error(Errc::BudgetExhausted, "adding " + s.tag + " would shift " + std::string(1, s.shift->param) +
                                               " from " + num(p) + " to " + num(next) + ", outside " +
                                               std::string(1, s.shift->param) + " > 3/2");
      }
      p = next;
    }
    std::vector<GridFn> phi;
    for (const auto& s : seeds) phi.push_back(s.fn);
    auto block = GramTrack::make(stage.grid_, std::move(phi), +1, direction_of(btype));
    const std::size_t bi = out.blocks_.size();
    out.blocks_.push_back(block);
    for (std::size_t i = 0; i < out.u_nodes_.size(); ++i) out.u_nodes_[i] += block->potential_shift_nodes()[i];
    const auto chi = block->new_states();
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      if (!seeds[j].creates_level) continue;
      out.added_.push_back({{seeds[j].fn.energy, "added:" + seeds[j].tag}, bi, chi[j], direction_of(btype),
                            seeds[j].shift});
    }
    out.add_type_ = btype;
    out.partners_.clear();
    record_params(out, rec);
    out.steps_.push_back(std::move(rec));
    return out;
  }

  static void record_params(const TransformedSystem& s, StepRecord& rec) {
    if (!std::isnan(s.g_)) rec.params_after.emplace_back("g", s.g_);
    if (!std::isnan(s.h_)) rec.params_after.emplace_back("h", s.h_);
  }

  /// fns must be normalized stage functions; slots lists the spectrum
  /// entries they remove (may be shorter when a function is not a level).
  static TransformedSystem delete_block(const TransformedSystem& stage, std::vector<GridFn> fns,
                                        const std::vector<TransformedSystem::Slot>& slots, Direction dir) {
    const std::size_t m = fns.size();
    const Grid& g = *stage.grid_;
    Eigen::MatrixXd n(m, m);
    try {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = j; k < m; ++k) {
          std::vector<double> fg(g.size());
          for (std::size_t i = 0; i < g.size(); ++i) fg[i] = fns[j].nodes[i].value * fns[k].nodes[i].value;
          n(j, k) = n(k, j) = RunningInner(stage.grid_, std::move(fg), Direction::FromLower).total();
        }
      }
    } catch (const Error& e) {
      if (e.code() != Errc::Divergence) throw;
      throw Error(Errc::SingularDeformation, std::string("deleted function is not square-integrable; "
                                                         "1 - <phi,phi> vanishes and the Hamiltonian is singular (") +
                                                 e.what() + ")");
    }
    constexpr double kTol = 1e-8;
    for (std::size_t j = 0; j < m; ++j) {
      if (n(j, j) > 1.0 + kTol) {
        throw Error(Errc::NonUnitNorm, "deleted function has norm " + num(n(j, j)) +
                                           " > 1, so 1 - <phi,phi> would change sign inside the domain "
                                           "(enable auto_normalize)");
      }
      if (n(j, j) < 1.0 - kTol) {
        throw Error(Errc::NonUnitNorm, "deleted function has norm " + num(n(j, j)) +
                                           "; deletion requires unit norm (enable auto_normalize)");
      }
      for (std::size_t k = j + 1; k < m; ++k) {
        if (std::abs(n(j, k)) > kTol) {
          throw Error(Errc::NonUnitNorm, "deleted functions are not orthogonal: overlap " + num(n(j, k)));
        }
      }
    }

    TransformedSystem out = stage;
    StepRecord rec;
    rec.op = "delete";
    rec.boundary = std::string(to_string(dir == Direction::FromLower ? BoundaryType::I : BoundaryType::II));
    std::vector<int> drop_added;
    for (const auto& s : slots) {
      rec.items.push_back(s.level.provenance);
      if (s.added) {
        drop_added.push_back(s.index);
      } else {
        out.deleted_base_.push_back(s.index);
      }
    }
    std::sort(drop_added.rbegin(), drop_added.rend());
    for (int a : drop_added) {
      const auto& shift = out.added_[static_cast<std::size_t>(a)].shift;
      if (shift) (shift->param == 'g' ? out.g_ : out.h_) -= shift->delta;
      out.added_.erase(out.added_.begin() + a);
    }
    const double edge_u = dir == Direction::FromLower ? stage.u_nodes_.back() : stage.u_nodes_.front();
    auto block = GramTrack::make(stage.grid_, std::move(fns), -1, dir, true, edge_u);
    out.blocks_.push_back(block);
    for (std::size_t i = 0; i < out.u_nodes_.size(); ++i) out.u_nodes_[i] += block->potential_shift_nodes()[i];
    out.partners_ = block->new_states();
    if (out.added_.empty()) out.add_type_.reset();
    record_params(out, rec);
    out.steps_.push_back(std::move(rec));
    return out;
  }

  static TransformedSystem delete_functions(const TransformedSystem& stage, const std::vector<GridFn>& fns,
                                            const DeleteOptions& opts) {
    std::vector<TransformedSystem::Slot> slots;
    const auto all = stage.slots(-1);
    for (const auto& f : fns) {
      for (const auto& s : all) {
        if (std::abs(s.level.energy - f.energy) <= 1e-9 * std::max(1.0, std::abs(f.energy))) {
          slots.push_back(s);
          break;
        }
      }
    }
    return delete_block(stage, fns, slots, opts.direction.value_or(Direction::FromLower));
  }

  static TransformedSystem delete_levels(const TransformedSystem& stage, std::vector<int> ks,
                                         const DeleteOptions& opts) {
    std::sort(ks.begin(), ks.end());
    if (std::adjacent_find(ks.begin(), ks.end()) != ks.end()) {
      throw Error(Errc::IndexOutOfRange, "a level may be deleted only once per step");
    }
    const int top = ks.empty() ? 0 : ks.back() + 1;
    const auto all = stage.slots(top);
    std::vector<TransformedSystem::Slot> chosen;
    std::vector<GridFn> fns;
    std::optional<Direction> dir = opts.direction;
    for (int k : ks) {
      if (k < 0 || static_cast<std::size_t>(k) >= all.size()) {
        throw Error(Errc::IndexOutOfRange, "spectrum index " + std::to_string(k) + " is out of range");
      }
      const auto& s = all[static_cast<std::size_t>(k)];
      chosen.push_back(s);
      GridFn f = stage.state(k);
      const double norm = full_inner_nodes(f.values(), f.values(), *stage.grid_);
      if (opts.auto_normalize) {
        const double scale = 1.0 / std::sqrt(norm);
        for (auto& v : f.nodes) {
          v.value *= scale;
          v.derivative *= scale;
        }
        WaveFn inner = f.eval;
        f.eval = [inner, scale](double x) {
          const FnValue v = inner(x);
          return FnValue{v.value * scale, v.derivative * scale};
        };
      }
      fns.push_back(std::move(f));
      if (!dir && s.added) dir = stage.added_[static_cast<std::size_t>(s.index)].dir;
    }
    return delete_block(stage, std::move(fns), chosen, dir.value_or(Direction::FromLower));
  }
};

GridPtr make_grid(const SolvableSystem& sys, const std::vector<SeedSolution>& seeds, int n_nodes) {
  MarginPolicy pol;
  const int top = std::min(3, sys.n_max().value_or(3));
  for (int n = 0; n <= top; ++n) pol.probes.push_back({sys.eigenfunction(n), true, true});
  for (const auto& s : seeds) {
    if (s.family == SeedFamily::Eigenstate) {
      pol.probes.push_back({s.eval, true, true});
    } else {
      pol.probes.push_back({s.eval, s.btype == BoundaryType::I, s.btype == BoundaryType::II});
    }
  }
  return std::make_shared<const Grid>(build_grid(sys.domain(), n_nodes, pol));
}

TransformedSystem add_state(const TransformedSystem& stage, const SeedSolution& seed, const AddOptions& opts) {
  std::vector<PendingSeed> p;
  p.push_back(ChainBuilder::prepare(stage, seed, opts));
  return ChainBuilder::add_block(stage, std::move(p), seed.btype, opts.enforce_budget);
}

TransformedSystem add_states_direct(const TransformedSystem& stage, const std::vector<SeedSolution>& seeds,
                                    const AddOptions& opts) {
  if (seeds.empty()) throw Error(Errc::Config, "add_states_direct needs at least one seed");
  for (const auto& s : seeds) {
    if (s.btype != seeds.front().btype) {
      throw Error(Errc::MixedTypes, "all seeds of one block must share a boundary type; mixing type I and "
                                    "type II is not supported (no generic formulas are known for mixed types)");
    }
  }
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    for (std::size_t k = j + 1; k < seeds.size(); ++k) {
      if (std::abs(seeds[j].energy - seeds[k].energy) <= 1e-12 * std::max(1.0, std::abs(seeds[j].energy))) {
        throw Error(Errc::SeedInSpectrum, seeds[j].tag() + " and " + seeds[k].tag() + " share an energy");
      }
    }
  }
  std::vector<PendingSeed> p;
  for (const auto& s : seeds) p.push_back(ChainBuilder::prepare(stage, s, opts));
  return ChainBuilder::add_block(stage, std::move(p), seeds.front().btype, opts.enforce_budget);
}

TransformedSystem add_stage_seed(const TransformedSystem& stage, const GridFn& seed, const std::string& tag) {
  if (!seed.seed_type) throw Error(Errc::Config, tag + " is not a seed (no boundary type)");
  ChainBuilder::check_energy_free(stage, seed.energy, tag);
  for (const auto& l : stage.levels(-1)) {
    if (std::abs(l.energy - seed.energy) <= 1e-9 * std::max(1.0, std::abs(seed.energy))) {
      throw Error(Errc::SeedInSpectrum, tag + " has energy " + num(seed.energy) + " = " + l.provenance);
    }
  }
  ChainBuilder::check_type(stage, *seed.seed_type);
  std::vector<PendingSeed> p(1);
  p[0].fn = seed;
  p[0].tag = tag;
  return ChainBuilder::add_block(stage, std::move(p), *seed.seed_type, false);
}

TransformedSystem delete_state(const TransformedSystem& stage, int k, const DeleteOptions& opts) {
  return ChainBuilder::delete_levels(stage, {k}, opts);
}

TransformedSystem delete_states_direct(const TransformedSystem& stage, const std::vector<int>& ks,
                                       const DeleteOptions& opts) {
  if (ks.empty()) throw Error(Errc::Config, "delete_states_direct needs at least one level");
  try {
    return ChainBuilder::delete_levels(stage, ks, opts);
  } catch (const Error& e) {
    // The tail Gram of independent states is positive definite, so a
    // singular block means its determinant fell below rounding (power-law
    // ends). Single deletions, highest index first, give the same system.
    if (e.code() != Errc::SingularDeformation || ks.size() < 2) throw;
  }
  std::vector<int> order = ks;
  std::sort(order.rbegin(), order.rend());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw Error(Errc::Config, "delete_states_direct: repeated level index");
  }
  TransformedSystem out = stage;
  for (int k : order) out = ChainBuilder::delete_levels(out, {k}, opts);
  return out;
}

TransformedSystem delete_functions(const TransformedSystem& stage, const std::vector<GridFn>& fns,
                                   const DeleteOptions& opts) {
  if (fns.empty()) throw Error(Errc::Config, "delete_functions needs at least one function");
  return ChainBuilder::delete_functions(stage, fns, opts);
}

double deformed_potential(const TransformedSystem& sys, double x) { return sys.potential(x); }

DarbouxTwoStep darboux_twostep(const SolvableSystem& sys, const SeedSolution& seed, const GridPtr& grid) {
  const GridFn phi = sample(seed.eval, grid, seed.energy, seed.btype);
  double lo = 0.0, hi = 0.0;
  for (const auto& v : phi.nodes) {
    lo = std::min(lo, v.value);
    hi = std::max(hi, v.value);
  }
  if (lo < 0.0 && hi > 0.0) {
    throw Error(Errc::NodeInSeed, seed.tag() + " changes sign inside the domain; the Darboux route needs a "
                                               "nodeless seed");
  }
  for (std::size_t i = 0; i < phi.nodes.size(); ++i) {
    if (phi.nodes[i].value == 0.0) {
      throw Error(Errc::NodeInSeed, seed.tag() + " vanishes at x=" + num(grid->x()[i]));
    }
  }
  const Direction dir = direction_of(seed.btype);
  const double tau = dir == Direction::FromLower ? 1.0 : -1.0;
  std::vector<double> sq(grid->size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = phi.nodes[i].value * phi.nodes[i].value;
  auto p = std::make_shared<const RunningInner>(grid, std::move(sq), dir);
  const double e_seed = seed.energy;

  // w = phi'/phi, wbar = tau phi^2/(1+P) - w; each step subtracts 2 w'.
  struct Local {
    double u, w, u1, wb, u2;
  };
  auto local = [sys, e_seed, tau](double x, FnValue f, double pv) {
    Local l;
    l.u = sys.potential(x);
    l.w = f.derivative / f.value;
    l.u1 = l.u - 2.0 * ((l.u - e_seed) - l.w * l.w);
    l.wb = tau * f.value * f.value / (1.0 + pv) - l.w;
    l.u2 = l.u1 - 2.0 * ((l.u1 - e_seed) - l.wb * l.wb);
    return l;
  };

  DarbouxTwoStep out;
  out.grid = grid;
  out.potential_nodes.resize(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    out.potential_nodes[i] = local(grid->x()[i], phi.nodes[i], p->values()[i]).u2;
  }
  const WaveFn f = seed.eval;
  out.potential = [local, f, p](double x) { return local(x, f(x), p->at(x)).u2; };

  auto step = [e_seed](const Local& l, double e, FnValue ps) {
    const double y1 = ps.derivative - l.w * ps.value;
    const double d1 = (e_seed - e) * ps.value + l.w * l.w * ps.value - l.w * ps.derivative;
    const double y2 = d1 - l.wb * y1;
    const double d2 = (e_seed - e + l.wb * l.wb) * y1 - l.wb * d1;
    return FnValue{y2, d2};
  };
  out.map = [grid, phi, p, local, f, step](const GridFn& psi) {
    GridFn r;
    r.energy = psi.energy;
    r.seed_type = psi.seed_type;
    r.nodes.resize(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      r.nodes[i] = step(local(grid->x()[i], phi.nodes[i], p->values()[i]), psi.energy, psi.nodes[i]);
    }
    const WaveFn inner = psi.eval;
    const double e = psi.energy;
    r.eval = [local, f, p, step, inner, e](double x) { return step(local(x, f(x), p->at(x)), e, inner(x)); };
    return r;
  };
  return out;
}

}  // namespace amforge
