#pragma once

// Abraham-Moses additions and deletions on a shared quadrature grid.
//
// Notation: sigma = +1 (addition) or -1 (deletion); tau = +1 when running
// integrals start at the lower endpoint and -1 when they start at the upper
// one. For a block of M functions phi at the stage it acts on,
//   F = I + sigma <phi, phi^T>,   F' = sigma tau phi phi^T,   G = F^{-1},
//   U_new    = U - 2 (2 sigma tau phi'^T G phi - s^2),  s = phi^T G phi,
//   psi_new  = psi - sigma phi^T G <phi, psi>,
//   chi      = G phi (the added states).

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amforge/quad.hpp"
#include "amforge/seeds.hpp"

namespace amforge {

/// A function known exactly at the grid nodes and evaluable anywhere inside
/// the panel range.
struct GridFn {
  WaveFn eval;
  std::vector<FnValue> nodes;
  double energy = 0.0;
  /// Set for seeds; empty for square-integrable states.
  std::optional<BoundaryType> seed_type;

  std::vector<double> values() const;
};

GridFn sample(const WaveFn& f, const GridPtr& grid, double energy,
              std::optional<BoundaryType> seed_type = std::nullopt);

/// One Abraham-Moses block: M functions with their running Gram matrix and
/// its pointwise inverse at the nodes.
class GramTrack : public std::enable_shared_from_this<GramTrack> {
 public:
  /// complement (deletion only): F is stored as the Gram matrix running from
  /// the opposite endpoint, which equals I - <phi, phi^T> when the inputs are
  /// orthonormal and avoids the cancellation near the far endpoint.
  /// edge_potential is the stage potential at the node nearest the far
  /// endpoint; complement Gram entries add the integrand tail beyond it.
  static std::shared_ptr<const GramTrack> make(GridPtr grid, std::vector<GridFn> phi, int sigma,
                                               Direction dir, bool complement = false,
                                               double edge_potential = 0.0);

  int sigma() const { return sigma_; }
  int tau() const { return dir_ == Direction::FromLower ? 1 : -1; }
  Direction direction() const { return dir_; }
  std::size_t size() const { return phi_.size(); }
  const std::vector<GridFn>& phi() const { return phi_; }
  const GridPtr& grid() const { return grid_; }

  /// F at any x (from partial-panel integrals).
  Eigen::MatrixXd matrix_at(double x) const;
  /// F at node i.
  Eigen::MatrixXd matrix_node(std::size_t i) const;
  /// G = F^{-1} at node i.
  Eigen::MatrixXd inverse_node(std::size_t i) const;
  double log_det(double x) const;

  /// -2 (log det F)'' at x and at the nodes.
  double potential_shift(double x) const;
  const std::vector<double>& potential_shift_nodes() const { return dU_; }

  /// Image of a solution of the input stage.
  GridFn map(const GridFn& psi) const;
  /// G phi, the states created by this block (addition) or the partner
  /// seeds of the removed levels (deletion).
  std::vector<GridFn> new_states() const;

 private:
  GramTrack(GridPtr grid, std::vector<GridFn> phi, int sigma, Direction dir, bool complement,
            double edge_potential);

  /// Integral of a*b beyond the far grid edge minus the part already
  /// covered between the edge node and the panel boundary.
  double tail_offset(const GridFn& a, const GridFn& b, const RunningInner& ri) const;

  /// Constant basis change psi = a phi fitted at one node, with the running
  /// Gram matrix of psi. fixed is a a^T, or a O a^T for complement blocks
  /// (O the tail offsets).
  struct Rotation {
    Eigen::MatrixXd a;
    Eigen::MatrixXd fixed;
    double log_det = 0.0;
    std::vector<std::vector<FnValue>> psi;
    std::vector<std::shared_ptr<const RunningInner>> gram;
  };
  /// Inverse of F (rot < 0) or of a F a^T for rotation rot, together with
  /// the matching basis values and derivatives.
  struct Frame {
    Eigen::MatrixXd minv;
    Eigen::VectorXd p, dp;
    int rot = -1;
  };
  std::optional<Rotation> rotation_at(std::size_t node, int prev) const;
  void assign_frames();
  Frame frame_node(std::size_t i) const;
  Frame stored_frame(std::size_t i) const;
  Frame frame_at(double x) const;
  std::pair<int, Eigen::MatrixXd> best_matrix_at(double x) const;
  Eigen::MatrixXd assemble(const std::function<double(std::size_t)>& gram, int rot) const;
  Eigen::MatrixXd rotated_node(int rot, std::size_t i) const;
  Eigen::MatrixXd rotated_at(int rot, double x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& f, std::size_t node) const;

  GridPtr grid_;
  std::vector<GridFn> phi_;
  int sigma_;
  Direction dir_;
  bool complement_;
  double edge_u_;
  std::vector<std::shared_ptr<const RunningInner>> gram_;  // j <= k, row-major
  std::vector<double> offset_;
  // frames: -1 uses F itself, k >= 0 uses rotation k
  std::vector<Rotation> rots_;
  std::vector<int> frame_;
  std::vector<Eigen::MatrixXd> minv_;
  std::vector<double> dU_;
};

struct Level {
  double energy;
  /// "base:n=2" or "added:L1(v=0)".
  std::string provenance;
};

struct StepRecord {
  std::string op;  // "add" or "delete"
  std::vector<std::string> items;
  std::string boundary;
  /// Parameter values after the step, e.g. {"h", 6.2}.
  std::vector<std::pair<std::string, double>> params_after;
};

struct AddOptions {
  bool enforce_budget = true;
  /// Numerically classify non-polynomial seeds and compare with their tag.
  bool classify = true;
};

struct DeleteOptions {
  /// Rescale the deleted state by 1/sqrt(norm) before transforming.
  bool auto_normalize = true;
  /// Running-integral direction. Defaults to the direction that created an
  /// added level, and FromLower for base levels.
  std::optional<Direction> direction;
};

class TransformedSystem {
 public:
  /// Base system with an empty chain.
  TransformedSystem(SolvableSystem base, GridPtr grid);

  const SolvableSystem& base() const { return base_; }
  const GridPtr& grid() const { return grid_; }
  const std::vector<std::shared_ptr<const GramTrack>>& blocks() const { return blocks_; }
  const std::vector<StepRecord>& steps() const { return steps_; }

  /// Deformed potential; NaN outside support() once any block is applied.
  double potential(double x) const;
  const std::vector<double>& potential_nodes() const { return u_nodes_; }
  /// Interval on which the deformed potential is defined: the grid span, or
  /// the base domain before any transformation.
  Domain support() const;

  /// Maps a base-stage function through every block.
  GridFn map(const GridFn& base_fn) const;
  /// Mapped base eigenfunction n; throws if that level was deleted.
  GridFn eigenfunction(int n) const;
  /// Bound states in spectrum order: levels(k) lists the lowest k levels.
  std::vector<Level> levels(int k) const;
  /// State of the k-th lowest level (mapped base eigenfunction or added state).
  GridFn state(int k) const;
  /// Added levels still present, in creation order.
  std::vector<GridFn> added_states() const;
  std::vector<Level> added_levels() const;
  /// Seeds left behind by the most recent deletion (G phi of that block).
  const std::vector<GridFn>& deletion_partners() const { return partners_; }
  /// Current values of g and h after the per-step shifts.
  double param(char p) const;

 private:
  friend struct ChainBuilder;

  struct Added {
    Level level;
    std::size_t block;  // index of the block that created it
    GridFn state;       // at the output of that block
    Direction dir;
    std::optional<ParamShift> shift;
  };
  /// Spectrum entry: base level n (added == false) or index into added_.
  struct Slot {
    Level level;
    bool added;
    int index;
  };

  std::vector<Slot> slots(int k) const;
  GridFn map_from(std::size_t first_block, GridFn fn) const;

  SolvableSystem base_;
  GridPtr grid_;
  std::vector<std::shared_ptr<const GramTrack>> blocks_;
  std::vector<double> u_nodes_;
  std::vector<Added> added_;
  std::vector<int> deleted_base_;
  std::vector<StepRecord> steps_;
  std::vector<GridFn> partners_;
  double g_, h_;
  std::optional<BoundaryType> add_type_;
};

/// Grid whose extents resolve the first few eigenfunctions and the given
/// seeds (decaying ends trimmed, growing ends extended until saturation).
GridPtr make_grid(const SolvableSystem& sys, const std::vector<SeedSolution>& seeds, int n_nodes);

TransformedSystem add_state(const TransformedSystem& stage, const SeedSolution& seed,
                            const AddOptions& opts = {});
TransformedSystem add_states_direct(const TransformedSystem& stage, const std::vector<SeedSolution>& seeds,
                                    const AddOptions& opts = {});
/// Addition with a seed already living on the stage (e.g. a deletion partner).
TransformedSystem add_stage_seed(const TransformedSystem& stage, const GridFn& seed, const std::string& tag);

/// Deletes the level with spectrum index k (0 = lowest).
TransformedSystem delete_state(const TransformedSystem& stage, int k, const DeleteOptions& opts = {});
TransformedSystem delete_states_direct(const TransformedSystem& stage, const std::vector<int>& ks,
                                       const DeleteOptions& opts = {});
/// Deletion with explicitly supplied stage functions; checks that their
/// Gram matrix is the identity.
TransformedSystem delete_functions(const TransformedSystem& stage, const std::vector<GridFn>& fns,
                                   const DeleteOptions& opts = {});

double deformed_potential(const TransformedSystem& sys, double x);

/// Two successive Darboux transformations with phi and (1 + <phi,phi>)/phi.
struct DarbouxTwoStep {
  GridPtr grid;
  std::vector<double> potential_nodes;
  std::function<double(double)> potential;
  /// psi^[2] for a base solution psi at energy e.
  std::function<GridFn(const GridFn& psi)> map;
};

DarbouxTwoStep darboux_twostep(const SolvableSystem& sys, const SeedSolution& seed, const GridPtr& grid);

}  // namespace amforge
