#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "mirrorbit/errors.hpp"

namespace mirrorbit {

/// Scalar ferroelectric loop parameters. `delta` is derived so the
/// descending saturated branch passes through (0, +pr) exactly.
struct FerroParams {
  double pr = 5.99;   // remnant polarization, uC/cm^2
  double ps = 6.0;    // saturation polarization, uC/cm^2
  double ec = 0.7;    // coercive field, MV/cm
  double delta = 0.0; // branch slope parameter, MV/cm

  static FerroParams make(double pr, double ps, double ec);
  void validate() const;
  friend bool operator==(const FerroParams&, const FerroParams&) = default;
};

/// delta = ec / ln((ps+pr)/(ps-pr)); throws ParameterError unless 0 < pr < ps, ec > 0.
double derive_delta(double pr, double ps, double ec);

enum class Direction { Ascending, Descending };

/// Major-loop branch: ps*tanh((e - ec)/(2 delta)) ascending,
/// ps*tanh((e + ec)/(2 delta)) descending.
double saturated_branch(double e, Direction dir, const FerroParams& fp);

struct TurningPoint {
  double e = 0.0;
  double p = 0.0;
  friend bool operator==(const TurningPoint&, const TurningPoint&) = default;
};

/// History-dependent polarization state of one ferroelectric segment.
///
/// The state is a stack of nested field reversal points plus the branch root
/// (virgin origin or one of the saturated branches). The live branch through
/// the last turning point is the saturated branch rescaled to pass through
/// that point and through the enclosing turning point (or to merge into
/// +-ps when none encloses it); crossing a stored turning point pops the
/// closed sub-loop (wipe-out), which makes minor loops close exactly.
class HysteresisState {
 public:
  enum class Base { Virgin, FromPosSat, FromNegSat };

  HysteresisState() = default;  // virgin: P = 0 at E = 0

  static HysteresisState virgin() { return HysteresisState{}; }
  static HysteresisState saturated(int sign, const FerroParams& fp);

  double field() const { return e_now_; }
  double polarization() const { return p_now_; }
  Base base() const { return base_; }
  int direction() const { return dir_; }
  const std::vector<TurningPoint>& turning_points() const { return tps_; }

  /// Polarization on the current branch at field e, without committing
  /// anything. Used for frozen (non-perturbing) reads.
  double branch_eval(double e, const FerroParams& fp) const;

  /// Commit a new applied field: pushes/pops turning points, handles the
  /// saturation clip, and updates (E, P). Throws InputError on non-finite e.
  void apply_field(double e, const FerroParams& fp);

  /// Throws if the turning point stack violates nesting/alternation.
  void check_invariants(const FerroParams& fp) const;

  /// Rebuilds a state from serialized parts (no validation beyond types).
  static HysteresisState restore(Base base, int dir, std::vector<TurningPoint> tps,
                                 double e_now, double p_now);

  friend bool operator==(const HysteresisState&, const HysteresisState&) = default;

  // Saturation clip: history is erased once the branch value is within
  // kSatEps*ps of a rail, or |e| reaches kClipEcMultiple*ec.
  static constexpr double kSatEps = 1e-4;
  static constexpr double kClipEcMultiple = 5.0;

 private:
  Base base_ = Base::Virgin;
  int dir_ = 0;  // +1 ascending, -1 descending, 0 virgin at rest
  std::vector<TurningPoint> tps_;
  double e_now_ = 0.0;
  double p_now_ = 0.0;

  double leg_eval(std::size_t depth, double e, int dir, const FerroParams& fp) const;
};

/// Free-function form of the minor-loop update: returns the updated state
/// and the new polarization.
std::pair<HysteresisState, double> hysteron_update(const HysteresisState& state,
                                                   double e_new,
                                                   const FerroParams& fp);

/// Discrete relay-hysteron grid on the Preisach half-plane (alpha >= beta).
/// Cell weights come from a closed-form measure whose marginals reproduce
/// the saturated branches, so the major loop matches saturated_branch to
/// within grid resolution; wipe-out and congruency are exact by construction.
class PreisachPlaneOracle {
 public:
  PreisachPlaneOracle(const FerroParams& fp, int grid_n, double e_max = 0.0);

  void reset();            // negative saturation (all relays down)
  double apply(double e);  // apply one field value, return polarization
  double polarization() const;
  double total_weight() const { return total_weight_; }
  int grid_n() const { return n_; }

 private:
  struct Row {
    double alpha;
    std::vector<double> beta;    // cell centers, ascending
    std::vector<double> prefix;  // prefix[j] = sum of weights for beta < beta[j]
    double total;
  };
  int n_;
  double e_max_;
  std::vector<Row> rows_;
  std::vector<double> front_;  // per-row up/down boundary in beta
  double total_weight_ = 0.0;

  double row_up_weight(const Row& r, double m) const;
};

/// Runs the oracle over a field sequence from negative saturation.
/// Empty sequence -> empty output. Throws ParameterError if grid_n < 50.
std::vector<double> preisach_plane_oracle(const std::vector<double>& field_sequence,
                                          const FerroParams& fp, int grid_n);

}  // namespace mirrorbit
