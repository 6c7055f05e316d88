#pragma once

#include <Eigen/Dense>

#include <limits>
#include <span>

#include "d2d/rng.hpp"
#include "d2d/spatial.hpp"

namespace d2d {

/// Transmit powers in mW and the pathloss exponent.
/// The network is interference limited: `noise_mw` is reserved and must stay 0.
struct RadioParams {
  double alpha = 4.0;
  double p_cellular_mw = 10.0;
  double p_d2d_mw = 0.1;
  double noise_mw = 0.0;

  void validate() const;
};

/// d^-alpha. Throws SingularGeometryError at d = 0.
double pathloss(double distance, double alpha);

enum class FadingPhase { estimation, data };

/// Rayleigh power gains |h|^2 ~ Exp(1), indexed (transmitter id, receiver id).
///
/// Id convention used across the simulator for a network with n D2D pairs and
/// m cells: transmitters 0..n-1 are D2D transmitters and n..n+m-1 are uplink
/// users; receivers 0..n-1 are D2D receivers and n..n+m-1 are base stations.
class FadingTable {
public:
  FadingTable() = default;
  FadingTable(Eigen::MatrixXd gains, FadingPhase phase) : gains_(std::move(gains)), phase_(phase) {}

  double gain(Index tx, Index rx) const { return gains_(tx, rx); }
  Index n_tx() const noexcept { return gains_.rows(); }
  Index n_rx() const noexcept { return gains_.cols(); }
  bool empty() const noexcept { return gains_.size() == 0; }
  FadingPhase phase() const noexcept { return phase_; }
  const Eigen::MatrixXd& gains() const noexcept { return gains_; }
  FadingTable retagged(FadingPhase phase) const { return FadingTable(gains_, phase); }

private:
  Eigen::MatrixXd gains_;
  FadingPhase phase_ = FadingPhase::estimation;
};

FadingTable draw_fading(Index n_tx, Index n_rx, Rng& rng,
                        FadingPhase phase = FadingPhase::estimation);

/// One SIR evaluation. `sir` is +inf when there is no interference.
struct SirSample {
  Index link = 0;
  double sir = 0.0;
  double signal_mw = 0.0;
  double interference_mw = 0.0;

  bool unbounded() const noexcept { return interference_mw == 0.0; }
};

inline SirSample make_sir(Index link, double signal, double interference) noexcept {
  const double sir =
      interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
  return SirSample{link, sir, signal, interference};
}

/// SIR at D2D receiver `link` with `active_d2d` transmitting, evaluated
/// directly from geometry. Every uplink user interferes.
SirSample sir_d2d(Index link, std::span<const Index> active_d2d, const CellAssociation& cells,
                  const D2DPairSet& pairs, const FadingTable& fading, const RadioParams& params);

/// SIR at base station `bs` from its own user, other users and `active_d2d`.
SirSample sir_cellular(Index bs, std::span<const Index> active_d2d, const CellAssociation& cells,
                       const D2DPairSet& pairs, const FadingTable& fading,
                       const RadioParams& params);

/// Received power of every transmitter at every receiver, P_tx |h|^2 d^-alpha,
/// laid out (tx, rx) with the FadingTable id convention. Computed once per
/// realization so that many activation sets can be evaluated cheaply.
class LinkBudget {
public:
  LinkBudget(const D2DPairSet& pairs, const CellAssociation& cells, const FadingTable& fading,
             const RadioParams& params);

  Index n_d2d() const noexcept { return n_d2d_; }
  Index n_cells() const noexcept { return n_cells_; }
  double power(Index tx, Index rx) const { return power_(tx, rx); }

  SirSample sir_d2d(Index link, std::span<const Index> active_d2d) const;
  SirSample sir_cellular(Index bs, std::span<const Index> active_d2d) const;

private:
  Index n_d2d_;
  Index n_cells_;
  Eigen::MatrixXd power_;
  // Total uplink-user power at each receiver, including the BS's own user.
  Eigen::VectorXd cellular_total_;
};

}  // namespace d2d
