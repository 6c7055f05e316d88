#include "d2d/radio.hpp"

#include <cmath>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

void RadioParams::validate() const {
  if (!(alpha > 2.0)) throw ParameterError("pathloss exponent alpha must exceed 2");
  if (!(p_cellular_mw > 0.0)) throw ParameterError("cellular transmit power must be positive");
  if (!(p_d2d_mw > 0.0)) throw ParameterError("D2D transmit power must be positive");
  if (noise_mw != 0.0) throw ParameterError("noise is not modelled; noise_mw must be 0");
}

double pathloss(double distance, double alpha) {
  if (!(distance > 0.0))
    throw SingularGeometryError("pathloss evaluated at zero distance");
  return std::pow(distance, -alpha);
}

FadingTable draw_fading(Index n_tx, Index n_rx, Rng& rng, FadingPhase phase) {
  if (n_tx < 0 || n_rx < 0) throw ParameterError("fading table dimensions must be >= 0");
  std::exponential_distribution<double> exp1(1.0);
  Eigen::MatrixXd gains(n_tx, n_rx);
  for (Index c = 0; c < n_rx; ++c)
    for (Index r = 0; r < n_tx; ++r) gains(r, c) = exp1(rng);
  return FadingTable(std::move(gains), phase);
}

namespace {

void check_fading(const FadingTable& fading, Index n_d2d, Index n_cells) {
  if (fading.n_tx() < n_d2d + n_cells || fading.n_rx() < n_d2d + n_cells)
    throw ParameterError("fading table does not cover every transmitter/receiver pair");
}

double received(const Point& tx, const Point& rx, const Window& w, double power, double gain,
                double alpha) {
  return power * gain * pathloss(toroidal_distance(tx, rx, w), alpha);
}

}  // namespace

SirSample sir_d2d(Index link, std::span<const Index> active_d2d, const CellAssociation& cells,
                  const D2DPairSet& pairs, const FadingTable& fading, const RadioParams& params) {
  const Index n = pairs.size();
  check_fading(fading, n, cells.size());
  const Window& w = pairs.receivers.window();
  const Point rx = pairs.receivers.point(link);

  const double signal = received(pairs.transmitters.point(link), rx, w, params.p_d2d_mw,
                                 fading.gain(link, link), params.alpha);
  double interference = 0.0;
  for (Index j : active_d2d) {
    if (j == link) continue;
    interference += received(pairs.transmitters.point(j), rx, w, params.p_d2d_mw,
                             fading.gain(j, link), params.alpha);
  }
  for (Index k = 0; k < cells.size(); ++k)
    interference += received(cells.users.point(k), rx, w, params.p_cellular_mw,
                             fading.gain(n + k, link), params.alpha);
  return make_sir(link, signal, interference);
}

SirSample sir_cellular(Index bs, std::span<const Index> active_d2d, const CellAssociation& cells,
                       const D2DPairSet& pairs, const FadingTable& fading,
                       const RadioParams& params) {
  const Index n = pairs.size();
  check_fading(fading, n, cells.size());
  const Window& w = cells.base_stations.window();
  const Point rx = cells.base_stations.point(bs);
  const Index rx_id = n + bs;

  const double signal = received(cells.users.point(bs), rx, w, params.p_cellular_mw,
                                 fading.gain(n + bs, rx_id), params.alpha);
  double interference = 0.0;
  for (Index j : active_d2d)
    interference += received(pairs.transmitters.point(j), rx, w, params.p_d2d_mw,
                             fading.gain(j, rx_id), params.alpha);
  for (Index k = 0; k < cells.size(); ++k) {
    if (k == bs) continue;
    interference += received(cells.users.point(k), rx, w, params.p_cellular_mw,
                             fading.gain(n + k, rx_id), params.alpha);
  }
  return make_sir(bs, signal, interference);
}

LinkBudget::LinkBudget(const D2DPairSet& pairs, const CellAssociation& cells,
                       const FadingTable& fading, const RadioParams& params)
    : n_d2d_(pairs.size()), n_cells_(cells.size()) {
  params.validate();
  check_fading(fading, n_d2d_, n_cells_);
  const Index total = n_d2d_ + n_cells_;
  const Window& w = pairs.transmitters.window();

  Eigen::Matrix2Xd tx(2, total);
  tx << pairs.transmitters.coords(), cells.users.coords();
  Eigen::Matrix2Xd rx(2, total);
  rx << pairs.receivers.coords(), cells.base_stations.coords();
  Eigen::ArrayXd tx_power(total);
  tx_power.head(n_d2d_).setConstant(params.p_d2d_mw);
  tx_power.tail(n_cells_).setConstant(params.p_cellular_mw);

  const PointSet tx_set(w, std::move(tx));
  const bool quartic = params.alpha == 4.0;
  power_.resize(total, total);
  for (Index r = 0; r < total; ++r) {
    const Eigen::ArrayXd d2 = squared_distances(rx.col(r), tx_set);
    if ((d2 == 0.0).any())
      throw SingularGeometryError("a transmitter coincides with receiver " + std::to_string(r));
    Eigen::ArrayXd gain_loss;
    if (quartic)
      gain_loss = (d2 * d2).inverse();
    else
      gain_loss = d2.pow(-0.5 * params.alpha);
    power_.col(r) =
        (tx_power * fading.gains().col(r).head(total).array() * gain_loss).matrix();
  }

  cellular_total_.resize(total);
  for (Index r = 0; r < total; ++r) {
    double s = 0.0;
    for (Index k = 0; k < n_cells_; ++k) s += power_(n_d2d_ + k, r);
    cellular_total_(r) = s;
  }
}

SirSample LinkBudget::sir_d2d(Index link, std::span<const Index> active_d2d) const {
  const auto col = power_.col(link);
  double interference = 0.0;
  for (Index j : active_d2d)
    if (j != link) interference += col(j);
  interference += cellular_total_(link);
  return make_sir(link, col(link), interference);
}

SirSample LinkBudget::sir_cellular(Index bs, std::span<const Index> active_d2d) const {
  const Index rx = n_d2d_ + bs;
  const auto col = power_.col(rx);
  double interference = 0.0;
  for (Index j : active_d2d) interference += col(j);
  double other_users = 0.0;
  for (Index k = 0; k < n_cells_; ++k)
    if (k != bs) other_users += col(n_d2d_ + k);
  return make_sir(bs, col(n_d2d_ + bs), interference + other_users);
}

}  // namespace d2d
