#include "passnet/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace passnet {

double linear_predictor(const Eigen::Ref<const Vector7>& x,
                        const DyadCoefficients& beta,
                        const Eigen::Ref<const Eigen::VectorXd>& u,
                        const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("latent factor dimension mismatch: |u| = " +
                                std::to_string(u.size()) + ", |v| = " +
                                std::to_string(v.size()));
  return x.dot(beta.beta) + u.dot(v);
}

double interval_loglik(bool y, double log_hazard, double interval_length) {
  if (!(interval_length > 0.0))
    throw std::invalid_argument("interval length must be positive");
  if (!std::isfinite(log_hazard))
    throw std::runtime_error("non-finite log hazard in interval likelihood");
  const double expected = std::exp(log_hazard) * interval_length;
  return (y ? log_hazard + std::log(interval_length) : 0.0) - expected;
}

double sequence_loglik(const ModelData& data, const HazardLattice& lattice) {
  if (lattice.log_hazard.size() != data.n_cells())
    throw std::invalid_argument("lattice size does not match cell count");
  double total = 0.0;
  const auto& cells = data.cells();
  for (std::size_t c = 0; c < cells.size(); ++c)
    total += interval_loglik(cells[c].y, lattice.log_hazard[c], cells[c].dt);
  return total;
}

}  // namespace passnet
