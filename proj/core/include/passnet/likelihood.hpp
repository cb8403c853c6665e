#pragma once

#include <Eigen/Dense>

#include "passnet/data.hpp"
#include "passnet/types.hpp"

namespace passnet {

// Mean of the log-hazard: x . beta + u . v. The unit-variance error term is
// added by the sampler / simulator, never here. Throws std::invalid_argument
// on a u/v dimension mismatch.
double linear_predictor(const Eigen::Ref<const Vector7>& x,
                        const DyadCoefficients& beta,
                        const Eigen::Ref<const Eigen::VectorXd>& u,
                        const Eigen::Ref<const Eigen::VectorXd>& v);

// Log-likelihood of observing y in {0,1} passes during an interval of
// `interval_length` seconds under a constant hazard exp(log_hazard):
//   y * (log_hazard + log dt) - exp(log_hazard) * dt.
// The -log y! constant vanishes for y in {0,1}. Throws std::runtime_error
// for a non-finite log_hazard and std::invalid_argument for dt <= 0.
double interval_loglik(bool y, double log_hazard, double interval_length);

// Sum of interval_loglik over every lattice cell; y = 1 exactly on the
// cells carrying a pass event. The lattice must align with data.cells().
double sequence_loglik(const ModelData& data, const HazardLattice& lattice);

}  // namespace passnet
