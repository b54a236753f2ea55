#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dcc/innovations.hpp"
#include "dcc/model.hpp"

namespace dcc {

struct LyapunovEstimate {
    double gamma_hat = 0.0;       // nats per step
    double std_error = 0.0;       // across replications
    double upper_bound = 0.0;     // mean of ln ||N_t||_s, an upper bound on gamma
    double upper_bound_se = 0.0;
    std::size_t horizon = 0;
    std::size_t replications = 0;
    std::size_t rescalings = 0;   // summed over replications
    std::vector<double> per_replication;
};

/// Produces N_1, N_2, ... for one replication.
using StepGenerator = std::function<Matrix()>;
/// Builds an independent generator for replication r.
using GeneratorFactory = std::function<StepGenerator(std::uint64_t replication)>;

/// ln ||N_1 N_2 ... N_T||_s / T per replication, with the running product
/// rescaled to unit spectral norm whenever its size leaves [1e-100, 1e100].
/// Replications run on `threads` OpenMP threads; the result does not depend on it.
LyapunovEstimate lyapunov_product(const GeneratorFactory& factory, std::size_t horizon,
                                  std::size_t replications, int threads);
/// Serial reference of lyapunov_product().
LyapunovEstimate lyapunov_product_serial(const GeneratorFactory& factory, std::size_t horizon,
                                         std::size_t replications);

/// Top Lyapunov exponent of the N*_t sequence driven by (eta_t, xi_t, q_t).
/// Needs ||T33||_s < 1 and horizon >= 1000.
LyapunovEstimate estimate_lyapunov_N(const DccSpec& spec, const InnovationSpec& innov,
                                     double c_lambda, double c_q, std::size_t horizon,
                                     std::size_t replications, int threads = 1);

}  // namespace dcc
