// Serial reference vs OpenMP kernels: simulation ensembles and Lyapunov
// replications. Usage: bench_parallel [threads] [runs]

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <fmt/core.h>

#include "dcc/lyapunov.hpp"
#include "dcc/simulator.hpp"
#include "dcc/stationarity.hpp"

using namespace dcc;

namespace {

template <class F>
double time_it(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool same) {
    fmt::print("{:<22} serial {:8.3f} s   parallel {:8.3f} s   speedup {:5.2f}   identical {}\n", name, serial,
               parallel, serial / parallel, same ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::size_t runs = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 64;
    fmt::print("threads {}, runs {}\n", threads, runs);

    const DccSpec spec = reference_bivariate_spec(0.999);
    SimConfig sim = SimConfig::reference(2, 10000);
    sim.burn_in = 4000;
    InnovationSpec innov;
    innov.seed = 1;

    EnsembleResult a, b;
    const double ts = time_it([&] { a = ensemble_serial(spec, sim, innov, runs); });
    const double tp = time_it([&] { b = ensemble(spec, sim, innov, runs, threads); });
    row("ensemble", ts, tp, a.max_q_quantiles == b.max_q_quantiles && a.terminal_r12_std == b.terminal_r12_std);

    const auto c = compute_constants(spec);
    LyapunovEstimate la, lb;
    const double ls = time_it([&] { la = estimate_lyapunov_N(spec, innov, c.c_lambda, c.c_q, 20000, runs, 1); });
    const double lp = time_it([&] { lb = estimate_lyapunov_N(spec, innov, c.c_lambda, c.c_q, 20000, runs, threads); });
    row("lyapunov N*", ls, lp, la.per_replication == lb.per_replication);
    return 0;
}
