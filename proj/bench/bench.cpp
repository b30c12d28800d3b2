// Timings for the OpenMP kernels against their serial references. The two
// paths must also agree exactly; any mismatch is reported in the table.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "subfuse/rng.hpp"
#include "subfuse/sampling.hpp"
#include "subfuse/simulation.hpp"

using namespace subfuse;

namespace {

template <typename F>
double time_call(F&& fn, int repeats = 3) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int workers = 2;
    if (argc > 1) workers = std::atoi(argv[1]);

    std::printf("%-36s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

    {
        RngStream rng(1);
        const Matrix X = Matrix::NullaryExpr(20000, 101, [&]() { return rng.normal(); });
        Vector t_serial, t_parallel;
        const double s = time_call([&] { t_serial = leverage_norms_serial(X); });
        const double p = time_call([&] { t_parallel = leverage_norms(X); });
        const bool same = t_serial == t_parallel;
        std::printf("%-36s %12.4f %12.4f %7.2fx%s\n", "leverage_norms 20000x101", s, p, s / p,
                    same ? "" : "  MISMATCH");
    }

    {
        ExperimentConfig cfg;
        cfg.scenario.n_target = 100;
        cfg.scenario.n_external = 1500;
        cfg.scenario.d_covariates = 10;
        cfg.replications = 24;
        cfg.rates = {0.12};
        cfg.estimators = {EstimatorId::Uniform, EstimatorId::TargetGuided};
        cfg.grid_size = 8;
        cfg.master_seed = 3;

        ExperimentResult serial, parallel;
        cfg.workers = 1;
        const double s = time_call([&] { serial = run_experiment(cfg); }, 2);
        cfg.workers = workers;
        const double p = time_call([&] { parallel = run_experiment(cfg); }, 2);
        bool same = serial.rows.size() == parallel.rows.size();
        for (std::size_t i = 0; same && i < serial.rows.size(); ++i) {
            same = serial.rows[i].metrics.emse == parallel.rows[i].metrics.emse &&
                   serial.rows[i].metrics.evar == parallel.rows[i].metrics.evar;
        }
        char label[64];
        std::snprintf(label, sizeof(label), "run_experiment K=24 (%d workers)", workers);
        std::printf("%-36s %12.4f %12.4f %7.2fx%s\n", label, s, p, s / p,
                    same ? "" : "  MISMATCH");
    }
    return 0;
}
