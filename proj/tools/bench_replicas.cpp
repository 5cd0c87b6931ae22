// Times the replica harness: serial reference vs the OpenMP kernel, and
// verifies they produce identical summaries while at it.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "grpurn/montecarlo.hpp"

using namespace grpurn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool identical(const std::vector<std::vector<ReplicaSummary>>& a,
               const std::vector<std::vector<ReplicaSummary>>& b) {
    for (std::size_t h = 0; h < a.size(); ++h) {
        for (std::size_t r = 0; r < a[h].size(); ++r) {
            if (a[h][r].xi_bar != b[h][r].xi_bar) return false;
            if (a[h][r].psi_bar != b[h][r].psi_bar) return false;
            if (a[h][r].chi2_stat != b[h][r].chi2_stat) return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::int64_t horizon = argc > 1 ? std::atoll(argv[1]) : 20000;
    const int replicas = argc > 2 ? std::atoi(argv[2]) : 200;

    auto built = example1(1.0, 0.5, 1.0, /*clamp_burnin=*/true);
    ExperimentConfig config{
        UrnParams::make({1.0 / 6, 1.0 / 3, 0.5}, {1.0 / 6, 1.0 / 3, 0.5}),
        built.schedule,
        {horizon},
        replicas,
        20240801ULL,
        RecordFlags{},
    };

    const double total_steps = static_cast<double>(horizon) * replicas;
    std::printf("horizon=%lld replicas=%d (%.2g steps)\n",
                static_cast<long long>(horizon), replicas, total_steps);

    auto t0 = Clock::now();
    const auto serial = run_experiment_serial(config);
    const double serial_s = seconds_since(t0);
    std::printf("serial:  %8.3f s  (%.3g steps/s)\n", serial_s, total_steps / serial_s);

    t0 = Clock::now();
    const auto parallel = run_experiment(config);
    const double parallel_s = seconds_since(t0);
    std::printf("openmp:  %8.3f s  (%.3g steps/s)  speedup %.2fx\n", parallel_s,
                total_steps / parallel_s, serial_s / parallel_s);

    if (!identical(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel summaries differ\n");
        return 1;
    }
    std::printf("serial and parallel summaries identical\n");
    return 0;
}
