#ifndef ENTROGAME_CLI_HPP
#define ENTROGAME_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace entrogame {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 2,
    kExitPreconditionRefused = 3,
    kExitInvariantFailure = 4,
};

enum class Command { kEntropy, kSmb, kMixability, kAggregate, kVerify };

// Parsed invocation. Game and source specs are either a builtin loss name
// (logloss, squareloss, absloss) or a path to a JSON descriptor.
struct RunConfig {
    Command command = Command::kVerify;
    std::string game_spec = "logloss";
    std::string source_spec;            // JSON file or inline JSON
    std::string pool_spec;              // JSON file or inline JSON (aggregate)
    double eta = -1.0;                  // aggregate: learning rate (<0: from pool)
    int pool_default_kmax = -1;         // aggregate: build source-matched pool
    std::size_t n = 100000;
    std::size_t paths = 20;
    std::uint64_t seed = 20240283;      // fixed documented default
    std::vector<std::size_t> checkpoints;  // empty = geometric default
    double tol = -1.0;                  // entropy: convergence tolerance
    int n_cap = 20;                     // entropy: iteration cap
    int eta_grid = 50;                  // mixability: grid size
    double eta_min = 0.01, eta_max = 32.0;
    int resolution = 10000;             // mixability / regularity grids
    std::string out_dir = ".";
    std::string unit = "nats";          // display only; artifacts stay in nats
    int threads = 0;
    bool quick = false;                 // verify: reduced grids
    bool export_trace = false;          // aggregate: write path-0 trace CSV
};

// Executes one command, writes its artifacts under out_dir, prints a short
// summary, and returns the process exit code. ENTROGAME_SEED overrides the
// configured seed.
int run(RunConfig config);

}  // namespace entrogame

#endif
