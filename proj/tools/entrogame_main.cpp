#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entrogame/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"entrogame: generalized entropies of binary prediction games, "
                 "optimal and aggregating strategies, convergence experiments"};
    app.require_subcommand(1);

    entrogame::RunConfig cfg;
    std::string checkpoints;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out_dir, "output directory for artifacts");
        sub->add_option("--seed", cfg.seed, "base RNG seed (ENTROGAME_SEED overrides)");
        sub->add_option("--unit", cfg.unit, "display unit: nats|bits (artifacts stay nats)");
        sub->add_option("--threads", cfg.threads, "worker thread cap (0 = machine)");
    };

    CLI::App* entropy = app.add_subcommand("entropy", "entropy rate report for a source");
    entropy->add_option("--game", cfg.game_spec, "logloss|squareloss|absloss or JSON file");
    entropy->add_option("--source", cfg.source_spec, "source descriptor (JSON file or inline)")
        ->required();
    entropy->add_option("--tol", cfg.tol, "convergence tolerance (default per source kind)");
    entropy->add_option("--n-cap", cfg.n_cap, "conditioning-depth cap");
    add_common(entropy);

    CLI::App* smb = app.add_subcommand("smb", "loss-rate convergence of the optimal strategy");
    smb->add_option("--game", cfg.game_spec);
    smb->add_option("--source", cfg.source_spec)->required();
    smb->add_option("--n", cfg.n, "path length");
    smb->add_option("--paths", cfg.paths, "number of sampled paths");
    smb->add_option("--checkpoints", checkpoints, "comma-separated checkpoint steps");
    add_common(smb);

    CLI::App* agg = app.add_subcommand("aggregate", "aggregating strategy over an expert pool");
    agg->add_option("--game", cfg.game_spec);
    agg->add_option("--source", cfg.source_spec)->required();
    agg->add_option("--pool", cfg.pool_spec, "pool descriptor (JSON file or inline)");
    agg->add_option("--pool-default", cfg.pool_default_kmax,
                    "build a source-matched pool of orders 0..K plus constants");
    agg->add_option("--eta", cfg.eta, "learning rate (beta = exp(-eta))");
    agg->add_option("--n", cfg.n);
    agg->add_option("--paths", cfg.paths);
    agg->add_option("--checkpoints", checkpoints);
    agg->add_flag("--export-trace", cfg.export_trace, "write the path-0 superloss trace CSV");
    add_common(agg);

    CLI::App* mix = app.add_subcommand("mixability", "mixability sweep over learning rates");
    mix->add_option("--game", cfg.game_spec);
    mix->add_option("--eta-grid", cfg.eta_grid, "number of eta grid points");
    mix->add_option("--eta-min", cfg.eta_min);
    mix->add_option("--eta-max", cfg.eta_max);
    mix->add_option("--resolution", cfg.resolution, "prediction-grid resolution");
    add_common(mix);

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    verify->add_flag("--quick", cfg.quick, "reduced grids and path lengths");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    if (entropy->parsed()) cfg.command = entrogame::Command::kEntropy;
    if (smb->parsed()) cfg.command = entrogame::Command::kSmb;
    if (agg->parsed()) cfg.command = entrogame::Command::kAggregate;
    if (mix->parsed()) cfg.command = entrogame::Command::kMixability;
    if (verify->parsed()) cfg.command = entrogame::Command::kVerify;

    if (!checkpoints.empty()) {
        std::size_t pos = 0;
        while (pos < checkpoints.size()) {
            const std::size_t comma = checkpoints.find(',', pos);
            const std::string tok =
                checkpoints.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
            if (!tok.empty()) cfg.checkpoints.push_back(std::stoull(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    return entrogame::run(cfg);
}
