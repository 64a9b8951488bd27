// Command-line front end: builds chains, computes harmonics, designs
// attractor dynamics, runs swarms, and reconstructs shapes. See README.md
// and --help for usage.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "harmonics/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "swarm-harmonics: harmonic attractor dynamics for statistical swarms\n"
        "ASCII field buckets: '#' > 0.5, '+' > 0.05, '.' near zero, '-' < -0.05,\n"
        "'=' < -0.5 of the peak magnitude; '@' marks obstacles."};

    std::string config_path, preset_name;
    harmonics::Scenario flags;  // holds values given on the command line
    double tau_flag = 0.0;

    app.add_option("--config", config_path, "key=value scenario file (e.g. a manifest)");
    auto* opt_preset = app.add_option("--preset", preset_name,
                                      "figure preset: fig1 fig2 fig3 fig4 fig5 fig7");
    auto* opt_mode = app.add_option(
        "--mode", flags.mode,
        "eigen | dynamics | swarm-unweighted | swarm-weighted | reconstruct");
    auto* opt_env = app.add_option("--env", flags.env_path, "environment file");
    auto* opt_shape = app.add_option("--shape", flags.shape_path, "shape overlay file");
    auto* opt_a = app.add_option("--a", flags.a, "target harmonic index (1-based)");
    auto* opt_design =
        app.add_option("--design", flags.design, "closed2 | closed4 | optimized | first1");
    auto* opt_order = app.add_option("--order", flags.order, "polynomial order");
    auto* opt_beta = app.add_option("--beta", flags.beta, "lower eigenvalue bound parameter");
    auto* opt_eps = app.add_option("--epsilon", flags.epsilon, "spectral gap parameter");
    auto* opt_robots = app.add_option("--robots", flags.robots, "swarm size N");
    auto* opt_seed = app.add_option("--seed", flags.seed, "RNG seed");
    auto* opt_steps = app.add_option("--steps", flags.steps, "simulation steps");
    auto* opt_stride = app.add_option("--stride", flags.stride, "snapshot stride");
    auto* opt_start = app.add_option("--start-cell", flags.start_cell, "start cell (free index)");
    auto* opt_p = app.add_option("--p", flags.p, "harmonic percentile (0,1]");
    auto* opt_tau = app.add_option("--tau", tau_flag, "occupancy threshold");
    auto* opt_exact =
        app.add_flag("--exact-dynamics", "use the exact-dynamics oracle instead of particles");
    auto* opt_local = app.add_flag("--local-proposal",
                                   "variance-reduction variant: propose within the kernel disk");
    auto* opt_threads = app.add_option("--threads", flags.threads, "worker threads");
    auto* opt_partial =
        app.add_flag("--allow-partial", "exit 0 even when convergence was not attained");
    auto* opt_out = app.add_option("--out", flags.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        harmonics::Scenario s;
        if (!preset_name.empty())
            s = harmonics::preset_scenario(preset_name);
        if (!config_path.empty()) {
            std::istringstream in(harmonics::read_file(config_path));
            harmonics::Scenario from_file = harmonics::parse_config(in);
            if (!from_file.preset.empty() && preset_name.empty()) {
                s = harmonics::preset_scenario(from_file.preset);
                // Re-apply the file on top of the preset defaults.
                std::istringstream again(harmonics::read_file(config_path));
                harmonics::Scenario layered = harmonics::parse_config(again);
                layered.env_text = s.env_text;
                layered.shape_text = s.shape_text;
                s = layered;
            } else {
                s = from_file;
            }
        }
        (void)opt_preset;
        if (opt_mode->count()) s.mode = flags.mode;
        if (opt_env->count()) { s.env_path = flags.env_path; s.env_text.clear(); }
        if (opt_shape->count()) { s.shape_path = flags.shape_path; s.shape_text.clear(); }
        if (opt_a->count()) s.a = flags.a;
        if (opt_design->count()) s.design = flags.design;
        if (opt_order->count()) s.order = flags.order;
        if (opt_beta->count()) s.beta = flags.beta;
        if (opt_eps->count()) s.epsilon = flags.epsilon;
        if (opt_robots->count()) s.robots = flags.robots;
        if (opt_seed->count()) s.seed = flags.seed;
        if (opt_steps->count()) s.steps = flags.steps;
        if (opt_stride->count()) s.stride = flags.stride;
        if (opt_start->count()) s.start_cell = flags.start_cell;
        if (opt_p->count()) s.p = flags.p;
        if (opt_tau->count()) s.tau = tau_flag;
        if (opt_exact->count()) s.exact_dynamics = true;
        if (opt_local->count()) s.local_proposal = true;
        if (opt_threads->count()) s.threads = flags.threads;
        if (opt_partial->count()) s.allow_partial = true;
        if (opt_out->count()) s.out_dir = flags.out_dir;

        if (s.mode.empty())
            throw harmonics::ValidationError("no mode given (use --mode, --preset or --config)");
        return harmonics::run_scenario(s, std::cout);
    } catch (const harmonics::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harmonics::kUsageError;
    } catch (const harmonics::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return harmonics::kNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harmonics::kNumericalFailure;
    }
}
