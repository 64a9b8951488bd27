#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "harmonics/attractor.hpp"
#include "harmonics/dynamics.hpp"
#include "harmonics/env.hpp"
#include "harmonics/io.hpp"
#include "harmonics/presets.hpp"
#include "harmonics/shape.hpp"
#include "harmonics/spectral.hpp"
#include "harmonics/swarm.hpp"

namespace harmonics {

// One CLI run. Populated from a key=value config file, a --preset, or
// flags; the manifest written next to the outputs echoes every field and
// can itself be fed back through --config.
struct Scenario {
    std::string mode;           // eigen | dynamics | swarm-unweighted | swarm-weighted | reconstruct
    std::string preset;

    std::string env_path;       // environment file; ignored when env_text is set
    std::string env_text;       // inline environment (presets)
    std::string shape_path;
    std::string shape_text;

    int a = 1;                              // target harmonic (1-based)
    std::string design = "optimized";       // closed2 | closed4 | optimized | first1
    int order = 4;
    double beta = 0.0;
    double epsilon = 1e-2;

    int robots = 1000;
    std::uint64_t seed = 1;
    long steps = 100;
    long stride = 1;
    int start_cell = 0;
    bool local_proposal = false;

    double p = 1.0;
    std::optional<double> tau;
    bool exact_dynamics = false;

    double tolerance = 1e-9;
    int window = 5;
    long max_steps = 100000;

    int threads = 1;
    bool allow_partial = false;
    std::string out_dir = "out";
    std::vector<long> snapshots;            // explicit snapshot steps (dynamics mode)
};

// Exit-code taxonomy shared by the CLI and run_scenario.
enum ExitCode : int {
    kOk = 0,
    kUsageError = 2,
    kNumericalFailure = 3,
    kNotConverged = 4,
};

inline Scenario parse_config(std::istream& in) {
    Scenario s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "mode") s.mode = val;
            else if (key == "preset") s.preset = val;
            else if (key == "env") s.env_path = val;
            else if (key == "shape") s.shape_path = val;
            else if (key == "a") s.a = std::stoi(val);
            else if (key == "design") s.design = val;
            else if (key == "order") s.order = std::stoi(val);
            else if (key == "beta") s.beta = std::stod(val);
            else if (key == "epsilon") s.epsilon = std::stod(val);
            else if (key == "robots") s.robots = std::stoi(val);
            else if (key == "seed") s.seed = std::stoull(val);
            else if (key == "steps") s.steps = std::stol(val);
            else if (key == "stride") s.stride = std::stol(val);
            else if (key == "start_cell") s.start_cell = std::stoi(val);
            else if (key == "local_proposal") s.local_proposal = std::stoi(val) != 0;
            else if (key == "p") s.p = std::stod(val);
            else if (key == "tau") s.tau = std::stod(val);
            else if (key == "exact_dynamics") s.exact_dynamics = std::stoi(val) != 0;
            else if (key == "tolerance") s.tolerance = std::stod(val);
            else if (key == "window") s.window = std::stoi(val);
            else if (key == "max_steps") s.max_steps = std::stol(val);
            else if (key == "threads") s.threads = std::stoi(val);
            else if (key == "allow_partial") s.allow_partial = std::stoi(val) != 0;
            else if (key == "out") s.out_dir = val;
            else if (key == "snapshots") {
                std::istringstream ss(val);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    if (!tok.empty())
                        s.snapshots.push_back(std::stol(tok));
            } else {
                throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("config line " + std::to_string(lineno) + ": bad value for '" +
                             key + "'");
        }
    }
    return s;
}

// Figure-reproduction presets. The 2D presets embed their environment and
// shape so they run without external files.
inline Scenario preset_scenario(const std::string& name) {
    Scenario s;
    s.preset = name;
    if (name == "fig1") {
        s.mode = "eigen";
        s.env_text = "line 5\n";
    } else if (name == "fig2") {
        s.mode = "dynamics";
        s.env_text = "line 5\n";
        s.a = 1;
        s.design = "first1";
        s.snapshots = {1, 3, 5, 10, 50};
    } else if (name == "fig3") {
        s.mode = "swarm-unweighted";
        s.env_text = "line 20\n";
        s.robots = 20000;
        s.steps = 500;
        s.stride = 50;
        s.start_cell = 0;
    } else if (name == "fig4") {
        s.mode = "swarm-weighted";
        s.env_text = "line 20\n";
        s.a = 5;
        s.design = "closed4";
        s.beta = 0.7;
        s.robots = 200000;
        s.steps = 200;
        s.stride = 10;
        s.start_cell = 0;
    } else if (name == "fig7") {
        s.mode = "reconstruct";
        s.env_text = presets::kArrowEnv;
        s.shape_text = presets::kArrowShape;
        s.p = 0.25;  // ceil(95 * 0.25) = 24 harmonics
        s.exact_dynamics = true;
        s.start_cell = 47;
        // Clustered eigenvalues cap the design gap near 1 - 2e-5 for a few
        // harmonics; the oracle needs ~1e6 steps to settle there.
        s.max_steps = 3000000;
    } else if (name == "fig5") {
        s.mode = "reconstruct";
        s.env_text = presets::kAnnulusEnv;
        s.shape_text = presets::annulus_shape();
        s.p = 0.24;  // ceil(120 * 0.24) = 29 harmonics
        s.exact_dynamics = true;
        s.start_cell = 112;
        s.max_steps = 3000000;
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    return s;
}

inline PolynomialDesign make_design(const SpectralBasis& basis, const Scenario& s) {
    if (s.design == "closed2")
        return design_closed_form(basis, s.a, 2, s.beta);
    if (s.design == "closed4")
        return design_closed_form(basis, s.a, 4, s.beta);
    if (s.design == "first1") {
        if (s.a != 1)
            throw ValidationError("design 'first1' targets harmonic a=1 only");
        return design_first_order_for_pi1(basis);
    }
    if (s.design == "optimized")
        return design_optimized(basis, s.a, s.order, s.beta, s.epsilon);
    throw ValidationError("unknown design '" + s.design + "'");
}

// Order-4 minimax design with epsilon backoff. Tight spectra can make the
// default epsilon infeasible (the gap between adjacent eigenvalues bounds
// how fast f can fall away from f(0) = 1), so the reconstruction pipeline
// relaxes epsilon before giving up.
inline PolynomialDesign design_order4_backoff(const SpectralBasis& basis, int a, double beta) {
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8}) {
        try {
            return design_optimized(basis, a, 4, beta, eps);
        } catch (const InfeasibleDesignError&) {
        }
    }
    return design_closed_form(basis, a, 4, beta);
}

struct ReconstructOutcome {
    Eigen::VectorXd coefficients;
    HarmonicPlan plan;
    std::vector<Eigen::VectorXd> fields;    // rescaled, one per selected harmonic
    ReconstructionResult result;
    bool all_converged = true;
};

// Algorithm steps of the deployment pipeline: decompose, select, run one
// swarm per harmonic (or the exact-dynamics oracle), rescale, superpose,
// threshold.
inline ReconstructOutcome run_reconstruction(const Environment& env, const TransitionMatrix& tm,
                                             const SpectralBasis& basis,
                                             const TargetShape& shape, const Scenario& s) {
    ReconstructOutcome outcome;
    outcome.coefficients = decompose_shape(shape, basis);
    outcome.plan = select_harmonics(outcome.coefficients, basis, s.p);

    ConvergenceCriterion crit{s.tolerance, s.window, s.max_steps};
    const std::vector<std::vector<int>> disks =
        s.local_proposal ? proposal_disks(env, 4) : std::vector<std::vector<int>>{};
    for (size_t h = 0; h < outcome.plan.selected.size(); ++h) {
        const auto [alpha, c] = outcome.plan.selected[h];
        if (std::abs(c) < 1e-12) {
            // Numerically-zero coefficient: the harmonic contributes
            // nothing; running a swarm for it would only report
            // dissipation.
            outcome.fields.push_back(Eigen::VectorXd::Zero(basis.n));
            continue;
        }
        Eigen::VectorXd pi = basis.pi(alpha);
        if (alpha == 1)
            pi /= pi.norm();  // coefficients are against the L2-normalized basis
        const PolynomialDesign design = design_order4_backoff(basis, alpha, s.beta);
        const AttractorMatrix am = assemble_matrix(tm, basis, design, alpha);
        HarmonicRunResult run;
        if (s.exact_dynamics) {
            run = run_harmonic_exact(am, pi, c, s.start_cell, crit);
        } else {
            const KernelTable table = extract_kernels(env, am);
            // Separate RNG substream per harmonic swarm.
            const std::uint64_t swarm_seed = mix64(s.seed ^ (0x5151ULL + h));
            run = run_harmonic_swarm(env, table, pi, c, s.robots, s.start_cell, swarm_seed,
                                     crit, s.threads, s.local_proposal ? &disks : nullptr);
        }
        outcome.all_converged = outcome.all_converged && run.converged;
        outcome.fields.push_back(rescale(run.wbar, pi, c));
    }

    Eigen::VectorXd total = Eigen::VectorXd::Zero(basis.n);
    for (const auto& f : outcome.fields)
        total += f;
    const double tau = s.tau.value_or(default_threshold(total, outcome.plan.approximation));
    outcome.result = superpose_and_threshold(outcome.fields, tau, basis.n);
    return outcome;
}

// --- scenario driver -------------------------------------------------------

namespace detail {

inline Environment load_environment(const Scenario& s) {
    if (!s.env_text.empty()) {
        std::istringstream in(s.env_text);
        return parse_environment(in);
    }
    if (s.env_path.empty())
        throw ValidationError("no environment given (env= or --preset)");
    std::istringstream in(read_file(s.env_path));
    return parse_environment(in);
}

inline TransitionMatrix chain_of(const Environment& env) {
    return env.kind() == EnvKind::Line1D ? build_line_chain(env.size())
                                         : build_grid_chain(env);
}

inline std::string manifest_text(const Scenario& s) {
    std::ostringstream out;
    out << "# manifest: rerun with --config <this file> --out <dir>\n";
    out << "mode=" << s.mode << "\n";
    if (!s.preset.empty())
        out << "preset=" << s.preset << "\n";
    if (!s.env_path.empty())
        out << "env=" << s.env_path << "\n";
    if (!s.shape_path.empty())
        out << "shape=" << s.shape_path << "\n";
    out << "a=" << s.a << "\n";
    out << "design=" << s.design << "\n";
    out << "order=" << s.order << "\n";
    out << "beta=" << format_full(s.beta) << "\n";
    out << "epsilon=" << format_full(s.epsilon) << "\n";
    out << "robots=" << s.robots << "\n";
    out << "seed=" << s.seed << "\n";
    out << "steps=" << s.steps << "\n";
    out << "stride=" << s.stride << "\n";
    out << "start_cell=" << s.start_cell << "\n";
    out << "local_proposal=" << (s.local_proposal ? 1 : 0) << "\n";
    out << "p=" << format_full(s.p) << "\n";
    if (s.tau)
        out << "tau=" << format_full(*s.tau) << "\n";
    out << "exact_dynamics=" << (s.exact_dynamics ? 1 : 0) << "\n";
    out << "tolerance=" << format_full(s.tolerance) << "\n";
    out << "window=" << s.window << "\n";
    out << "max_steps=" << s.max_steps << "\n";
    out << "threads=" << s.threads << "\n";
    out << "allow_partial=" << (s.allow_partial ? 1 : 0) << "\n";
    if (!s.snapshots.empty()) {
        out << "snapshots=";
        for (size_t i = 0; i < s.snapshots.size(); ++i)
            out << (i ? "," : "") << s.snapshots[i];
        out << "\n";
    }
    return out.str();
}

inline void write_swarm_snapshot(std::ostream& csv, long t, const SwarmState& state, int n) {
    Eigen::VectorXd counts = aggregate_counts(state, n);
    Eigen::VectorXd weights = aggregate_weights(state, n);
    for (int i = 0; i < n; ++i)
        write_csv_row(csv, {std::to_string(t), std::to_string(i),
                            std::to_string(static_cast<long>(counts(i))),
                            format_full(weights(i))});
}

} // namespace detail

// Runs one scenario, writing a manifest plus mode-specific artifacts under
// out_dir. Returns kOk or kNotConverged; validation and numerical errors
// propagate as exceptions for the CLI to map onto exit codes.
inline int run_scenario(const Scenario& s, std::ostream& log) {
    namespace fs = std::filesystem;
    fs::create_directories(s.out_dir);
    const auto path = [&](const std::string& name) { return s.out_dir + "/" + name; };

    const Environment env = detail::load_environment(s);
    const TransitionMatrix tm = detail::chain_of(env);
    write_file(path("manifest.txt"), detail::manifest_text(s));

    int status = kOk;
    if (s.mode == "eigen") {
        const SpectralBasis basis = decompose(tm);
        std::ostringstream csv;
        for (int i = 1; i <= basis.n; ++i) {
            std::vector<std::string> row{std::to_string(i), format_full(basis.lambda(i))};
            const Eigen::VectorXd pi = basis.pi(i);
            for (int j = 0; j < basis.n; ++j)
                row.push_back(format_full(pi(j)));
            write_csv_row(csv, row);
        }
        write_file(path("spectrum.csv"), csv.str());
        log << "eigen: n=" << basis.n << " lambda_1=" << basis.lambda(1)
            << " cond=" << basis.condition_number << "\n";
    } else if (s.mode == "dynamics") {
        const SpectralBasis basis = decompose(tm);
        const PolynomialDesign design = make_design(basis, s);
        const AttractorMatrix am = assemble_matrix(tm, basis, design, s.a);
        Eigen::VectorXd v0 = Eigen::VectorXd::Zero(tm.n);
        v0(s.start_cell) = 1.0;
        const std::set<long> snaps(s.snapshots.begin(), s.snapshots.end());
        const Trajectory traj =
            iterate(am.M, v0, {s.tolerance, s.window, s.max_steps}, snaps);
        std::ostringstream csv;
        for (const auto& [t, v] : traj.snapshots) {
            std::vector<std::string> row{std::to_string(t)};
            for (int j = 0; j < v.size(); ++j)
                row.push_back(format_full(v(j)));
            write_csv_row(csv, row);
        }
        write_file(path("trajectory.csv"), csv.str());
        write_file(path("limit.txt"), render_ascii(*traj.limit, env));
        if (!traj.converged_at) {
            log << "dynamics: not converged after " << s.max_steps << " steps\n";
            status = kNotConverged;
        } else {
            log << "dynamics: converged at t=" << *traj.converged_at << "\n";
        }
    } else if (s.mode == "swarm-unweighted") {
        SwarmState state = make_swarm(s.robots, s.start_cell);
        std::ostringstream csv;
        detail::write_swarm_snapshot(csv, 0, state, tm.n);
        for (long t = 1; t <= s.steps; ++t) {
            step_unweighted(state, tm, s.seed, s.threads);
            if (t % s.stride == 0 || t == s.steps)
                detail::write_swarm_snapshot(csv, t, state, tm.n);
        }
        write_file(path("swarm.csv"), csv.str());
        const Eigen::VectorXd dist = aggregate_counts(state, tm.n) / double(s.robots);
        write_file(path("distribution.txt"), render_ascii(dist, env));
        log << "swarm-unweighted: N=" << s.robots << " t=" << s.steps << "\n";
    } else if (s.mode == "swarm-weighted") {
        const SpectralBasis basis = decompose(tm);
        const PolynomialDesign design = make_design(basis, s);
        const AttractorMatrix am = assemble_matrix(tm, basis, design, s.a);
        const KernelTable table = extract_kernels(env, am);
        write_file(path("kernels.txt"), to_text(env, table));
        const auto disks = s.local_proposal ? proposal_disks(env, table.radius)
                                            : std::vector<std::vector<int>>{};
        SwarmState state = make_swarm(s.robots, s.start_cell, 1.0);
        std::ostringstream csv;
        detail::write_swarm_snapshot(csv, 0, state, tm.n);
        for (long t = 1; t <= s.steps; ++t) {
            step_weighted(state, table, env, s.seed, s.threads,
                          s.local_proposal ? &disks : nullptr);
            if (t % s.stride == 0 || t == s.steps)
                detail::write_swarm_snapshot(csv, t, state, tm.n);
        }
        write_file(path("swarm.csv"), csv.str());
        const Eigen::VectorXd wbar = aggregate_weights(state, tm.n);
        write_file(path("weights.txt"), render_ascii(wbar, env));
        log << "swarm-weighted: a=" << s.a << " N=" << s.robots << " t=" << s.steps << "\n";
    } else if (s.mode == "reconstruct") {
        const SpectralBasis basis = decompose(tm);
        TargetShape shape;
        if (!s.shape_text.empty()) {
            std::istringstream in(s.shape_text);
            shape.w_des = parse_shape_overlay(env, in);
        } else if (!s.shape_path.empty()) {
            std::istringstream in(read_file(s.shape_path));
            shape.w_des = parse_shape_overlay(env, in);
        } else {
            throw ValidationError("reconstruct mode needs a shape (shape= or preset)");
        }
        const ReconstructOutcome outcome = run_reconstruction(env, tm, basis, shape, s);

        std::ostringstream plan;
        plan << "# reconstruction plan\n";
        plan << "env=" << (s.env_path.empty() ? "<inline>" : s.env_path) << "\n";
        plan << "shape=" << (s.shape_path.empty() ? "<inline>" : s.shape_path) << "\n";
        plan << "p=" << format_full(s.p) << "\ntau=" << format_full(outcome.result.tau)
             << "\nrobots=" << s.robots << "\nseed=" << s.seed << "\n";
        plan << "# harmonic, coefficient\n";
        for (const auto& [alpha, c] : outcome.plan.selected)
            plan << alpha << "," << format_full(c) << "\n";
        write_file(path("plan.txt"), plan.str());

        std::ostringstream csv;
        for (int i = 0; i < basis.n; ++i)
            write_csv_row(csv, {std::to_string(i), format_full(outcome.result.total(i))});
        write_file(path("total.csv"), csv.str());
        write_file(path("occupied.txt"), render_overlay(outcome.result.occupied, env));
        const PgmRender pgm = render_pgm(outcome.result.total, env);
        write_file(path("total.pgm"), pgm.pgm);
        write_file(path("total.pgm.meta"), pgm.sidecar);
        log << "reconstruct: " << outcome.plan.count << " harmonics, tau="
            << outcome.result.tau << (outcome.all_converged ? "" : " (partial)") << "\n";
        if (!outcome.all_converged)
            status = kNotConverged;
    } else {
        throw ValidationError("unknown mode '" + s.mode + "'");
    }
    if (status == kNotConverged && s.allow_partial)
        status = kOk;
    return status;
}

} // namespace harmonics
