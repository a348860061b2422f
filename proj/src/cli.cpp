#include "pwsfold/cli.hpp"

#include "pwsfold/error.hpp"
#include "pwsfold/io.hpp"
#include "pwsfold/sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace pwsfold::cli {

namespace {

struct SimFlags {
    std::string mode = "pws";
    double eps = 0.0;
    bool eps_given = false;
    std::string sigmoid = "tanh";
    double t_end = 200.0;
    std::vector<double> x0{sim::kDefaultExampleStart.begin(), sim::kDefaultExampleStart.end()};
    double stride = 0.01;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double escape = std::numeric_limits<double>::infinity();
    std::string out = "-";
};

void add_sim_flags(CLI::App& cmd, SimFlags& f) {
    cmd.add_option("--mode", f.mode, "pws or regularized")->check(CLI::IsMember({"pws", "regularized"}));
    cmd.add_option_function<double>("--eps", [&f](double v) { f.eps = v, f.eps_given = true; },
                                    "layer width of the regularization");
    cmd.add_option("--sigmoid", f.sigmoid, "tanh, algebraic or cubic");
    cmd.add_option("--t-end", f.t_end, "final time");
    cmd.add_option("--x0", f.x0, "initial state x1 x2 x3")->expected(3);
    cmd.add_option("--stride", f.stride, "sample spacing of the CSV (0: every step)");
    cmd.add_option("--rel-tol", f.rel_tol);
    cmd.add_option("--abs-tol", f.abs_tol);
    cmd.add_option("--escape", f.escape, "stop once some |x_i| exceeds this");
    cmd.add_option("--out", f.out, "CSV path, - for stdout");
}

struct SimOutcome {
    pws::Trajectory trajectory;
    std::string summary;
};

SimOutcome simulate(const pws::PiecewiseSystem& sys, const SimFlags& f) {
    const reg::Sigmoid s = reg::Sigmoid::from_name(f.sigmoid);
    if (f.x0.size() != 3) throw InputError("--x0: expected 3 values");
    const pws::Vec3 x0{f.x0[0], f.x0[1], f.x0[2]};
    IntegratorOptions opts;
    opts.rel_tol = f.rel_tol;
    opts.abs_tol = f.abs_tol;
    opts.dense_output_stride = f.stride;

    std::ostringstream line;
    auto state = [](const pws::Vec3& x) {
        return "(" + io::format_number(x[0]) + "," + io::format_number(x[1]) + "," + io::format_number(x[2]) + ")";
    };
    if (f.mode == "regularized") {
        if (!f.eps_given) throw InputError("--eps: required in regularized mode");
        if (!(f.eps > 0.0)) throw InputError("--eps: must be positive");
        auto res = sim::integrate_regularized(sys, {f.eps, s}, x0, f.t_end, opts, f.escape);
        const auto& last = res.trajectory.samples.back();
        line << "mode=regularized eps=" << io::format_number(f.eps) << " sigmoid=" << s.name()
             << " t=" << io::format_number(last.t) << " final=" << state(last.x)
             << " layer_entries=" << res.layer_entries << " sup_norm=" << io::format_number(res.sup_norm)
             << " steps=" << res.steps << " escaped=" << (res.escaped ? "true" : "false");
        return {std::move(res.trajectory), line.str()};
    }
    if (f.eps_given && !(f.eps > 0.0)) throw InputError("--eps: must be positive");
    pws::PwsOptions po;
    po.integrator = opts;
    po.escape_radius = f.escape;
    auto tr = pws::integrate_pws(sys, x0, f.t_end, po);
    const auto& last = tr.samples.back();
    double sup = 0.0;
    for (const auto& smp : tr.samples)
        for (double v : smp.x) sup = std::max(sup, std::abs(v));
    line << "mode=pws t=" << io::format_number(last.t) << " final=" << state(last.x) << " events=" << tr.events.size()
         << " sup_norm=" << io::format_number(sup) << " non_unique=" << (tr.non_unique ? "true" : "false")
         << " escaped=" << (tr.escaped ? "true" : "false");
    return {std::move(tr), line.str()};
}

// `path` "-" writes to `out`.
template <class Write>
void emit_to(const std::string& path, std::ostream& out, Write&& write) {
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file) throw InputError(path + ": cannot open for writing");
    write(file);
    if (!file) throw InputError(path + ": write failed");
}

twofold::TwoFoldParams require_normal_form(const io::SystemFile& f) {
    if (!f.normal_form) throw InputError("normal_form: required by this command");
    return *f.normal_form;
}

void print_json(std::ostream& out, const io::json& j) { out << j.dump(2) << '\n'; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-fold singularities of piecewise-smooth systems and their regularizations", "pwsfold"};
    app.require_subcommand(1);

    std::string file;
    std::string sigmoid = "tanh";
    auto add_file = [&](CLI::App* cmd) { cmd->add_option("file", file, "system JSON file")->required(); };
    auto add_sigmoid = [&](CLI::App* cmd) { cmd->add_option("--sigmoid", sigmoid, "tanh, algebraic or cubic"); };

    auto* show = app.add_subcommand("show", "print the system in canonical form");
    add_file(show);

    auto* classify = app.add_subcommand("classify", "two-fold class and folded reports (JSON)");
    add_file(classify);
    add_sigmoid(classify);

    auto* folded = app.add_subcommand("folded", "folded reports only (JSON)");
    add_file(folded);
    add_sigmoid(folded);

    auto* fit = app.add_subcommand("fit", "fitted canonical coefficients against the closed form (JSON)");
    add_file(fit);
    add_sigmoid(fit);

    auto* manifold = app.add_subcommand("manifold", "critical manifold and non-hyperbolic curve (CSV)");
    add_file(manifold);
    std::vector<double> x2r{-1.0, 1.0}, x3r{-1.0, 1.0};
    std::size_t n2 = 41, n3 = 41, curve_n = 201;
    std::string manifold_out = "manifold.csv", curve_out = "lcurve.csv";
    manifold->add_option("--x2", x2r, "x2 range MIN MAX")->expected(2);
    manifold->add_option("--x3", x3r, "x3 range MIN MAX")->expected(2);
    manifold->add_option("--n2", n2, "x2 nodes");
    manifold->add_option("--n3", n3, "x3 nodes");
    manifold->add_option("--curve-points", curve_n, "samples of the non-hyperbolic curve");
    manifold->add_option("--out", manifold_out, "critical-manifold CSV, - for stdout");
    manifold->add_option("--curve-out", curve_out, "non-hyperbolic curve CSV (normal forms only), - for stdout");

    SimFlags sim_flags;
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate a system (CSV)");
    add_file(simulate_cmd);
    add_sim_flags(*simulate_cmd, sim_flags);

    SimFlags ex_flags;
    ex_flags.mode = "regularized";
    ex_flags.eps = 1e-4;
    ex_flags.eps_given = true;
    std::vector<std::string> ex_names;
    std::string out_dir;
    auto* examples = app.add_subcommand("examples", "integrate the built-in example systems (CSV)");
    examples->add_option("which", ex_names, "i, ii and/or iii")->required();
    add_sim_flags(*examples, ex_flags);
    examples->add_option("--out-dir", out_dir, "directory for example_<which>.csv when running several");

    std::vector<std::string> argv_store{"pwsfold"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (*show) {
            const auto sf = io::load_system(file);
            const auto& sys = sf.system;
            auto line = [&](const char* name, const pws::FieldExprs& f) {
                out << name << " = (" << f[0].to_string() << ", " << f[1].to_string() << ", " << f[2].to_string()
                    << ")\n";
            };
            line("f+", sys.fplus());
            line("f-", sys.fminus());
            line("g", sys.hidden());
            line("f(x; lambda)", sys.combined());
            return kOk;
        }
        if (*classify || *folded || *fit) {
            const auto p = require_normal_form(io::load_system(file));
            const auto s = reg::Sigmoid::from_name(sigmoid);
            if (*classify) print_json(out, io::classify_json(p, s));
            if (*folded) print_json(out, io::folded_reports_json(p, s));
            if (*fit) print_json(out, io::fit_json(p, s));
            return kOk;
        }
        if (*manifold) {
            const auto sf = io::load_system(file);
            const auto grid = reg::Grid::uniform(x2r[0], x2r[1], n2, x3r[0], x3r[1], n3);
            const auto pts = reg::critical_manifold(sf.system, grid);
            emit_to(manifold_out, out, [&](std::ostream& o) { io::write_critical_csv(o, pts); });
            if (sf.normal_form) {
                const auto curve = reg::nonhyperbolic_curve(*sf.normal_form, curve_n);
                emit_to(curve_out, out, [&](std::ostream& o) { io::write_critical_csv(o, curve); });
            }
            return kOk;
        }
        if (*simulate_cmd) {
            const auto sf = io::load_system(file);
            const auto res = simulate(sf.system, sim_flags);
            emit_to(sim_flags.out, out, [&](std::ostream& o) { io::write_trajectory_csv(o, res.trajectory); });
            (sim_flags.out == "-" ? err : out) << res.summary << '\n';
            return kOk;
        }
        if (*examples) {
            std::vector<sim::Example> which;
            for (const auto& n : ex_names) which.push_back(sim::example_from_name(n));
            if (which.size() == 1) {
                const auto res = simulate(sim::example_system(which[0]), ex_flags);
                emit_to(ex_flags.out, out, [&](std::ostream& o) { io::write_trajectory_csv(o, res.trajectory); });
                (ex_flags.out == "-" ? err : out) << "example " << ex_names[0] << ": " << res.summary << '\n';
                return kOk;
            }
            if (out_dir.empty()) throw InputError("--out-dir: required when running several examples");
            std::filesystem::create_directories(out_dir);
            std::vector<std::unique_ptr<SimOutcome>> results(which.size());
            std::vector<std::exception_ptr> failures(which.size());
            sim::parallel_for(which.size(), [&](std::size_t k) {
                try {
                    results[k] = std::make_unique<SimOutcome>(simulate(sim::example_system(which[k]), ex_flags));
                } catch (...) {
                    failures[k] = std::current_exception();
                }
            });
            for (auto& f : failures)
                if (f) std::rethrow_exception(f);
            for (std::size_t k = 0; k < which.size(); ++k) {
                const std::string path =
                    (std::filesystem::path(out_dir) / ("example_" + ex_names[k] + ".csv")).string();
                emit_to(path, out, [&](std::ostream& o) { io::write_trajectory_csv(o, results[k]->trajectory); });
                out << "example " << ex_names[k] << ": " << results[k]->summary << '\n';
            }
            return kOk;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return kInputError;
}

}  // namespace pwsfold::cli
