#include "femu/commands.hpp"

#include "femu/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace femu {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string short_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string parameter_name(const UpdatingProblem& p, std::size_t i) {
    return "E" + std::to_string(p.parameter_elements.empty() ? i : p.parameter_elements[i]);
}

double parse_cell(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

void append_model(std::ostringstream& os, const std::string& title, const UpdatingProblem& p,
                  const Eigen::VectorXd& moduli) {
    const SystemMatrices sys = assemble(p.structure, moduli);
    const std::size_t wanted = std::min(sys.dof_count, p.n_modes + 3);
    const ModalData modes = solve_modes(sys, wanted).at_coordinates(p.observed);
    const Eigen::VectorXd hz = modes.frequencies_hz();

    os << "[" << title << "]\n";
    os << "moduli_n_per_m2";
    for (Eigen::Index e = 0; e < moduli.size(); ++e) os << ',' << short_num(moduli[e]);
    os << "\nmode,frequency_hz,rigid_body\n";
    for (std::size_t i = 0; i < modes.mode_count(); ++i)
        os << i + 1 << ',' << short_num(hz[static_cast<Eigen::Index>(i)]) << ',' << (modes.rigid_body[i] ? 1 : 0)
           << '\n';

    const ModalData elastic = modes.elastic();
    const std::size_t shown = std::min(p.n_modes, elastic.mode_count());
    os << "shapes (mass-normalised; rows are observed reduced DOFs, columns are elastic modes)\n";
    os << "dof";
    for (std::size_t j = 0; j < shown; ++j) os << ",elastic_" << j + 1;
    os << '\n';
    for (Eigen::Index r = 0; r < elastic.shapes.rows(); ++r) {
        os << p.observed[static_cast<std::size_t>(r)];
        for (std::size_t j = 0; j < shown; ++j) os << ',' << short_num(elastic.shapes(r, static_cast<Eigen::Index>(j)));
        os << '\n';
    }
}

void emit(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
    write_text(dir / name, text);
}

} // namespace

RunConfig resolve_config(const RunOptions& options) {
    RunConfig cfg = load_config(options.config);
    if (options.method) cfg.method = parse_method(*options.method);
    if (options.out) cfg.out_dir = options.out->string();
    if (options.seed) apply_seed(cfg, *options.seed);
    return cfg;
}

std::vector<UpdateReport> run_methods(const RunConfig& cfg, const Scenario& scenario) {
    std::vector<UpdateReport> reports;
    const bool all = cfg.method == Method::All;
    if (all || cfg.method == Method::Rsm) {
        if (cfg.rsm_design_path.empty()) {
            reports.push_back(rsm_update(scenario.problem, cfg.rsm));
        } else {
            std::ifstream in(cfg.rsm_design_path, std::ios::binary);
            if (!in) throw ConfigError("cannot open RSM design file", cfg.rsm_design_path.string());
            std::ostringstream ss;
            ss << in.rdbuf();
            const TrainingSet design =
                parse_sample_table(ss.str(), scenario.problem.parameter_count(), cfg.rsm_design_path.string());
            reports.push_back(rsm_update(scenario.problem, cfg.rsm, design));
        }
    }
    if (all || cfg.method == Method::Sa) reports.push_back(sa_update(scenario.problem, cfg.sa));
    if (all || cfg.method == Method::Ga) reports.push_back(ga_update(scenario.problem, cfg.ga));
    return reports;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = resolve_config(options);
        if (!cfg.rsm_design_path.empty() && !std::filesystem::exists(cfg.rsm_design_path))
            throw ConfigError("RSM design file not found", options.config.string(), 0, "rsm.design");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }

    const std::filesystem::path dir(cfg.out_dir);
    std::vector<UpdateReport> done;
    auto write_outputs = [&] {
        for (const auto& r : done) {
            emit(dir, "report_" + r.method + ".json", report_json(r, cfg));
            if (r.method == "rsm") emit(dir, "rsm_iterations.csv", rsm_iterations_csv(r));
            else emit(dir, "history_" + r.method + ".csv", history_csv(r));
        }
        if (!done.empty()) {
            emit(dir, "comparison.csv", comparison_csv(done));
            emit(dir, "comparison.txt", comparison_text(done));
            emit(dir, "timing.csv", timing_csv(done));
        }
    };

    try {
        const Scenario scenario = build_scenario(cfg.scenario);
        std::filesystem::create_directories(dir);
        emit(dir, "resolved_config.ini", to_ini(cfg));
        const bool all = cfg.method == Method::All;
        RunConfig single = cfg;
        for (Method m : {Method::Rsm, Method::Sa, Method::Ga}) {
            if (!all && cfg.method != m) continue;
            single.method = m;
            out << "running " << method_name(m) << "...\n";
            UpdateReport r = run_methods(single, scenario).front();
            out << "  " << r.method << ": average |error| " << short_num(r.mean_abs_initial_error()) << "% -> "
                << short_num(r.mean_abs_updated_error()) << "%, mean MAC " << short_num(r.mean_mac_initial)
                << " -> " << short_num(r.mean_mac_updated) << ", " << r.fe_evaluations << " FE evaluations\n";
            done.push_back(std::move(r));
        }
        write_outputs();
        out << "reports written to " << dir.string() << '\n';
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        try {
            if (std::filesystem::exists(dir)) write_outputs();
        } catch (const std::exception& e2) {
            err << "could not write partial reports: " << e2.what() << '\n';
        }
        return exit_failure;
    }
}

std::string sample_table(const Scenario& scenario, const RsmConfig& cfg) {
    const UpdatingProblem& p = scenario.problem;
    const Eigen::MatrixXd design = sample_design(p.bounds, cfg.n_samples, cfg.sampler_seed, cfg.sampling);
    std::ostringstream os;
    for (std::size_t i = 0; i < p.parameter_count(); ++i) os << parameter_name(p, i) << ',';
    os << "cost\n";
    EvalBudget budget;
    for (Eigen::Index k = 0; k < design.rows(); ++k) {
        const Eigen::VectorXd x = design.row(k).transpose();
        for (Eigen::Index i = 0; i < x.size(); ++i) os << num(x[i]) << ',';
        os << num(full_objective(p, x, budget)) << '\n';
    }
    return os.str();
}

TrainingSet parse_sample_table(const std::string& text, std::size_t parameter_count, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (cells.size() != parameter_count + 1)
            throw ConfigError("expected " + std::to_string(parameter_count + 1) + " columns", origin, n);
        if (n == 1) {
            if (cells.back() != "cost") throw ConfigError("header must end with 'cost'", origin, n);
            continue;
        }
        std::vector<double> row;
        try {
            for (const auto& c : cells) row.push_back(parse_cell(c));
        } catch (const std::exception& e) {
            throw ConfigError(e.what(), origin, n);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("no design rows", origin);
    TrainingSet t;
    t.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(parameter_count));
    t.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < parameter_count; ++c)
            t.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        t.targets[static_cast<Eigen::Index>(r)] = rows[r].back();
    }
    return t;
}

int cmd_sample(const std::filesystem::path& config, const std::filesystem::path& out_file, std::ostream& out,
               std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    try {
        const Scenario scenario = build_scenario(cfg.scenario);
        const std::string table = sample_table(scenario, cfg.rsm);
        if (out_file.has_parent_path()) std::filesystem::create_directories(out_file.parent_path());
        write_text(out_file, table);
        out << cfg.rsm.n_samples << " design points written to " << out_file.string() << '\n';
        return exit_ok;
    } catch (const std::exception& e) {
        err << "sample failed: " << e.what() << '\n';
        return exit_failure;
    }
}

std::string modes_summary(const Scenario& scenario) {
    const UpdatingProblem& p = scenario.problem;
    std::ostringstream os;
    os << "# units: frequency Hz, modulus N/m^2\n";
    os << "# degrees of freedom: " << p.structure.total_dofs() << ", observed coordinates: " << p.observed.size()
       << ", compared modes: " << p.n_modes << "\n\n";
    append_model(os, "initial model", p, p.moduli_for(p.initial_parameters));
    os << '\n';
    append_model(os, "ground-truth model", p, scenario.ground_truth);
    return os.str();
}

int cmd_modes(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    try {
        out << modes_summary(build_scenario(cfg.scenario));
        return exit_ok;
    } catch (const std::exception& e) {
        err << "modes failed: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace femu
