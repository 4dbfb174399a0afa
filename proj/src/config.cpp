#include "femu/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace femu {

ConfigError::ConfigError(const std::string& message, std::string origin, std::size_t line, std::string field)
    : std::runtime_error([&] {
          std::string where = origin;
          if (line > 0) where += ":" + std::to_string(line);
          if (!field.empty()) where += (where.empty() ? "" : ": ") + field;
          return where.empty() ? message : where + ": " + message;
      }()),
      origin_(std::move(origin)),
      line_(line),
      field_(std::move(field)) {}

Method parse_method(const std::string& name) {
    if (name == "rsm") return Method::Rsm;
    if (name == "ga") return Method::Ga;
    if (name == "sa") return Method::Sa;
    if (name == "all") return Method::All;
    throw ConfigError("unknown method '" + name + "' (expected rsm, ga, sa or all)");
}

std::string method_name(Method m) {
    switch (m) {
    case Method::Rsm: return "rsm";
    case Method::Ga: return "ga";
    case Method::Sa: return "sa";
    case Method::All: return "all";
    }
    return "all";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Line of "key = ..." inside [section], for diagnostics only.
std::size_t find_line(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    std::string current;
    std::size_t n = 0;
    std::size_t section_line = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[') {
            current = trim(t.substr(1, t.find(']') - 1));
            if (current == section && key.empty()) return n;
            if (current == section) section_line = n;
            continue;
        }
        if (current == section && trim(t.substr(0, t.find('='))) == key) return n;
    }
    return section_line;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

class Reader {
public:
    Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {
        std::istringstream in(text);
        try {
            boost::property_tree::ini_parser::read_ini(in, tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(e.message(), origin_, e.line());
        }
        for (const auto& [name, sec] : tree_) {
            if (sec.empty() && !sec.data().empty())
                throw ConfigError("key outside any section", origin_, find_line(text_, "", name), name);
        }
    }

    // Registers the handler for section.key; handlers run only for keys present.
    void on(const std::string& section, const std::string& key, std::function<void(const std::string&)> fn) {
        handlers_[section][key] = std::move(fn);
    }

    void run() {
        for (const auto& [section, sec] : tree_) {
            auto hs = handlers_.find(section);
            if (hs == handlers_.end())
                throw ConfigError("unknown section", origin_, find_line(text_, section, ""), "[" + section + "]");
            for (const auto& [key, value] : sec) {
                auto h = hs->second.find(key);
                if (h == hs->second.end())
                    throw ConfigError("unknown key", origin_, find_line(text_, section, key), section + "." + key);
                try {
                    h->second(trim(value.data()));
                } catch (const ConfigError& e) {
                    throw ConfigError(e.what(), origin_, find_line(text_, section, key), section + "." + key);
                } catch (const std::exception& e) {
                    throw ConfigError(e.what(), origin_, find_line(text_, section, key), section + "." + key);
                }
            }
        }
    }

private:
    const std::string& text_;
    std::string origin_;
    boost::property_tree::ptree tree_;
    std::map<std::string, std::map<std::string, std::function<void(const std::string&)>>> handlers_;
};

double to_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError("expected a number, got '" + s + "'");
    return v;
}

std::uint64_t to_uint(const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError("expected a non-negative integer, got '" + s + "'");
    return v;
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_uint(s)); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    Reader r(text, origin);
    auto& g = cfg.scenario.geometry;
    auto& sc = cfg.scenario;
    auto num = [](double& dst) { return [&dst](const std::string& v) { dst = to_double(v); }; };
    auto size = [](std::size_t& dst) { return [&dst](const std::string& v) { dst = to_size(v); }; };
    auto u64 = [](std::uint64_t& dst) { return [&dst](const std::string& v) { dst = to_uint(v); }; };

    r.on("structure", "crossbar_length", num(g.crossbar_length));
    r.on("structure", "left_flange_length", num(g.left_flange_length));
    r.on("structure", "right_flange_length", num(g.right_flange_length));
    r.on("structure", "width", num(g.width));
    r.on("structure", "depth", num(g.depth));
    r.on("structure", "density", num(g.density));
    r.on("structure", "poisson_ratio", num(g.poisson_ratio));
    r.on("structure", "elements_per_run", size(g.elements_per_run));
    r.on("structure", "file", [&](const std::string& v) { cfg.structure_file = v; });

    r.on("scenario", "nominal_modulus", num(sc.nominal_modulus));
    r.on("scenario", "lower_bound", num(sc.lower_bound));
    r.on("scenario", "upper_bound", num(sc.upper_bound));
    r.on("scenario", "perturbations", [&](const std::string& v) {
        sc.perturbations.clear();
        for (const std::string& item : split(v, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("perturbation '" + item + "' is not element:modulus");
            sc.perturbations.emplace_back(to_size(trim(item.substr(0, colon))), to_double(trim(item.substr(colon + 1))));
        }
    });
    r.on("scenario", "observed_nodes", [&](const std::string& v) {
        sc.observed_nodes.clear();
        for (const std::string& item : split(v, ',')) sc.observed_nodes.push_back(to_size(item));
    });
    r.on("scenario", "n_modes", size(sc.n_modes));
    r.on("scenario", "frequency_noise", num(sc.frequency_noise));
    r.on("scenario", "shape_noise", num(sc.shape_noise));
    r.on("scenario", "noise_seed", u64(sc.seed));

    r.on("cost", "beta", num(sc.beta));
    r.on("cost", "gamma_mode", [&](const std::string& v) {
        if (v == "absolute") sc.gamma_mode = GammaMode::Absolute;
        else if (v == "relative") sc.gamma_mode = GammaMode::Relative;
        else throw ConfigError("expected absolute or relative, got '" + v + "'");
    });
    r.on("cost", "target_cost", num(sc.target_cost));
    r.on("cost", "spare_modes", size(sc.spare_modes));

    r.on("rsm", "n_samples", size(cfg.rsm.n_samples));
    r.on("rsm", "max_iterations", size(cfg.rsm.max_iterations));
    r.on("rsm", "initial_cycles", size(cfg.rsm.initial_cycles));
    r.on("rsm", "incremental_cycles", size(cfg.rsm.incremental_cycles));
    r.on("rsm", "hidden_units", size(cfg.rsm.hidden_units));
    r.on("rsm", "sampling", [&](const std::string& v) {
        if (v == "lhs") cfg.rsm.sampling = SamplingScheme::LatinHypercube;
        else if (v == "uniform") cfg.rsm.sampling = SamplingScheme::Uniform;
        else throw ConfigError("expected lhs or uniform, got '" + v + "'");
    });
    r.on("rsm", "trainer", [&](const std::string& v) {
        if (v == "scg") cfg.rsm.training.trainer = Trainer::ScaledConjugateGradient;
        else if (v == "gd") cfg.rsm.training.trainer = Trainer::GradientDescent;
        else throw ConfigError("expected scg or gd, got '" + v + "'");
    });
    r.on("rsm", "learning_rate", num(cfg.rsm.training.gd_learning_rate));
    r.on("rsm", "design", [&](const std::string& v) { cfg.rsm_design_file = v; });
    r.on("rsm", "sampler_seed", u64(cfg.rsm.sampler_seed));
    r.on("rsm", "net_seed", u64(cfg.rsm.net_seed));
    r.on("rsm", "ga_seed", u64(cfg.rsm.ga.seed));
    std::optional<std::size_t> inner_population;
    std::optional<std::size_t> inner_generations;
    r.on("rsm", "ga_population_size", [&](const std::string& v) { inner_population = to_size(v); });
    r.on("rsm", "ga_generations", [&](const std::string& v) { inner_generations = to_size(v); });

    r.on("ga", "population_size", size(cfg.ga.population_size));
    r.on("ga", "generations", size(cfg.ga.generations));
    r.on("ga", "selection_q", num(cfg.ga.selection_q));
    r.on("ga", "mutation_rate", num(cfg.ga.mutation_rate));
    r.on("ga", "crossover_rate", num(cfg.ga.crossover_rate));
    r.on("ga", "mutation_shape_b", num(cfg.ga.mutation_shape_b));
    r.on("ga", "seed", u64(cfg.ga.seed));

    r.on("sa", "initial_temperature", num(cfg.sa.initial_temperature));
    r.on("sa", "cooling_factor", num(cfg.sa.cooling_factor));
    r.on("sa", "steps_per_temperature", size(cfg.sa.steps_per_temperature));
    r.on("sa", "n_runs", size(cfg.sa.n_runs));
    r.on("sa", "step_scale", num(cfg.sa.step_scale));
    r.on("sa", "min_temperature", num(cfg.sa.min_temperature));
    r.on("sa", "seed", u64(cfg.sa.seed));

    r.on("run", "method", [&](const std::string& v) { cfg.method = parse_method(v); });
    r.on("run", "out", [&](const std::string& v) { cfg.out_dir = v; });

    r.run();
    // The inner GA shares the operator settings of [ga] unless sized separately.
    const std::uint64_t inner_seed = cfg.rsm.ga.seed;
    cfg.rsm.ga = cfg.ga;
    cfg.rsm.ga.seed = inner_seed;
    if (inner_population) cfg.rsm.ga.population_size = *inner_population;
    if (inner_generations) cfg.rsm.ga.generations = *inner_generations;

    if (!cfg.rsm_design_file.empty()) {
        cfg.rsm_design_path = cfg.rsm_design_file;
        if (cfg.rsm_design_path.is_relative() && !base_dir.empty()) cfg.rsm_design_path = base_dir / cfg.rsm_design_path;
    }
    if (!cfg.structure_file.empty()) {
        std::filesystem::path p(cfg.structure_file);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        try {
            sc.structure = load_structure(p);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), origin, find_line(text, "structure", "file"), "structure.file");
        } catch (const ModelError& e) {
            throw ConfigError(e.what(), origin, find_line(text, "structure", "file"), "structure.file");
        }
    }

    // Cross-field checks with the same diagnostics path as parse errors.
    auto check = [&](const std::string& section, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw ConfigError(e.what(), origin, find_line(text, section, ""), "[" + section + "]");
        }
    };
    check("scenario", [&] {
        const BeamStructure st = sc.structure ? *sc.structure : h_frame(g, sc.nominal_modulus);
        sc.validate(st);
    });
    check("ga", [&] { cfg.ga.validate(); });
    check("sa", [&] { cfg.sa.validate(); });
    check("rsm", [&] {
        const BeamStructure st = sc.structure ? *sc.structure : h_frame(g, sc.nominal_modulus);
        cfg.rsm.validate(st.element_count());
    });
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path());
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.ga.seed = seed;
    cfg.sa.seed = seed;
    cfg.rsm.ga.seed = seed;
    cfg.rsm.sampler_seed = seed;
    cfg.rsm.net_seed = seed;
}

std::vector<std::pair<std::string, std::string>> resolved_fields(const RunConfig& cfg) {
    const auto& g = cfg.scenario.geometry;
    const auto& sc = cfg.scenario;
    std::vector<std::pair<std::string, std::string>> f;
    if (cfg.structure_file.empty()) {
        f.emplace_back("structure.crossbar_length", fmt(g.crossbar_length));
        f.emplace_back("structure.left_flange_length", fmt(g.left_flange_length));
        f.emplace_back("structure.right_flange_length", fmt(g.right_flange_length));
        f.emplace_back("structure.width", fmt(g.width));
        f.emplace_back("structure.depth", fmt(g.depth));
        f.emplace_back("structure.density", fmt(g.density));
        f.emplace_back("structure.poisson_ratio", fmt(g.poisson_ratio));
        f.emplace_back("structure.elements_per_run", std::to_string(g.elements_per_run));
    } else {
        f.emplace_back("structure.file", cfg.structure_file);
    }
    f.emplace_back("scenario.nominal_modulus", fmt(sc.nominal_modulus));
    f.emplace_back("scenario.lower_bound", fmt(sc.lower_bound));
    f.emplace_back("scenario.upper_bound", fmt(sc.upper_bound));
    std::string pert;
    for (std::size_t i = 0; i < sc.perturbations.size(); ++i)
        pert += (i ? ", " : "") + std::to_string(sc.perturbations[i].first) + ":" + fmt(sc.perturbations[i].second);
    f.emplace_back("scenario.perturbations", pert);
    f.emplace_back("scenario.observed_nodes", join_sizes(sc.observed_nodes));
    f.emplace_back("scenario.n_modes", std::to_string(sc.n_modes));
    f.emplace_back("scenario.frequency_noise", fmt(sc.frequency_noise));
    f.emplace_back("scenario.shape_noise", fmt(sc.shape_noise));
    f.emplace_back("scenario.noise_seed", std::to_string(sc.seed));
    f.emplace_back("cost.beta", fmt(sc.beta));
    f.emplace_back("cost.gamma_mode", sc.gamma_mode == GammaMode::Absolute ? "absolute" : "relative");
    f.emplace_back("cost.target_cost", fmt(sc.target_cost));
    f.emplace_back("cost.spare_modes", std::to_string(sc.spare_modes));
    f.emplace_back("rsm.n_samples", std::to_string(cfg.rsm.n_samples));
    f.emplace_back("rsm.max_iterations", std::to_string(cfg.rsm.max_iterations));
    f.emplace_back("rsm.initial_cycles", std::to_string(cfg.rsm.initial_cycles));
    f.emplace_back("rsm.incremental_cycles", std::to_string(cfg.rsm.incremental_cycles));
    f.emplace_back("rsm.hidden_units", std::to_string(cfg.rsm.hidden_units));
    f.emplace_back("rsm.sampling", cfg.rsm.sampling == SamplingScheme::LatinHypercube ? "lhs" : "uniform");
    f.emplace_back("rsm.trainer", cfg.rsm.training.trainer == Trainer::ScaledConjugateGradient ? "scg" : "gd");
    f.emplace_back("rsm.learning_rate", fmt(cfg.rsm.training.gd_learning_rate));
    if (!cfg.rsm_design_file.empty()) f.emplace_back("rsm.design", cfg.rsm_design_file);
    f.emplace_back("rsm.sampler_seed", std::to_string(cfg.rsm.sampler_seed));
    f.emplace_back("rsm.net_seed", std::to_string(cfg.rsm.net_seed));
    f.emplace_back("rsm.ga_seed", std::to_string(cfg.rsm.ga.seed));
    f.emplace_back("rsm.ga_population_size", std::to_string(cfg.rsm.ga.population_size));
    f.emplace_back("rsm.ga_generations", std::to_string(cfg.rsm.ga.generations));
    f.emplace_back("ga.population_size", std::to_string(cfg.ga.population_size));
    f.emplace_back("ga.generations", std::to_string(cfg.ga.generations));
    f.emplace_back("ga.selection_q", fmt(cfg.ga.selection_q));
    f.emplace_back("ga.mutation_rate", fmt(cfg.ga.mutation_rate));
    f.emplace_back("ga.crossover_rate", fmt(cfg.ga.crossover_rate));
    f.emplace_back("ga.mutation_shape_b", fmt(cfg.ga.mutation_shape_b));
    f.emplace_back("ga.seed", std::to_string(cfg.ga.seed));
    f.emplace_back("sa.initial_temperature", fmt(cfg.sa.initial_temperature));
    f.emplace_back("sa.cooling_factor", fmt(cfg.sa.cooling_factor));
    f.emplace_back("sa.steps_per_temperature", std::to_string(cfg.sa.steps_per_temperature));
    f.emplace_back("sa.n_runs", std::to_string(cfg.sa.n_runs));
    f.emplace_back("sa.step_scale", fmt(cfg.sa.step_scale));
    f.emplace_back("sa.min_temperature", fmt(cfg.sa.min_temperature));
    f.emplace_back("sa.seed", std::to_string(cfg.sa.seed));
    f.emplace_back("run.method", method_name(cfg.method));
    f.emplace_back("run.out", cfg.out_dir);
    return f;
}

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream os;
    std::string section;
    for (const auto& [name, value] : resolved_fields(cfg)) {
        const auto dot = name.find('.');
        const std::string s = name.substr(0, dot);
        if (s != section) {
            os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
            section = s;
        }
        os << name.substr(dot + 1) << " = " << value << "\n";
    }
    return os.str();
}

BeamStructure parse_structure(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    Formulation form = Formulation::PlanarBending;
    std::vector<Node> nodes;
    std::vector<Element> elements;
    std::vector<std::size_t> fixed;
    std::vector<std::size_t> element_lines;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        std::vector<std::string> args;
        for (std::string a; ls >> a;) args.push_back(a);
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw ConfigError("wrong number of values for '" + word + "'", origin, n, word);
        };
        try {
            if (word == "formulation") {
                need(1, 1);
                if (args[0] == "planar") form = Formulation::PlanarBending;
                else if (args[0] == "grillage") form = Formulation::Grillage;
                else throw ConfigError("expected planar or grillage, got '" + args[0] + "'");
            } else if (word == "node") {
                need(2, 2);
                nodes.push_back({to_double(args[0]), to_double(args[1])});
            } else if (word == "element") {
                need(8, 9);
                Element e;
                e.node_a = to_size(args[0]);
                e.node_b = to_size(args[1]);
                e.section = {to_double(args[2]), to_double(args[3]), to_double(args[4]), to_double(args[5])};
                e.density = to_double(args[6]);
                e.elastic_modulus = to_double(args[7]);
                if (args.size() == 9) e.poisson_ratio = to_double(args[8]);
                elements.push_back(e);
                element_lines.push_back(n);
            } else if (word == "fix") {
                need(1, 1);
                fixed.push_back(to_size(args[0]));
            } else {
                throw ConfigError("unknown directive '" + word + "'");
            }
        } catch (const ConfigError& e) {
            if (e.line() > 0) throw;
            throw ConfigError(e.what(), origin, n, word);
        }
    }
    for (std::size_t k = 0; k < elements.size(); ++k)
        if (elements[k].node_a >= nodes.size() || elements[k].node_b >= nodes.size())
            throw ConfigError("element refers to a missing node", origin, element_lines[k], "element");
    try {
        return BeamStructure(std::move(nodes), std::move(elements), form, std::move(fixed));
    } catch (const ModelError& e) {
        throw ConfigError(e.what(), origin);
    }
}

BeamStructure load_structure(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open structure file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_structure(ss.str(), path.string());
}

} // namespace femu
