#include "femu/report.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace femu {

namespace {

using nlohmann::ordered_json;

ordered_json to_array(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

std::string report_json(const UpdateReport& r, const RunConfig& cfg) {
    ordered_json j;
    j["method"] = r.method;

    ordered_json config = ordered_json::object();
    for (const auto& [key, value] : resolved_fields(cfg)) config[key] = value;
    j["config"] = config;
    ordered_json settings = ordered_json::object();
    for (const auto& [key, value] : r.settings) settings[key] = value;
    j["method_settings"] = settings;
    j["seeds"] = {{"ga", cfg.ga.seed},
                  {"sa", cfg.sa.seed},
                  {"rsm_sampler", cfg.rsm.sampler_seed},
                  {"rsm_net", cfg.rsm.net_seed},
                  {"rsm_ga", cfg.rsm.ga.seed},
                  {"scenario_noise", cfg.scenario.seed}};

    j["units"] = {{"frequency", "Hz"}, {"modulus", "N/m^2"}, {"error", "percent, (model - measured) / measured"}};
    j["parameters"] = {{"initial", to_array(r.initial_parameters)}, {"updated", to_array(r.updated_parameters)}};
    j["frequencies_hz"] = {{"measured", to_array(r.measured_hz)},
                           {"initial", to_array(r.initial_hz)},
                           {"updated", to_array(r.updated_hz)}};
    j["error_pct"] = {{"initial", to_array(r.initial_error_pct)}, {"updated", to_array(r.updated_error_pct)}};
    j["mean_abs_error_pct"] = {{"initial", r.mean_abs_initial_error()}, {"updated", r.mean_abs_updated_error()}};
    j["mean_mac"] = {{"initial", r.mean_mac_initial}, {"updated", r.mean_mac_updated}};
    j["cost"] = {{"initial", r.initial_cost}, {"final", r.final_cost}};
    j["fe_evaluations"] = r.fe_evaluations;
    j["truncated"] = r.truncated;
    j["target_reached"] = r.target_reached;
    j["aborted"] = r.aborted;
    j["diagnostics"] = r.diagnostics;

    if (!r.rsm_history.empty()) {
        ordered_json rows = ordered_json::array();
        for (const auto& it : r.rsm_history)
            rows.push_back({{"iteration", it.iteration},
                            {"predicted_cost", it.predicted_cost},
                            {"evaluated_cost", it.evaluated_cost},
                            {"best_cost", it.best_cost},
                            {"training_loss", it.training_loss},
                            {"evaluations", it.evaluations},
                            {"replaced", it.replaced}});
        j["rsm_iterations"] = rows;
    }
    if (r.surrogate) {
        const SurrogateNet& net = *r.surrogate;
        j["surrogate"] = {{"inputs", net.d_in},
                          {"hidden", net.m_hidden},
                          {"activation", "tanh hidden, linear output"},
                          {"layout", "w1 row-major (hidden x (inputs + 1), bias column first), then w2 "
                                     "(hidden + 1, bias first)"},
                          {"input_lower", to_array(net.input_scaling.lower)},
                          {"input_upper", to_array(net.input_scaling.upper)},
                          {"output_offset", net.output_scaling.offset},
                          {"output_span", net.output_scaling.span},
                          {"weights", to_array(net.weights())}};
    }
    return j.dump(2) + "\n";
}

std::string history_csv(const UpdateReport& r) {
    std::ostringstream os;
    os << "step,run,temperature,best_cost,mean_cost,evaluations\n";
    for (const auto& h : r.history)
        os << h.step << ',' << h.run << ',' << num(h.temperature) << ',' << num(h.best_cost) << ','
           << num(h.mean_cost) << ',' << h.evaluations << '\n';
    return os.str();
}

std::string rsm_iterations_csv(const UpdateReport& r) {
    std::ostringstream os;
    os << "iteration,predicted_cost,evaluated_cost,best_cost,training_loss,evaluations,replaced\n";
    for (const auto& it : r.rsm_history)
        os << it.iteration << ',' << num(it.predicted_cost) << ',' << num(it.evaluated_cost) << ','
           << num(it.best_cost) << ',' << num(it.training_loss) << ',' << it.evaluations << ','
           << (it.replaced ? 1 : 0) << '\n';
    return os.str();
}

std::string comparison_csv(const std::vector<UpdateReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("comparison needs at least one report");
    const UpdateReport& first = reports.front();
    std::ostringstream os;
    os << "mode,measured_hz,initial_hz,initial_error_pct";
    for (const auto& r : reports) os << ',' << r.method << "_hz," << r.method << "_error_pct";
    os << '\n';
    for (Eigen::Index i = 0; i < first.measured_hz.size(); ++i) {
        os << i + 1 << ',' << num(first.measured_hz[i]) << ',' << num(first.initial_hz[i]) << ','
           << num(first.initial_error_pct[i]);
        for (const auto& r : reports) os << ',' << num(r.updated_hz[i]) << ',' << num(r.updated_error_pct[i]);
        os << '\n';
    }
    return os.str();
}

std::string comparison_text(const std::vector<UpdateReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("comparison needs at least one report");
    const UpdateReport& first = reports.front();
    const int w = 14;
    auto cell = [w](const std::string& s) {
        std::string out(s);
        if (out.size() < static_cast<std::size_t>(w)) out.insert(0, static_cast<std::size_t>(w) - out.size(), ' ');
        return out;
    };
    std::ostringstream os;
    os << cell("Mode") << cell("Measured Hz") << cell("Initial Hz");
    for (const auto& r : reports) os << cell(upper(r.method) + " Hz");
    os << '\n';
    for (Eigen::Index i = 0; i < first.measured_hz.size(); ++i) {
        os << cell(std::to_string(i + 1)) << cell(fixed(first.measured_hz[i], 2)) << cell(fixed(first.initial_hz[i], 2));
        for (const auto& r : reports) os << cell(fixed(r.updated_hz[i], 2));
        os << '\n';
    }
    os << '\n' << cell("Mode") << cell("") << cell("Initial %");
    for (const auto& r : reports) os << cell(upper(r.method) + " %");
    os << '\n';
    for (Eigen::Index i = 0; i < first.measured_hz.size(); ++i) {
        os << cell(std::to_string(i + 1)) << cell("") << cell(fixed(first.initial_error_pct[i], 2));
        for (const auto& r : reports) os << cell(fixed(r.updated_error_pct[i], 2));
        os << '\n';
    }
    os << cell("Avg |err| %") << cell("") << cell(fixed(first.mean_abs_initial_error(), 2));
    for (const auto& r : reports) os << cell(fixed(r.mean_abs_updated_error(), 2));
    os << '\n' << cell("Mean MAC") << cell("") << cell(fixed(first.mean_mac_initial, 4));
    for (const auto& r : reports) os << cell(fixed(r.mean_mac_updated, 4));
    os << '\n' << cell("FE evals") << cell("") << cell("");
    for (const auto& r : reports) os << cell(std::to_string(r.fe_evaluations));
    os << '\n' << cell("Wall time s") << cell("") << cell("");
    for (const auto& r : reports) os << cell(fixed(r.wall_time_s, 2));
    os << '\n';
    return os.str();
}

std::string timing_csv(const std::vector<UpdateReport>& reports) {
    std::ostringstream os;
    os << "method,wall_time_s\n";
    for (const auto& r : reports) os << r.method << ',' << num(r.wall_time_s) << '\n';
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

} // namespace femu
