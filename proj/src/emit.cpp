#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "isac/errors.hpp"
#include "isac/harness.hpp"

namespace isac {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Format parse_format(std::string_view name) {
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    throw ConfigError("unknown format '" + std::string(name) + "' (csv|json)");
}

namespace {

double to_db(double v) { return 10.0 * std::log10(v); }

json state_json(const KinematicState& s) {
    return {{"phi_x", s.phi_x}, {"phi_y", s.phi_y}, {"dist", s.dist}, {"speed", s.speed}};
}

// nlohmann writes non-finite numbers as null.
json report_json(const RunReport& r) {
    json slots = json::array();
    for (const SlotResult& s : r.slots) {
        json vs = json::array();
        for (std::size_t k = 0; k < s.vehicles.size(); ++k) {
            const VehicleSlot& v = s.vehicles[k];
            vs.push_back({{"vehicle", k},
                          {"truth", state_json(v.truth)},
                          {"predicted", state_json(v.predicted)},
                          {"tracked", state_json(v.tracked)},
                          {"eta", v.eta},
                          {"beta_r", v.beta_r},
                          {"p_sc", v.p_sc},
                          {"p_c", v.p_c},
                          {"r_sc", v.r_sc},
                          {"r_c", v.r_c},
                          {"r_avg", v.r_avg},
                          {"planned_rate", v.planned_rate},
                          {"echo_snr_db", to_db(v.echo_snr)},
                          {"var_phi_track", v.var_phi_track},
                          {"var_phiy_track", v.var_phiy_track},
                          {"gate", v.gate}});
        }
        slots.push_back({{"slot", s.slot}, {"scheme", to_string(s.scheme)}, {"vehicles", vs}});
    }
    json j = {{"scheme", to_string(r.scheme)},
              {"seed", r.seed},
              {"truncated", r.truncated},
              {"truncation_reason", r.truncation_reason},
              {"aggregates", {{"mean_rate", r.mean_rate()}, {"mean_min_rate", r.mean_min_rate()}}},
              {"slots", slots}};
    if (!r.sweep_axis.empty()) {
        j["sweep_axis"] = r.sweep_axis;
        j["sweep_value"] = r.sweep_value;
    }
    return j;
}

}  // namespace

std::string to_csv(const std::vector<RunReport>& reports) {
    const bool swept = !reports.empty() && !reports.front().sweep_axis.empty();
    std::string out =
        "slot,vehicle,scheme,eta,beta_r,p_sc,p_c,r_sc,r_c,r_avg,echo_snr_db,var_phi_track,"
        "var_phiy_track";
    out += swept ? ",sweep_axis,sweep_value\n" : "\n";
    for (const RunReport& r : reports)
        for (const SlotResult& s : r.slots)
            for (std::size_t k = 0; k < s.vehicles.size(); ++k) {
                const VehicleSlot& v = s.vehicles[k];
                out += std::to_string(s.slot) + ',' + std::to_string(k) + ',' +
                       std::string(to_string(s.scheme));
                for (double x : {v.eta, v.beta_r, v.p_sc, v.p_c, v.r_sc, v.r_c, v.r_avg,
                                 to_db(v.echo_snr), v.var_phi_track, v.var_phiy_track})
                    out += ',' + format_double(x);
                if (swept) out += ',' + r.sweep_axis + ',' + format_double(r.sweep_value);
                out += '\n';
            }
    return out;
}

std::string to_json(const std::vector<RunReport>& reports) {
    json arr = json::array();
    for (const RunReport& r : reports) arr.push_back(report_json(r));
    return json{{"reports", arr}}.dump(1) + "\n";
}

std::string to_csv(const std::vector<ValidationReport>& reports) {
    std::string out = "label,closed_form,closed_form_strict,mc_mean,mc_stderr,rel_error,tolerance,pass\n";
    for (const ValidationReport& r : reports) {
        out += r.label;
        for (double x : {r.closed_form, r.closed_form_strict, r.mc_mean, r.mc_stderr, r.rel_error,
                         r.tolerance})
            out += ',' + format_double(x);
        out += r.pass ? ",1\n" : ",0\n";
    }
    return out;
}

std::string to_json(const std::vector<ValidationReport>& reports) {
    json arr = json::array();
    for (const ValidationReport& r : reports)
        arr.push_back({{"label", r.label},
                       {"closed_form", r.closed_form},
                       {"closed_form_strict", r.closed_form_strict},
                       {"mc_mean", r.mc_mean},
                       {"mc_stderr", r.mc_stderr},
                       {"rel_error", r.rel_error},
                       {"tolerance", r.tolerance},
                       {"pass", r.pass}});
    return json{{"validation", arr}}.dump(1) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace isac
