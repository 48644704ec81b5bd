#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "isac/errors.hpp"
#include "isac/harness.hpp"

namespace isac {

using nlohmann::json;

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::proposed: return "proposed";
        case Scheme::prediction: return "prediction";
        case Scheme::refraction_random: return "refraction_random";
        case Scheme::beam_training: return "beam_training";
        case Scheme::perfect: return "perfect";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::proposed, Scheme::prediction, Scheme::refraction_random,
                     Scheme::beam_training, Scheme::perfect})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

namespace {

std::string_view model_name(InterferenceModel m) {
    switch (m) {
        case InterferenceModel::full: return "full";
        case InterferenceModel::interference_limited: return "interference_limited";
        case InterferenceModel::noise_limited: return "noise_limited";
    }
    return "?";
}

InterferenceModel parse_model(std::string_view name) {
    for (auto m : {InterferenceModel::full, InterferenceModel::interference_limited,
                   InterferenceModel::noise_limited})
        if (model_name(m) == name) return m;
    throw ConfigError("unknown interference model '" + std::string(name) + "'");
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Rewrites `x_db` to linear `x` and `x_dbm` to watts, recursively.
json normalize_db(const json& in) {
    if (in.is_array()) {
        json out = json::array();
        for (const json& v : in) out.push_back(normalize_db(v));
        return out;
    }
    if (!in.is_object()) return in;
    json out = json::object();
    for (auto it = in.begin(); it != in.end(); ++it) {
        std::string key = it.key();
        json value = normalize_db(it.value());
        double offset = 0;
        if (ends_with(key, "_dbm")) {
            key.resize(key.size() - 4);
            offset = -30.0;
        } else if (ends_with(key, "_db")) {
            key.resize(key.size() - 3);
        } else {
            if (out.contains(key)) throw ConfigError("'" + key + "' given twice");
            out[key] = std::move(value);
            continue;
        }
        if (!value.is_number()) throw ConfigError("'" + it.key() + "' must be a number");
        if (out.contains(key) || in.contains(key))
            throw ConfigError("'" + key + "' given both in linear and dB form");
        out[key] = std::pow(10.0, (value.get<double>() + offset) / 10.0);
    }
    return out;
}

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    void vec3(const char* key, Eigen::Vector3d& out) {
        std::vector<double> v;
        get(key, v);
        if (!j_.contains(key)) return;
        if (v.size() != 3) throw ConfigError(where_ + "." + key + " must have 3 entries");
        out = {v[0], v[1], v[2]};
    }

    const json* child(const char* key) {
        seen_.push_back(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError("unknown key " + where_ + "." + it.key());
    }

private:
    const json& j_;
    std::string where_;
    std::vector<std::string> seen_;
};

}  // namespace

ScenarioConfig ScenarioConfig::table1(int k_vehicles) {
    if (k_vehicles < 1) throw ConfigError("k_vehicles must be >= 1");
    ScenarioConfig c;
    c.vehicles.clear();
    for (int k = 0; k < k_vehicles; ++k) {
        VehicleSpec v;
        v.position.x() = k_vehicles == 1 ? 40.0 : 20.0 + 10.0 * k;
        c.vehicles.push_back(v);
    }
    return c;
}

int ScenarioConfig::beams() const { return beam_training.beams > 0 ? beam_training.beams : arrays.m_tx; }

double ScenarioConfig::tau_b() const {
    return beam_training.tau_b > 0 ? beam_training.tau_b : noise.slot_time / (5.0 * arrays.m_tx);
}

void ScenarioConfig::validate() const {
    arrays.validate();
    noise.validate();
    solver.validate();
    if (n_slots < 1) throw ConfigError("n_slots must be >= 1");
    if (!(p_max > 0)) throw ConfigError("p_max must be positive");
    if (!(beta0 > 0)) throw ConfigError("beta0 must be positive");
    if (vehicles.empty()) throw ConfigError("at least one vehicle is required");
    for (const VehicleSpec& v : vehicles) {
        if (!((v.position - rsu).norm() > 0)) throw ConfigError("vehicle placed at the RSU");
        if (!(v.device_offset.norm() > 0)) throw ConfigError("device offset must be non-zero");
        if (!(v.speed >= 0)) throw ConfigError("vehicle speed must be >= 0");
    }
    if (mc.n_samples < 1) throw ConfigError("mc.n_samples must be >= 1");
    if (quantization_bits && (*quantization_bits < 1 || *quantization_bits > 16))
        throw ConfigError("quantization_bits must be in [1, 16]");
    if (beams() < 2) throw ConfigError("beam training needs at least 2 beams");
    if (!(beams() * tau_b() < noise.slot_time))
        throw ConfigError("beam-training overhead must be shorter than the slot");
}

ScenarioConfig parse_config(const std::string& json_text) {
    json raw;
    try {
        raw = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const json doc = normalize_db(raw);
    Reader r(doc, "config");

    std::string preset;
    int k = -1;
    r.get("preset", preset);
    r.get("k_vehicles", k);
    if (!preset.empty() && preset != "table1") throw ConfigError("unknown preset '" + preset + "'");
    ScenarioConfig c = ScenarioConfig::table1(k > 0 ? k : (preset.empty() ? 1 : 5));

    if (const json* a = r.child("arrays")) {
        Reader ar(*a, "arrays");
        ar.get("m_tx", c.arrays.m_tx);
        ar.get("m_rx", c.arrays.m_rx);
        ar.get("l_x", c.arrays.l_x);
        ar.get("l_y", c.arrays.l_y);
        ar.finish();
    }
    if (const json* list = r.child("vehicles")) {
        if (!list->is_array()) throw ConfigError("vehicles must be an array");
        c.vehicles.clear();
        for (const json& v : *list) {
            Reader vr(v, "vehicles[]");
            VehicleSpec vs;
            vr.vec3("position", vs.position);
            vr.get("speed", vs.speed);
            vr.vec3("device_offset", vs.device_offset);
            vr.finish();
            c.vehicles.push_back(vs);
        }
    }
    if (const json* n = r.child("noise")) {
        Reader nr(*n, "noise");
        std::vector<double> q;
        nr.get("q_omega", q);
        if (n->contains("q_omega")) {
            if (q.size() != 4) throw ConfigError("noise.q_omega must have 4 entries");
            c.noise.q_omega = {q[0], q[1], q[2], q[3]};
        }
        nr.get("sigma_r2", c.noise.sigma_r2);
        nr.get("symbol_time", c.noise.symbol_time);
        nr.get("noise_s", c.noise.noise_s);
        nr.get("noise_c", c.noise.noise_c);
        nr.get("var_z_dist", c.noise.var_z_dist);
        nr.get("var_z_speed", c.noise.var_z_speed);
        nr.finish();
    }
    r.vec3("rsu", c.rsu);
    r.get("p_max", c.p_max);
    r.get("beta0", c.beta0);
    r.get("carrier_hz", c.carrier_hz);
    r.get("slot_time", c.noise.slot_time);
    r.get("n_slots", c.n_slots);
    std::string scheme(to_string(c.scheme));
    r.get("scheme", scheme);
    c.scheme = parse_scheme(scheme);
    std::string model(model_name(c.model));
    r.get("model", model);
    c.model = parse_model(model);
    if (const json* s = r.child("solver")) {
        Reader sr(*s, "solver");
        sr.get("grid_step", c.solver.grid_step);
        sr.get("sca_max_iter", c.solver.sca_max_iter);
        sr.get("ao_max_iter", c.solver.ao_max_iter);
        sr.get("rate_tol", c.solver.rate_tol);
        sr.get("bisection_tol", c.solver.bisection_tol);
        sr.finish();
    }
    if (const json* m = r.child("mc")) {
        Reader mr(*m, "mc");
        mr.get("n_samples", c.mc.n_samples);
        mr.get("seed", c.mc.seed);
        mr.get("threads", c.mc.threads);
        mr.finish();
    }
    if (const json* q = r.child("quantization_bits"); q && !q->is_null()) {
        int bits = 0;
        r.get("quantization_bits", bits);
        c.quantization_bits = bits;
    }
    if (const json* b = r.child("beam_training")) {
        Reader br(*b, "beam_training");
        br.get("beams", c.beam_training.beams);
        br.get("tau_b", c.beam_training.tau_b);
        br.finish();
    }
    r.get("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace isac
