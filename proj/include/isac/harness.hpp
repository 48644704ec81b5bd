#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "isac/closedform.hpp"
#include "isac/montecarlo.hpp"
#include "isac/optimizer.hpp"

namespace isac {

enum class Scheme { proposed, prediction, refraction_random, beam_training, perfect };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);  // throws ConfigError

struct VehicleSpec {
    Eigen::Vector3d position{40.0, 20.0, 0.0};
    double speed = 20.0;
    Eigen::Vector3d device_offset{0.0, 0.0, -1.5};
};

// Zero fields select B = M_t and tau_b = slot_time / (5 M_t).
struct BeamTraining {
    int beams = 0;
    double tau_b = 0;
};

struct ScenarioConfig {
    ArrayConfig arrays;
    std::vector<VehicleSpec> vehicles{VehicleSpec{}};
    NoiseModel noise;  // noise.slot_time is the slot length
    Eigen::Vector3d rsu{0.0, 0.0, 20.0};
    double p_max = 0.1;
    double beta0 = 1e-3;
    double carrier_hz = 30e9;  // informational; beta0 already encodes the wavelength
    int n_slots = 200;
    Scheme scheme = Scheme::proposed;
    InterferenceModel model = InterferenceModel::full;
    SolverSettings solver;
    McConfig mc;
    std::optional<int> quantization_bits;
    BeamTraining beam_training;
    std::uint64_t seed = 1;

    // K = 1 starts at x = 40 m; larger K staggers vehicles 10 m apart from x = 20 m.
    static ScenarioConfig table1(int k_vehicles = 5);

    void validate() const;
    int beams() const;
    double tau_b() const;
};

// Configuration document: either {"preset": "table1", ...overrides} or a full document.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

struct VehicleSlot {
    KinematicState truth;
    KinematicState predicted;
    KinematicState tracked;
    double eta = 0;
    double beta_r = 0;
    double p_sc = 0;
    double p_c = 0;
    double r_sc = 0;
    double r_c = 0;
    double r_avg = 0;
    double planned_rate = 0;  // closed-form objective value behind the allocation
    double echo_snr = 0;      // linear
    double var_phi_track = 0;
    double var_phiy_track = 0;
    bool gate = false;
};

struct SlotResult {
    int slot = 0;
    Scheme scheme = Scheme::proposed;
    std::vector<VehicleSlot> vehicles;
};

struct RunReport {
    Scheme scheme = Scheme::proposed;
    std::uint64_t seed = 0;
    std::string sweep_axis;  // empty outside sweeps
    double sweep_value = 0;
    std::vector<SlotResult> slots;
    bool truncated = false;
    std::string truncation_reason;

    double mean_rate() const;      // mean of r_avg over slots and vehicles
    double mean_min_rate() const;  // mean over slots of the per-slot minimum
    int vehicle_count() const;
};

RunReport run_trajectory(const ScenarioConfig& config);

enum class SweepAxis { p_max, m_tx, l_elements, speed, k_vehicles };
SweepAxis parse_axis(std::string_view name);
std::string_view to_string(SweepAxis a);

// Configuration for one sweep point; the speed axis rescales the slot length as 20 m/s / v.
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepAxis axis, double value);

std::vector<RunReport> sweep(const ScenarioConfig& base, SweepAxis axis,
                             const std::vector<double>& values);

// Sensing-condition check at the first slot of each vehicle.
struct GateReport {
    int vehicle = 0;
    double lhs = 0;  // sigma^2/A_phiy + sigma^2/A_phi
    bool pass = false;
    double eta = 0;
    double beta_r = 0;
};
std::vector<GateReport> gate_check(const ScenarioConfig& config);

// Monte Carlo checks of the closed forms at the first vehicle's start geometry with a
// 40 x 1 IOS (echo SNR over a variance grid, interference, rate over a power sweep).
std::vector<ValidationReport> validation_suite(const ScenarioConfig& config);

enum class Format { csv, json };
Format parse_format(std::string_view name);

std::string to_csv(const std::vector<RunReport>& reports);
std::string to_json(const std::vector<RunReport>& reports);
std::string to_csv(const std::vector<ValidationReport>& reports);
std::string to_json(const std::vector<ValidationReport>& reports);
void write_file(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace isac
