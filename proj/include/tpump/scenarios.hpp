#pragma once

#include "tpump/bands.hpp"
#include "tpump/dynamics.hpp"
#include "tpump/floquet.hpp"

#include <json.hpp>

#include <filesystem>

namespace tp {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

// Frequencies in MHz and times in us as in the files; converted when used.
struct ScenarioConfig {
    std::string scenario;
    int first_site = 1, last_site = 36;  // original indices, inclusive
    int local_dim = 3;
    double u_mhz = -190.0;
    Boundary boundary = Boundary::Open;
    Stagger stagger = Stagger::OddPositive;

    DriveKind kind = DriveKind::BulkPump;
    double j_mhz = 8, delta0_mhz = 8, capdelta0_mhz = 80;
    double period_us = 0.4, phase0 = 0.0, offset_r = 0.0, disorder_w = 0.0;

    bool noise = false;
    double t1_us = 25.0, tphi_us = 1.0;

    std::vector<int> init_sites{19};  // original indices
    int init_occupancy = 1;           // per listed site
    double cycles = 1.0;
    int frames = 101;
    std::uint64_t seed = 0;
    int realizations = 50;
    std::vector<double> echo_cycles{2, 4, 6, 8};
    std::vector<SweepAxis> axes;

    int grid_k = 64, grid_t = 64;
    int ring_cells = 6;
    int track_substeps = 6;

    std::string output_dir;

    int n_sites() const { return last_site - first_site + 1; }
    int n_particles() const { return init_occupancy * static_cast<int>(init_sites.size()); }
    bool is_sweep() const;
    bool is_bands() const;
};

const std::vector<std::string>& scenario_ids();
ScenarioConfig default_config(const std::string& scenario);
// defaults of the named scenario, then overrides from the document
ScenarioConfig parse_config(const json& doc);
ScenarioConfig load_config(const std::filesystem::path& p);
json to_json(const ScenarioConfig& c);
void validate(const ScenarioConfig& c);

LatticeSpec lattice_of(const ScenarioConfig& c);
DriveProtocol drive_of(const ScenarioConfig& c);
NoiseModel noise_of(const ScenarioConfig& c);

struct DynamicsOutput {
    ObservableTrace trace;
    json summary;
};
// runs the configured dynamics in memory
DynamicsOutput simulate(const ScenarioConfig& c);

struct BandsOutput {
    json summary;
    BandResult single;           // bands_fig1e
    ComBandResult com;           // bands_bound / bands_resonant
};
BandsOutput compute_scenario_bands(const ScenarioConfig& c);

// one sweep point in memory
json sweep_point(const ScenarioConfig& point_cfg, std::uint64_t point_seed, const std::filesystem::path* dir);

struct RunOutcome {
    json summary;
    json manifest;
    std::filesystem::path dir;
};

RunOutcome run_scenario(const ScenarioConfig& c);
RunOutcome run_sweep(const ScenarioConfig& c, int workers);
RunOutcome run_bands(const ScenarioConfig& c);

// cartesian product, first axis slowest
std::vector<std::vector<double>> sweep_points(const std::vector<SweepAxis>& axes);
void apply_axis(ScenarioConfig& c, const std::string& name, double v);

}  // namespace tp
