#include "tpump/scenarios.hpp"

#include "tpump/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace tp {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

[[noreturn]] void config_error(const std::string& m) { fail(Error::Kind::Config, m); }

const char* kind_name(DriveKind k) {
    switch (k) {
        case DriveKind::BulkPump: return "bulk";
        case DriveKind::EdgePump: return "edge";
        case DriveKind::Static: return "static";
    }
    return "?";
}

DriveKind parse_kind(const std::string& s) {
    if (s == "bulk") return DriveKind::BulkPump;
    if (s == "edge") return DriveKind::EdgePump;
    if (s == "static") return DriveKind::Static;
    config_error("unknown drive kind '" + s + "'");
}

const char* stagger_name(Stagger s) { return s == Stagger::OddPositive ? "odd_positive" : "even_positive"; }

Stagger parse_stagger(const std::string& s) {
    if (s == "odd_positive") return Stagger::OddPositive;
    if (s == "even_positive") return Stagger::EvenPositive;
    config_error("unknown stagger '" + s + "'");
}

const std::set<std::string> kAxisNames{"period_us", "offset_r",  "disorder_w", "capdelta0_mhz", "delta0_mhz", "j_mhz",
                                        "u_mhz",     "phase0",    "t1_us",      "tphi_us",       "cycles"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) config_error(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) config_error("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void take(const json& obj, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

bool ScenarioConfig::is_sweep() const { return scenario.rfind("sweep_", 0) == 0; }
bool ScenarioConfig::is_bands() const { return scenario.rfind("bands_", 0) == 0; }

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids{
        "fig1_forward",   "fig1_backward", "fig2_bound",     "fig3_resonant",  "fig4_edge_left",
        "fig4_edge_right", "edge_slow",    "sweep_period",   "sweep_offset",   "sweep_disorder",
        "control_nointeraction", "bands_fig1e", "bands_bound", "bands_resonant"};
    return ids;
}

ScenarioConfig default_config(const std::string& id) {
    const auto& ids = scenario_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) config_error("unknown scenario '" + id + "'");
    ScenarioConfig c;
    c.scenario = id;
    c.output_dir = "out/" + id;
    auto fig2 = [&](double capdelta0) {
        c.first_site = 18;
        c.last_site = 26;
        c.j_mhz = 12;
        c.delta0_mhz = 12;
        c.capdelta0_mhz = capdelta0;
        c.period_us = 0.4;
        c.init_sites = {19};
        c.init_occupancy = 2;
    };
    auto fig4 = [&](double t_e, double jd) {
        c.first_site = 19;
        c.last_site = 24;
        c.kind = DriveKind::EdgePump;
        c.j_mhz = jd;
        c.delta0_mhz = jd;
        c.capdelta0_mhz = 0.5;
        c.period_us = t_e;
        c.init_sites = {19};
        c.init_occupancy = 2;
    };
    if (id == "fig1_backward") c.init_sites = {18};
    if (id == "fig2_bound" || id == "bands_bound") fig2(8);
    if (id == "fig3_resonant" || id == "bands_resonant") fig2(150);
    if (id == "control_nointeraction") {
        fig2(150);
        c.u_mhz = 0.0;
        c.init_sites = {21, 22};
        c.init_occupancy = 1;
    }
    if (id == "fig4_edge_left") fig4(4, 12);
    if (id == "fig4_edge_right") {
        fig4(4, 12);
        c.init_sites = {24};
    }
    if (id == "edge_slow") fig4(40, 25);
    if (id == "sweep_period") {
        c.axes = {{"period_us", {0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0, 2.5, 3.0}}};
        c.echo_cycles = {1};
    }
    if (id == "sweep_offset" || id == "sweep_disorder") {
        c.phase0 = -kTwoPi / 4;
        c.init_sites = {18};
        c.cycles = 8;
        if (id == "sweep_offset") {
            std::vector<double> v;
            for (int i = 0; i <= 20; ++i) v.push_back(0.1 * i);
            c.axes = {{"offset_r", v}};
        } else {
            c.axes = {{"disorder_w", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}}};
        }
    }
    if (id == "bands_bound" || id == "bands_resonant") {
        c.grid_k = 16;
        c.grid_t = 48;
    }
    return c;
}

ScenarioConfig parse_config(const json& doc) {
    check_keys(doc, {"scenario", "lattice", "drive", "noise", "initial", "cycles", "frames", "seed", "realizations",
                     "echo_cycles", "sweep", "grid", "ring_cells", "track_substeps", "output_dir"},
               "config");
    if (!doc.contains("scenario") || !doc["scenario"].is_string()) config_error("config needs a 'scenario' string");
    ScenarioConfig c = default_config(doc["scenario"].get<std::string>());
    if (doc.contains("lattice")) {
        const json& l = doc["lattice"];
        check_keys(l, {"sites", "local_dim", "u_mhz", "boundary", "stagger"}, "lattice");
        if (l.contains("sites")) {
            const json& s = l["sites"];
            if (!s.is_array() || s.size() != 2) config_error("lattice.sites must be [first, last]");
            c.first_site = s[0].get<int>();
            c.last_site = s[1].get<int>();
        }
        take(l, "local_dim", c.local_dim);
        take(l, "u_mhz", c.u_mhz);
        if (l.contains("boundary")) {
            std::string b = l["boundary"].get<std::string>();
            if (b == "open")
                c.boundary = Boundary::Open;
            else if (b == "periodic")
                c.boundary = Boundary::Periodic;
            else
                config_error("unknown boundary '" + b + "'");
        }
        if (l.contains("stagger")) c.stagger = parse_stagger(l["stagger"].get<std::string>());
    }
    if (doc.contains("drive")) {
        const json& d = doc["drive"];
        check_keys(d, {"kind", "j_mhz", "delta0_mhz", "capdelta0_mhz", "period_us", "phase0", "offset_r", "disorder_w"},
                   "drive");
        if (d.contains("kind")) c.kind = parse_kind(d["kind"].get<std::string>());
        take(d, "j_mhz", c.j_mhz);
        take(d, "delta0_mhz", c.delta0_mhz);
        take(d, "capdelta0_mhz", c.capdelta0_mhz);
        take(d, "period_us", c.period_us);
        take(d, "phase0", c.phase0);
        take(d, "offset_r", c.offset_r);
        take(d, "disorder_w", c.disorder_w);
    }
    if (doc.contains("noise")) {
        const json& n = doc["noise"];
        check_keys(n, {"enabled", "t1_us", "tphi_us"}, "noise");
        take(n, "enabled", c.noise);
        take(n, "t1_us", c.t1_us);
        take(n, "tphi_us", c.tphi_us);
    }
    if (doc.contains("initial")) {
        const json& i = doc["initial"];
        check_keys(i, {"sites", "occupancy"}, "initial");
        take(i, "sites", c.init_sites);
        take(i, "occupancy", c.init_occupancy);
    }
    take(doc, "cycles", c.cycles);
    take(doc, "frames", c.frames);
    take(doc, "seed", c.seed);
    take(doc, "realizations", c.realizations);
    take(doc, "echo_cycles", c.echo_cycles);
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        check_keys(s, {"axes"}, "sweep");
        c.axes.clear();
        if (!s.contains("axes") || !s["axes"].is_array()) config_error("sweep.axes must be a list");
        for (const auto& a : s["axes"]) {
            check_keys(a, {"name", "values"}, "sweep axis");
            SweepAxis ax;
            take(a, "name", ax.name);
            take(a, "values", ax.values);
            c.axes.push_back(ax);
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        check_keys(g, {"n_k", "n_t"}, "grid");
        take(g, "n_k", c.grid_k);
        take(g, "n_t", c.grid_t);
    }
    take(doc, "ring_cells", c.ring_cells);
    take(doc, "track_substeps", c.track_substeps);
    take(doc, "output_dir", c.output_dir);
    validate(c);
    return c;
}

ScenarioConfig load_config(const fs::path& p) {
    std::ifstream in(p);
    if (!in) fail(Error::Kind::Io, "cannot open config " + p.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        config_error("cannot parse " + p.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ScenarioConfig& c) {
    json axes = json::array();
    for (const auto& a : c.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    return {{"scenario", c.scenario},
            {"lattice",
             {{"sites", {c.first_site, c.last_site}},
              {"local_dim", c.local_dim},
              {"u_mhz", c.u_mhz},
              {"boundary", c.boundary == Boundary::Open ? "open" : "periodic"},
              {"stagger", stagger_name(c.stagger)}}},
            {"drive",
             {{"kind", kind_name(c.kind)},
              {"j_mhz", c.j_mhz},
              {"delta0_mhz", c.delta0_mhz},
              {"capdelta0_mhz", c.capdelta0_mhz},
              {"period_us", c.period_us},
              {"phase0", c.phase0},
              {"offset_r", c.offset_r},
              {"disorder_w", c.disorder_w}}},
            {"noise", {{"enabled", c.noise}, {"t1_us", c.t1_us}, {"tphi_us", c.tphi_us}}},
            {"initial", {{"sites", c.init_sites}, {"occupancy", c.init_occupancy}}},
            {"cycles", c.cycles},
            {"frames", c.frames},
            {"seed", c.seed},
            {"realizations", c.realizations},
            {"echo_cycles", c.echo_cycles},
            {"sweep", {{"axes", axes}}},
            {"grid", {{"n_k", c.grid_k}, {"n_t", c.grid_t}}},
            {"ring_cells", c.ring_cells},
            {"track_substeps", c.track_substeps},
            {"output_dir", c.output_dir}};
}

void validate(const ScenarioConfig& c) {
    if (c.n_sites() < 2) config_error("lattice needs at least two sites");
    if (c.local_dim != 2 && c.local_dim != 3) config_error("local_dim must be 2 or 3");
    if (c.boundary == Boundary::Periodic && c.n_sites() % 2) config_error("periodic lattice needs an even site count");
    if (!std::isfinite(c.u_mhz)) config_error("u_mhz must be finite");
    if (!(c.period_us > 0)) config_error("period_us must be positive");
    if (c.j_mhz < 0) config_error("j_mhz must be >= 0");
    if (!(c.cycles > 0)) config_error("cycles must be positive");
    if (c.frames < 2) config_error("frames must be >= 2");
    if (c.noise && (!(c.t1_us > 0) || !(c.tphi_us > 0))) config_error("noise times must be positive");
    if (!c.is_bands()) {
        if (c.init_sites.empty()) config_error("initial.sites must not be empty");
        std::set<int> seen;
        for (int s : c.init_sites) {
            if (s < c.first_site || s > c.last_site)
                config_error("initial site " + std::to_string(s) + " outside lattice [" + std::to_string(c.first_site) +
                             ", " + std::to_string(c.last_site) + "]");
            if (!seen.insert(s).second) config_error("initial sites must be distinct");
        }
        if (c.init_occupancy < 1 || c.init_occupancy >= c.local_dim)
            config_error("initial occupancy not allowed by local_dim");
        if (c.n_particles() > 2) config_error("at most two particles are supported");
    }
    if (c.is_sweep()) {
        if (c.axes.empty()) config_error("sweep scenario needs at least one axis");
        if (c.realizations < 1) config_error("realizations must be >= 1");
        for (double e : c.echo_cycles)
            if (!(e > 0) || e > c.cycles + 1e-9) config_error("echo_cycles must lie in (0, cycles]");
    }
    for (const auto& a : c.axes) {
        if (!kAxisNames.count(a.name)) config_error("unknown sweep axis '" + a.name + "'");
        if (a.values.empty()) config_error("sweep axis '" + a.name + "' has no values");
    }
    if (c.is_bands()) {
        if (c.grid_k < 8 || c.grid_t < 8) config_error("grid needs at least 8 points per axis");
        if (c.ring_cells < 2) config_error("ring_cells must be >= 2");
        if (c.kind != DriveKind::BulkPump) config_error("band scenarios need the bulk drive");
    }
}

LatticeSpec lattice_of(const ScenarioConfig& c) {
    LatticeSpec s = LatticeSpec::uniform(c.n_sites(), mhz(c.u_mhz), c.local_dim, c.boundary, c.first_site);
    s.stagger = c.stagger;
    return s;
}

DriveProtocol drive_of(const ScenarioConfig& c) {
    DriveProtocol d;
    d.kind = c.kind;
    d.j_hop = mhz(c.j_mhz);
    d.delta0 = mhz(c.delta0_mhz);
    d.capdelta0 = mhz(c.capdelta0_mhz);
    d.period = c.period_us;
    d.phase0 = c.phase0;
    d.offset_r = c.offset_r;
    d.disorder_w = c.disorder_w;
    d.disorder_seed = c.seed;
    return d;
}

NoiseModel noise_of(const ScenarioConfig& c) {
    NoiseModel n;
    n.t1_eff = c.t1_us;
    n.tphi_eff = c.tphi_us;
    return n;
}

void apply_axis(ScenarioConfig& c, const std::string& name, double v) {
    if (name == "period_us") c.period_us = v;
    else if (name == "offset_r") c.offset_r = v;
    else if (name == "disorder_w") c.disorder_w = v;
    else if (name == "capdelta0_mhz") c.capdelta0_mhz = v;
    else if (name == "delta0_mhz") c.delta0_mhz = v;
    else if (name == "j_mhz") c.j_mhz = v;
    else if (name == "u_mhz") c.u_mhz = v;
    else if (name == "phase0") c.phase0 = v;
    else if (name == "t1_us") c.t1_us = v;
    else if (name == "tphi_us") c.tphi_us = v;
    else if (name == "cycles") c.cycles = v;
    else config_error("unknown sweep axis '" + name + "'");
}

std::vector<std::vector<double>> sweep_points(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> pts{{}};
    for (const auto& a : axes) {
        if (a.values.empty()) config_error("sweep axis '" + a.name + "' has no values");
        std::vector<std::vector<double>> next;
        for (const auto& p : pts)
            for (double v : a.values) {
                auto q = p;
                q.push_back(v);
                next.push_back(q);
            }
        pts = std::move(next);
    }
    return pts;
}

namespace {

std::vector<std::uint8_t> initial_occupation(const ScenarioConfig& c) {
    std::vector<std::uint8_t> occ(c.n_sites(), 0);
    for (int s : c.init_sites) occ[s - c.first_site] = static_cast<std::uint8_t>(c.init_occupancy);
    return occ;
}

// frame index closest to time t
int frame_at(const ObservableTrace& tr, double t) {
    int best = 0;
    for (int f = 0; f < static_cast<int>(tr.frames.size()); ++f)
        if (std::abs(tr.frames[f].time - t) < std::abs(tr.frames[best].time - t)) best = f;
    return best;
}

json summarize(const ScenarioConfig& c, const ObservableTrace& tr) {
    const double T = c.period_us;
    const int ncyc = std::max(1, static_cast<int>(std::lround(std::floor(c.cycles + 1e-9))));
    const double d = 1.0;
    json s;
    s["scenario"] = c.scenario;
    s["x0_over_d"] = tr.frames.front().com / d;
    s["x_final_over_d"] = tr.frames.back().com / d;
    s["delta_x_over_d"] = tr.delta_x() / d;
    std::vector<double> shifts, pair_max_cycle;
    int prev = 0;
    for (int k = 1; k <= ncyc; ++k) {
        int f = frame_at(tr, k * T);
        shifts.push_back((tr.frames[f].com - tr.frames[prev].com) / d);
        double pm = 0.0;
        for (int q = prev; q <= f; ++q) {
            const auto& g = tr.frames[q].gamma;
            double pairs = 0.0;
            for (int a = 0; a + 1 < g.rows(); ++a) pairs += g(a, a + 1);
            pm = std::max(pm, pairs);
        }
        pair_max_cycle.push_back(pm);
        prev = f;
    }
    s["cycle_shifts_over_d"] = shifts;
    double max_p1 = 0.0, max_off = 0.0, max_pair = 0.0, max_gamma_sum_dev = 0.0;
    for (const auto& f : tr.frames) {
        max_p1 = std::max(max_p1, f.populations.col(1).maxCoeff());
        if (f.gamma.size()) {
            max_off = std::max(max_off, offdiagonal_gamma_fraction(f.gamma));
            double pairs = 0.0;
            for (int a = 0; a + 1 < f.gamma.rows(); ++a) pairs += f.gamma(a, a + 1);
            max_pair = std::max(max_pair, pairs);
            if (c.n_particles() == 2 && !c.noise)
                max_gamma_sum_dev = std::max(max_gamma_sum_dev, std::abs(f.gamma.sum() - 2.0));
        }
    }
    s["max_single_occupancy"] = max_p1;
    s["max_offdiag_gamma_fraction"] = max_off;
    s["max_pair_population"] = max_pair;
    s["pair_population_max_per_cycle"] = pair_max_cycle;
    if (c.n_particles() == 2 && !c.noise) s["gamma_sum_max_deviation"] = max_gamma_sum_dev;
    const auto& last = tr.frames.back().populations;
    s["final_p2_first_site"] = last(0, 2);
    s["final_p2_last_site"] = last(last.rows() - 1, 2);
    s["final_p1_first_site"] = last(0, 1);
    s["final_p1_last_site"] = last(last.rows() - 1, 1);
    json echo = json::object();
    for (double e : c.echo_cycles)
        if (e <= c.cycles + 1e-9) echo[fmt_num(e)] = tr.frames[frame_at(tr, e * T)].loschmidt;
    s["loschmidt_at_cycles"] = echo;
    s["max_norm_drift"] = tr.max_norm_drift;
    s["max_step_drift"] = tr.max_step_drift;
    s["n_steps"] = tr.n_steps;
    s["step_us"] = tr.step;
    if (c.noise) {
        s["min_density_eigenvalue"] = tr.min_eigenvalue;
        s["positivity_warning"] = tr.positivity_warning;
    }
    return s;
}

}  // namespace

DynamicsOutput simulate(const ScenarioConfig& c) {
    validate(c);
    if (c.is_bands()) config_error("band scenarios have no dynamics");
    LatticeSpec spec = lattice_of(c);
    DriveProtocol drive = drive_of(c);
    const std::vector<double> xi =
        drive.disorder_w != 0.0 ? disorder_xi(drive.disorder_seed, spec.n_sites) : std::vector<double>(spec.n_sites, 0.0);
    const int np = c.n_particles();
    const double t_final = c.cycles * c.period_us;
    StepOptions opt;
    opt.n_frames = c.frames;

    DynamicsOutput out;
    auto params = [&](double t) { return instantaneous_params(drive, t, xi); };
    if (!c.noise) {
        auto basis = std::make_shared<const FockBasis>(build_fock_basis(spec, np));
        ManyBodyOperator op(spec, basis);
        QuantumState psi0 = prepare_fock_state(basis, initial_occupation(c));
        auto res = evolve_unitary([&](double t) { return op.assemble(params(t), drive.j_hop); }, psi0, t_final, spec, opt);
        out.trace = std::move(res.trace);
    } else {
        auto space = std::make_shared<const SectorSpace>(spec, np);
        std::vector<ManyBodyOperator> ops;
        for (int n = 0; n <= np; ++n) ops.emplace_back(spec, space->sectors[n]);
        QuantumState psi0 = prepare_fock_state(space->sectors[np], initial_occupation(c));
        DensityMatrix rho0 = density_from_state(space, psi0);
        auto res = evolve_lindblad([&](int n, double t) { return ops[n].assemble(params(t), drive.j_hop); }, rho0,
                                   noise_of(c), t_final, opt);
        out.trace = std::move(res.trace);
    }
    out.summary = summarize(c, out.trace);
    return out;
}

BandsOutput compute_scenario_bands(const ScenarioConfig& c) {
    validate(c);
    if (!c.is_bands()) config_error("not a band scenario");
    DriveProtocol drive = drive_of(c);
    BlochGrid grid{c.grid_k, c.grid_t, c.period_us};
    BandsOutput out;
    json s;
    s["scenario"] = c.scenario;
    s["stagger"] = stagger_name(c.stagger);
    s["grid"] = {{"n_k", c.grid_k}, {"n_t", c.grid_t}};
    if (c.scenario == "bands_fig1e") {
        out.single = compute_bands(grid, [&](double k, double t) { return bloch_hamiltonian_single(k, t, drive, c.stagger); });
        s["chern"] = out.single.chern;
        s["gap_min_mhz"] = to_mhz(out.single.gap_min);
    } else {
        ComOptions opt;
        opt.substeps = c.track_substeps;
        out.com = com_band_structure(lattice_of(c), drive, 2, c.ring_cells, grid, opt);
        json bands = json::array();
        std::vector<int> bound;
        for (const auto& b : out.com.bands) {
            bands.push_back({{"seed", b.seed},
                             {"label", label_name(b.label)},
                             {"chern", b.chern},
                             {"chern_raw", b.chern_raw},
                             {"min_overlap", b.min_overlap},
                             {"min_gap_mhz", to_mhz(b.min_gap)}});
            if (b.label == ComBandLabel::BoundState) bound.push_back(b.chern);
            if (b.label == ComBandLabel::ResonantIsolated) s["isolated_band_chern"] = b.chern;
        }
        s["bands"] = bands;
        s["bound_state_cherns"] = bound;
        s["ring_cells"] = c.ring_cells;
        s["gap_min_mhz"] = to_mhz(out.com.gap_min);
    }
    out.summary = s;
    return out;
}

namespace {

class Manifest {
public:
    Manifest(fs::path dir, const ScenarioConfig& c) : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) fail(Error::Kind::Io, "cannot create " + dir_.string() + ": " + ec.message());
        doc_["schema"] = "tpump-manifest/1";
        doc_["status"] = "running";
        doc_["software"] = {{"name", "tpump"}, {"version", kVersion}};
        doc_["scenario"] = c.scenario;
        doc_["parameters"] = to_json(c);
        std::vector<int> sites;
        for (int s = c.first_site; s <= c.last_site; ++s) sites.push_back(s);
        doc_["original_sites"] = sites;
        doc_["units"] = {{"frequency", "MHz in files, rad/us internally"}, {"time", "us"}, {"length", "d"}};
        doc_["conventions"] = {{"stagger", stagger_name(c.stagger)},
                               {"floquet_zone", "(-w/2, w/2]"},
                               {"gamma_normalization", "per time slice maximum"},
                               {"frames", c.frames}};
        doc_["integrator"] = {{"unitary", "exponential midpoint, Taylor action"},
                              {"lindblad", "Strang split: unitary half steps around RK4 dissipator"},
                              {"max_phase_per_step", 0.1}};
        doc_["tolerances"] = {{"norm_drift_per_step", 1e-10}, {"hermiticity", 1e-12}, {"track_overlap", 0.5}};
        doc_["seeds"] = {{"base_seed", c.seed}, {"prng", "mt19937_64, 53-bit mantissa"}};
        flush();
    }
    const fs::path& dir() const { return dir_; }
    void add(const std::string& rel, const std::string& content) {
        write_text(dir_ / rel, content);
        files_.push_back(rel);
    }
    void add_existing(const std::string& rel) { files_.push_back(rel); }
    void set(const std::string& key, json v) { doc_[key] = std::move(v); }
    json finalize(const json& summary) {
        add("summary.json", summary.dump(2) + "\n");
        json files = json::array();
        for (const auto& f : files_)
            files.push_back({{"path", f}, {"sha256", sha256_file(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
        doc_["files"] = files;
        doc_["status"] = "complete";
        doc_["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        flush();
        return doc_;
    }

private:
    void flush() { write_text(dir_ / "manifest.json", doc_.dump(2) + "\n"); }
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    json doc_;
    std::vector<std::string> files_;
};

fs::path out_dir(const ScenarioConfig& c) { return c.output_dir.empty() ? fs::path("out") / c.scenario : fs::path(c.output_dir); }

void emit_trace(Manifest& m, const ScenarioConfig& c, const ObservableTrace& tr) {
    std::ostringstream pop, cor, com;
    pop << "time,site,P0,P1,P2\n";
    cor << "time,i,j,gamma\n";
    com << "time,com,loschmidt\n";
    const int n = tr.n_sites;
    Eigen::MatrixXd p1(n, tr.frames.size()), p2(n, tr.frames.size());
    for (size_t f = 0; f < tr.frames.size(); ++f) {
        const Frame& fr = tr.frames[f];
        for (int a = 0; a < n; ++a) {
            pop << fmt_num(fr.time) << ',' << c.first_site + a << ',' << fmt_num(fr.populations(a, 0)) << ','
                << fmt_num(fr.populations(a, 1)) << ',' << fmt_num(fr.populations(a, 2)) << '\n';
            p1(a, f) = fr.populations(a, 1);
            p2(a, f) = fr.populations(a, 2);
        }
        for (int a = 0; a < fr.gamma.rows(); ++a)
            for (int b = 0; b < fr.gamma.cols(); ++b)
                cor << fmt_num(fr.time) << ',' << c.first_site + a << ',' << c.first_site + b << ','
                    << fmt_num(fr.gamma(a, b)) << '\n';
        com << fmt_num(fr.time) << ',' << fmt_num(fr.com) << ',' << fmt_num(fr.loschmidt) << '\n';
    }
    m.add("populations.csv", pop.str());
    m.add("correlations.csv", cor.str());
    m.add("com.csv", com.str());
    emit_heatmap(p1, m.dir() / "heatmap_p1.svg", "P(n=1) site x time");
    m.add_existing("heatmap_p1.svg");
    m.add_existing("heatmap_p1.csv");
    if (c.n_particles() == 2) {
        emit_heatmap(p2, m.dir() / "heatmap_p2.svg", "P(n=2) site x time");
        m.add_existing("heatmap_p2.svg");
        m.add_existing("heatmap_p2.csv");
        const Frame& mid = tr.frames[frame_at(tr, 0.5 * c.period_us)];
        if (mid.gamma.maxCoeff() > 0) {
            emit_heatmap(normalized_correlations(mid.gamma), m.dir() / "gamma_half_period.svg", "Gamma/Gamma_max at T/2");
            m.add_existing("gamma_half_period.svg");
            m.add_existing("gamma_half_period.csv");
        }
    }
}

// open-chain instantaneous spectrum with weights on the edge doublons
void emit_edge_spectrum(Manifest& m, const ScenarioConfig& c) {
    LatticeSpec spec = lattice_of(c);
    DriveProtocol drive = drive_of(c);
    auto basis = std::make_shared<const FockBasis>(build_fock_basis(spec, c.n_particles()));
    ManyBodyOperator op(spec, basis);
    std::vector<std::uint8_t> left(spec.n_sites, 0), right(spec.n_sites, 0);
    int il = -1, ir = -1;
    if (c.n_particles() == 2 && c.local_dim == 3) {
        left[0] = 2;
        right[spec.n_sites - 1] = 2;
        il = basis->find(left);
        ir = basis->find(right);
    }
    std::ostringstream s;
    s << "time,level,energy_mhz,weight_first_edge,weight_last_edge\n";
    const int nt = 81;
    for (int q = 0; q < nt; ++q) {
        double t = c.period_us * q / (nt - 1);
        Eigen::SelfAdjointEigenSolver<CMat> es(op.assemble(instantaneous_params(drive, t, spec.n_sites), drive.j_hop).to_dense());
        for (int l = 0; l < es.eigenvalues().size(); ++l) {
            double wl = il >= 0 ? std::norm(es.eigenvectors()(il, l)) : 0.0;
            double wr = ir >= 0 ? std::norm(es.eigenvectors()(ir, l)) : 0.0;
            s << fmt_num(t) << ',' << l << ',' << fmt_num(to_mhz(es.eigenvalues()[l])) << ',' << fmt_num(wl) << ','
              << fmt_num(wr) << '\n';
        }
    }
    m.add("edge_spectrum.csv", s.str());
}

}  // namespace

RunOutcome run_bands(const ScenarioConfig& c) {
    validate(c);
    if (!c.is_bands()) config_error("'" + c.scenario + "' is not a band scenario");
    Manifest m(out_dir(c), c);
    BandsOutput b = compute_scenario_bands(c);
    std::ostringstream s;
    if (c.scenario == "bands_fig1e") {
        const BandResult& r = b.single;
        s << "k_index,t_index,band,energy,curvature\n";
        Eigen::MatrixXd curv(r.n_t, r.n_k);
        for (int i = 0; i < r.n_k; ++i)
            for (int j = 0; j < r.n_t; ++j) {
                for (int band = 0; band < r.n_bands; ++band)
                    s << i << ',' << j << ',' << band << ',' << fmt_num(to_mhz(r.energy(i, j, band))) << ','
                      << fmt_num(r.curv(i, j, band)) << '\n';
                curv(j, i) = r.curv(i, j, 0);
            }
        m.add("bands.csv", s.str());
        emit_heatmap(curv, m.dir() / "curvature_band0.svg", "Berry curvature, lower band (t x k)");
        m.add_existing("curvature_band0.svg");
        m.add_existing("curvature_band0.csv");
    } else {
        const ComBandResult& r = b.com;
        s << "k_index,t_index,band,energy,curvature,double_occupancy\n";
        for (size_t q = 0; q < r.bands.size(); ++q) {
            const ComBand& band = r.bands[q];
            for (int i = 0; i < r.n_theta; ++i)
                for (int j = 0; j < r.n_t; ++j)
                    s << i << ',' << j << ',' << band.seed << ',' << fmt_num(to_mhz(band.energies[i * r.n_t + j])) << ','
                      << fmt_num(band.curvature.empty() ? 0.0 : band.curvature[i * r.n_t + j]) << ','
                      << fmt_num(band.double_occupancy[i * r.n_t + j]) << '\n';
        }
        m.add("com_bands.csv", s.str());
        // full ring spectrum at zero twist over one period
        std::ostringstream sp;
        sp << "t_index,level,energy_mhz\n";
        LatticeSpec spec = lattice_of(c);
        DriveProtocol drive = drive_of(c);
        for (int j = 0; j < c.grid_t; ++j) {
            Eigen::VectorXd e = ring_spectrum(spec, drive, c.ring_cells, 0.0, c.period_us * j / c.grid_t);
            for (int l = 0; l < e.size(); ++l) sp << j << ',' << l << ',' << fmt_num(to_mhz(e[l])) << '\n';
        }
        m.add("ring_spectrum.csv", sp.str());
    }
    RunOutcome out;
    out.summary = b.summary;
    out.manifest = m.finalize(b.summary);
    out.dir = m.dir();
    return out;
}

RunOutcome run_scenario(const ScenarioConfig& c) {
    validate(c);
    if (c.is_sweep()) config_error("'" + c.scenario + "' is a sweep; use the sweep command");
    if (c.is_bands()) return run_bands(c);
    Manifest m(out_dir(c), c);
    DynamicsOutput d = simulate(c);
    emit_trace(m, c, d.trace);
    if (c.kind == DriveKind::EdgePump) emit_edge_spectrum(m, c);
    RunOutcome out;
    out.summary = d.summary;
    out.manifest = m.finalize(d.summary);
    out.dir = m.dir();
    return out;
}

json sweep_point(const ScenarioConfig& pc, std::uint64_t point_seed, const fs::path* dir) {
    ScenarioConfig c = pc;
    c.seed = point_seed;
    json row;
    auto write = [&](const std::string& name, const std::string& body) {
        if (dir) write_text(*dir / name, body);
    };
    if (c.scenario == "sweep_period") {
        ScenarioConfig ideal = c, noisy = c;
        ideal.noise = false;
        noisy.noise = true;
        auto a = simulate(ideal);
        auto b = simulate(noisy);
        row["delta_x_ideal"] = a.summary["delta_x_over_d"];
        row["delta_x_noisy"] = b.summary["delta_x_over_d"];
        row["trace_drift_noisy"] = b.trace.max_norm_drift;
        std::ostringstream s;
        s << "time,com_ideal,com_noisy\n";
        for (size_t f = 0; f < a.trace.frames.size(); ++f)
            s << fmt_num(a.trace.frames[f].time) << ',' << fmt_num(a.trace.frames[f].com) << ','
              << fmt_num(b.trace.frames[f].com) << '\n';
        write("com.csv", s.str());
    } else if (c.scenario == "sweep_offset") {
        auto a = simulate(c);
        for (double e : c.echo_cycles) row["echo_" + fmt_num(e) + "T"] = a.summary["loschmidt_at_cycles"][fmt_num(e)];
        row["delta_x_over_d"] = a.summary["delta_x_over_d"];
        std::ostringstream s;
        s << "time,com,loschmidt\n";
        for (const auto& f : a.trace.frames) s << fmt_num(f.time) << ',' << fmt_num(f.com) << ',' << fmt_num(f.loschmidt) << '\n';
        write("com.csv", s.str());
    } else if (c.scenario == "sweep_disorder") {
        const int R = c.realizations;
        std::vector<std::vector<double>> echoes(c.echo_cycles.size());
        Eigen::MatrixXd p1;
        double ipr = 0.0;
        for (int r = 0; r < R; ++r) {
            ScenarioConfig rc = c;
            rc.seed = point_seed ^ (static_cast<std::uint64_t>(r + 1) * kGolden);
            auto a = simulate(rc);
            for (size_t e = 0; e < c.echo_cycles.size(); ++e)
                echoes[e].push_back(a.summary["loschmidt_at_cycles"][fmt_num(c.echo_cycles[e])].get<double>());
            const auto& fr = a.trace.frames;
            if (p1.size() == 0) p1 = Eigen::MatrixXd::Zero(a.trace.n_sites, fr.size());
            for (size_t f = 0; f < fr.size(); ++f) p1.col(f) += fr[f].populations.col(1) / R;
            ipr += fr.back().populations.col(1).array().square().sum() / R;
        }
        for (size_t e = 0; e < c.echo_cycles.size(); ++e) {
            const auto& v = echoes[e];
            double mean = 0.0, var = 0.0;
            for (double x : v) mean += x / v.size();
            for (double x : v) var += (x - mean) * (x - mean);
            double sem = v.size() > 1 ? std::sqrt(var / (v.size() - 1) / v.size()) : 0.0;
            row["echo_" + fmt_num(c.echo_cycles[e]) + "T_mean"] = mean;
            row["echo_" + fmt_num(c.echo_cycles[e]) + "T_sem"] = sem;
        }
        row["final_ipr_mean"] = ipr;
        row["realizations"] = R;
        if (dir) emit_heatmap(p1, *dir / "population_map_p1.svg", "mean P(n=1) site x time");
    } else {
        auto a = simulate(c);
        row = a.summary;
    }
    return row;
}

RunOutcome run_sweep(const ScenarioConfig& c, int workers) {
    validate(c);
    if (c.is_bands()) config_error("band scenarios cannot be swept");
    if (c.axes.empty()) config_error("sweep needs at least one axis");
    const auto pts = sweep_points(c.axes);
    Manifest m(out_dir(c), c);
    workers = std::max(1, workers);
    std::vector<json> rows(pts.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= pts.size()) return;
            ScenarioConfig pc = c;
            json row;
            row["point"] = i;
            for (size_t a = 0; a < c.axes.size(); ++a) {
                apply_axis(pc, c.axes[a].name, pts[i][a]);
                row[c.axes[a].name] = pts[i][a];
            }
            std::uint64_t seed = c.seed ^ static_cast<std::uint64_t>(i);
            row["seed"] = seed;
            char name[32];
            std::snprintf(name, sizeof name, "point_%04zu", i);
            fs::path dir = m.dir() / name;
            try {
                validate(pc);
                json r = sweep_point(pc, seed, &dir);
                for (auto it = r.begin(); it != r.end(); ++it)
                    if (!row.contains(it.key())) row[it.key()] = it.value();
                row["status"] = "ok";
                write_text(dir / "point.json", row.dump(2) + "\n");
            } catch (const std::exception& e) {
                row["status"] = "failed";
                row["error"] = e.what();
            }
            rows[i] = std::move(row);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers && w < static_cast<int>(pts.size()); ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // columns: point, axes, seed, status, then metric keys in first-seen order
    std::vector<std::string> cols{"point"};
    for (const auto& a : c.axes) cols.push_back(a.name);
    cols.push_back("seed");
    cols.push_back("status");
    for (const auto& r : rows)
        for (auto it = r.begin(); it != r.end(); ++it)
            if (it.value().is_number() && std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    std::ostringstream csv;
    for (size_t k = 0; k < cols.size(); ++k) csv << (k ? "," : "") << cols[k];
    csv << '\n';
    int failed = 0;
    for (const auto& r : rows) {
        if (r.value("status", "") != "ok") ++failed;
        for (size_t k = 0; k < cols.size(); ++k) {
            csv << (k ? "," : "");
            if (!r.contains(cols[k])) continue;
            const json& v = r[cols[k]];
            if (v.is_number_float())
                csv << fmt_num(v.get<double>());
            else if (v.is_number())
                csv << v.dump();
            else if (v.is_string())
                csv << v.get<std::string>();
        }
        csv << '\n';
    }
    m.add("sweep.csv", csv.str());
    json failures = json::array();
    for (const auto& r : rows)
        if (r.value("status", "") != "ok") failures.push_back({{"point", r["point"]}, {"error", r.value("error", "")}});
    m.set("point_failures", failures);
    m.set("workers", workers);
    json summary;
    summary["scenario"] = c.scenario;
    summary["points"] = rows;
    summary["n_points"] = rows.size();
    summary["n_failed"] = failed;
    RunOutcome out;
    out.summary = summary;
    out.manifest = m.finalize(summary);
    out.dir = m.dir();
    return out;
}

}  // namespace tp
