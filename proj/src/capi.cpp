#include "tpump.h"

#include "tpump/scenarios.hpp"

#include <cstdlib>
#include <cstring>
#include <new>

struct tp_config {
    tp::ScenarioConfig cfg;
};

struct tp_result {
    tp::json summary;
    tp::json manifest;
    std::string dir;
    std::vector<double> times, com;
};

namespace {

thread_local std::string g_last_error;

tp_status code_of(tp::Error::Kind k) {
    using K = tp::Error::Kind;
    switch (k) {
        case K::InvalidArgument: return TP_E_INVALID_ARGUMENT;
        case K::Config: return TP_E_CONFIG;
        case K::GapClosure: return TP_E_GAP_CLOSURE;
        case K::Continuity: return TP_E_CONTINUITY;
        case K::StepTooLarge: return TP_E_STEP_TOO_LARGE;
        case K::Io: return TP_E_IO;
        case K::Internal: return TP_E_INTERNAL;
    }
    return TP_E_INTERNAL;
}

template <class F>
tp_status guard(F&& f) {
    g_last_error.clear();
    try {
        f();
        return TP_OK;
    } catch (const tp::Error& e) {
        g_last_error = e.what();
        return code_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return TP_E_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TP_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TP_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return TP_E_INTERNAL;
    }
}

tp_status bad_arg(const char* m) {
    g_last_error = m;
    return TP_E_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

tp_result* wrap(const tp::RunOutcome& o) {
    auto* r = new tp_result;
    r->summary = o.summary;
    r->manifest = o.manifest;
    r->dir = o.dir.string();
    return r;
}

}  // namespace

extern "C" {

const char* tp_version(void) { return tp::kVersion; }

const char* tp_status_name(tp_status s) {
    switch (s) {
        case TP_OK: return "ok";
        case TP_E_INVALID_ARGUMENT: return "invalid_argument";
        case TP_E_CONFIG: return "config_error";
        case TP_E_GAP_CLOSURE: return "gap_closure";
        case TP_E_CONTINUITY: return "continuity_failure";
        case TP_E_STEP_TOO_LARGE: return "step_too_large";
        case TP_E_IO: return "io_error";
        case TP_E_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* tp_last_error(void) { return g_last_error.c_str(); }

void tp_string_free(char* s) { std::free(s); }

tp_status tp_config_from_file(const char* path, tp_config** out) {
    if (!path || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = new tp_config{tp::load_config(path)}; });
}

tp_status tp_config_from_json(const char* text, tp_config** out) {
    if (!text || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] {
        tp::json doc;
        try {
            doc = tp::json::parse(text);
        } catch (const tp::json::exception& e) {
            tp::fail(tp::Error::Kind::Config, std::string("cannot parse config: ") + e.what());
        }
        *out = new tp_config{tp::parse_config(doc)};
    });
}

tp_status tp_config_default(const char* scenario, tp_config** out) {
    if (!scenario || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = new tp_config{tp::default_config(scenario)}; });
}

void tp_config_destroy(tp_config* cfg) { delete cfg; }

tp_status tp_config_set_output_dir(tp_config* cfg, const char* dir) {
    if (!cfg || !dir) return bad_arg("null argument");
    return guard([&] { cfg->cfg.output_dir = dir; });
}

tp_status tp_config_set_seed(tp_config* cfg, uint64_t seed) {
    if (!cfg) return bad_arg("null argument");
    cfg->cfg.seed = seed;
    return TP_OK;
}

tp_status tp_config_set_sites(tp_config* cfg, int first, int last) {
    if (!cfg) return bad_arg("null argument");
    return guard([&] {
        tp::ScenarioConfig c = cfg->cfg;
        c.first_site = first;
        c.last_site = last;
        tp::validate(c);
        cfg->cfg = c;
    });
}

tp_status tp_config_validate(const tp_config* cfg) {
    if (!cfg) return bad_arg("null argument");
    return guard([&] { tp::validate(cfg->cfg); });
}

tp_status tp_config_resolved_json(const tp_config* cfg, char** out) {
    if (!cfg || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = dup(tp::to_json(cfg->cfg).dump(2)); });
}

tp_status tp_run(const tp_config* cfg, tp_result** out) {
    if (!cfg || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = wrap(tp::run_scenario(cfg->cfg)); });
}

tp_status tp_sweep(const tp_config* cfg, int workers, tp_result** out) {
    if (!cfg || !out) return bad_arg("null argument");
    if (workers < 1) return bad_arg("workers must be >= 1");
    *out = nullptr;
    return guard([&] { *out = wrap(tp::run_sweep(cfg->cfg, workers)); });
}

tp_status tp_bands(const tp_config* cfg, tp_result** out) {
    if (!cfg || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = wrap(tp::run_bands(cfg->cfg)); });
}

tp_status tp_simulate(const tp_config* cfg, tp_result** out) {
    if (!cfg || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] {
        tp::DynamicsOutput d = tp::simulate(cfg->cfg);
        auto* r = new tp_result;
        r->summary = d.summary;
        r->times = d.trace.times();
        r->com = d.trace.com();
        *out = r;
    });
}

tp_status tp_result_summary_json(const tp_result* r, char** out) {
    if (!r || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = dup(r->summary.dump(2)); });
}

tp_status tp_result_manifest_json(const tp_result* r, char** out) {
    if (!r || !out) return bad_arg("null argument");
    *out = nullptr;
    return guard([&] { *out = dup(r->manifest.is_null() ? std::string("{}") : r->manifest.dump(2)); });
}

const char* tp_result_output_dir(const tp_result* r) { return r ? r->dir.c_str() : ""; }

tp_status tp_result_com(const tp_result* r, const double** times, const double** com, size_t* n) {
    if (!r || !times || !com || !n) return bad_arg("null argument");
    if (r->com.empty()) return bad_arg("result has no trajectory");
    *times = r->times.data();
    *com = r->com.data();
    *n = r->com.size();
    return TP_OK;
}

void tp_result_destroy(tp_result* r) { delete r; }

tp_status tp_chern_single(double j_mhz, double delta0_mhz, double capdelta0_mhz, double period_us, double offset_r,
                          int stagger, int n_k, int n_t, int chern_out[2]) {
    if (!chern_out) return bad_arg("null argument");
    if (stagger != 0 && stagger != 1) return bad_arg("stagger must be 0 or 1");
    return guard([&] {
        tp::DriveProtocol d;
        d.j_hop = tp::mhz(j_mhz);
        d.delta0 = tp::mhz(delta0_mhz);
        d.capdelta0 = tp::mhz(capdelta0_mhz);
        d.period = period_us;
        d.offset_r = offset_r;
        d.validate();
        tp::Stagger s = stagger ? tp::Stagger::EvenPositive : tp::Stagger::OddPositive;
        tp::BlochGrid g{n_k, n_t, period_us};
        tp::BandResult b =
            tp::compute_bands(g, [&](double k, double t) { return tp::bloch_hamiltonian_single(k, t, d, s); });
        chern_out[0] = b.chern[0];
        chern_out[1] = b.chern[1];
    });
}

}  // extern "C"
