#include "tpump.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            o += '\\';
            o += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char b[8];
            std::snprintf(b, sizeof b, "\\u%04x", c);
            o += b;
        } else {
            o += c;
        }
    }
    return o;
}

int report_error(tp_status s) {
    std::printf("{\"status\": \"error\", \"code\": \"%s\", \"message\": \"%s\"}\n", tp_status_name(s),
                escape(tp_last_error()).c_str());
    return 10 + static_cast<int>(s);
}

struct Options {
    std::string config;
    std::string out;
    int workers = 1;
    long long seed = -1;
    std::string sites;
};

tp_status load(const Options& o, tp_config** cfg) {
    tp_status s = tp_config_from_file(o.config.c_str(), cfg);
    if (s != TP_OK) return s;
    if (!o.out.empty() && (s = tp_config_set_output_dir(*cfg, o.out.c_str())) != TP_OK) return s;
    if (o.seed >= 0 && (s = tp_config_set_seed(*cfg, static_cast<uint64_t>(o.seed))) != TP_OK) return s;
    if (!o.sites.empty()) {
        int a = 0, b = 0;
        char tail = 0;
        if (std::sscanf(o.sites.c_str(), "%d:%d%c", &a, &b, &tail) != 2) {
            std::printf("{\"status\": \"error\", \"code\": \"invalid_argument\", \"message\": \"--sites wants FIRST:LAST\"}\n");
            std::exit(10 + TP_E_INVALID_ARGUMENT);
        }
        if ((s = tp_config_set_sites(*cfg, a, b)) != TP_OK) return s;
    }
    return tp_config_validate(*cfg);
}

int execute(const std::string& cmd, const Options& o) {
    tp_config* cfg = nullptr;
    tp_status s = load(o, &cfg);
    if (s != TP_OK) {
        tp_config_destroy(cfg);
        return report_error(s);
    }
    if (cmd == "validate") {
        char* text = nullptr;
        s = tp_config_resolved_json(cfg, &text);
        tp_config_destroy(cfg);
        if (s != TP_OK) return report_error(s);
        std::printf("{\"status\": \"ok\", \"config\": %s}\n", text);
        tp_string_free(text);
        return 0;
    }
    tp_result* r = nullptr;
    if (cmd == "run")
        s = tp_run(cfg, &r);
    else if (cmd == "sweep")
        s = tp_sweep(cfg, o.workers, &r);
    else
        s = tp_bands(cfg, &r);
    tp_config_destroy(cfg);
    if (s != TP_OK) return report_error(s);
    char* summary = nullptr;
    s = tp_result_summary_json(r, &summary);
    if (s != TP_OK) {
        tp_result_destroy(r);
        return report_error(s);
    }
    std::printf("{\"status\": \"ok\", \"output_dir\": \"%s\", \"summary\": %s}\n", escape(tp_result_output_dir(r)).c_str(),
                summary);
    tp_string_free(summary);
    tp_result_destroy(r);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tpump: driven Rice-Mele / Bose-Hubbard pumping toolkit"};
    app.set_version_flag("--version", tp_version());
    app.require_subcommand(1);
    Options o;
    app.add_option("--out", o.out, "output directory (overrides the config)");
    app.add_option("--seed", o.seed, "base seed (overrides the config)")->check(CLI::NonNegativeNumber);
    app.add_option("--sites", o.sites, "lattice window FIRST:LAST in original indices");
    app.add_option("--workers", o.workers, "sweep worker threads")->check(CLI::PositiveNumber);
    for (const char* name : {"run", "sweep", "bands", "validate"}) {
        auto* sub = app.add_subcommand(name, std::string(name) + " a scenario config");
        sub->add_option("config", o.config, "JSON config file")->required();
        sub->fallthrough();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return execute(app.get_subcommands().front()->get_name(), o);
}
