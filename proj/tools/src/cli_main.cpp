#include "rbto/error.hpp"
#include "rbto/parallel.hpp"
#include "rbto_cli/artifacts.hpp"
#include "rbto_cli/run.hpp"

#include <CLI11.hpp>

#include <map>
#include <mutex>
#include <ostream>

namespace rbto::cli {

using nlohmann::json;

namespace {

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
};

void add_config_flags(Subcommand& s) {
    s.app->add_option("--config", s.config_path, "JSON config file (keys as below, snake_case)");
    for (const auto& key : config_keys())
        s.app->add_option("--" + kebab(key), s.values[key], "overrides config key " + key);
}

// Config file first, then flags on top.
json collect(const Subcommand& s) {
    json user = s.config_path.empty() ? json::object() : load_config_file(s.config_path);
    if (!user.is_object()) throw Error(ErrorCode::Config, "config file must hold a JSON object");
    for (const auto& key : config_keys())
        if (s.app->get_option("--" + kebab(key))->count() > 0) user[key] = parse_flag_value(key, s.values.at(key));
    return user;
}

struct GridAxis {
    std::string key;
    std::vector<json> values;
};

GridAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw Error(ErrorCode::Config, "--grid expects key=v1,v2,..., got '" + text + "'");
    GridAxis axis;
    axis.key = text.substr(0, eq);
    std::replace(axis.key.begin(), axis.key.end(), '-', '_');
    if (axis.key == "output") throw Error(ErrorCode::Config, "--grid cannot vary the output root");
    std::size_t start = eq + 1;
    while (true) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        axis.values.push_back(parse_flag_value(axis.key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return axis;
}

int run_sweep(Mode mode, const json& base, const std::vector<std::string>& grid_args, int jobs, std::ostream& out,
              std::ostream& err) {
    std::vector<GridAxis> axes;
    for (const auto& g : grid_args) axes.push_back(parse_axis(g));
    std::vector<json> overrides{json::object()};
    for (const auto& axis : axes) {
        std::vector<json> next;
        for (const auto& o : overrides)
            for (const auto& v : axis.values) {
                json e = o;
                e[axis.key] = v;
                next.push_back(std::move(e));
            }
        overrides = std::move(next);
    }
    std::vector<RunConfig> configs;
    for (const auto& o : overrides) {
        json user = base;
        user.update(o);
        configs.push_back(resolve_config(user));
    }

    std::string joined;
    for (const auto& c : configs) joined += config_hash(c, mode);
    RunConfig tag = configs.front();
    tag.design_csv = joined;
    const std::filesystem::path dir = output_root(configs.front()) / ("sweep-" + config_hash(tag, mode));
    std::filesystem::create_directories(dir);

    std::vector<json> entries(configs.size());
    std::mutex io;
    const int workers = jobs > 0 ? jobs : default_workers();
    parallel_for(static_cast<int>(configs.size()), workers, [&](int, int i) {
        const auto k = static_cast<std::size_t>(i);
        json e{{"overrides", overrides[k]}};
        try {
            const RunOutput r = execute(mode, configs[k]);
            e["directory"] = r.directory.string();
            e["status"] = "ok";
            if (r.log.contains("runs")) {
                json vf = json::array();
                for (const auto& run : r.log["runs"]) vf.push_back(run["volume_fraction"]);
                e["volume_fraction"] = vf;
            } else if (r.log.contains("dto")) {
                e["volume_fraction"] = r.log["dto"]["volume_fraction"];
            }
        } catch (const std::exception& ex) {
            e["directory"] = run_directory(configs[k], mode).string();
            e["status"] = "failed";
            e.update(error_record(ex));
        }
        std::lock_guard<std::mutex> lock(io);
        err << "[sweep] " << (i + 1) << "/" << configs.size() << " " << e["status"].get<std::string>() << " "
            << e["directory"].get<std::string>() << '\n';
        entries[k] = std::move(e);
    });
    int failed = 0;
    for (const auto& e : entries) failed += e["status"] == "failed";
    write_json(dir / "summary.json", {{"mode", to_string(mode)}, {"runs", entries}, {"failed", failed}});
    out << dir.string() << '\n';
    return failed == 0 ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reliability-based topology optimization under random-field Young's modulus"};
    app.require_subcommand(1);

    Subcommand dto{app.add_subcommand("dto", "deterministic design at the mean modulus")};
    Subcommand rbto{app.add_subcommand("rbto", "SORA reliability-based design, one per beta")};
    Subcommand verify{app.add_subcommand("verify", "Monte Carlo check of an RBTO design or a density CSV")};
    Subcommand sweep{app.add_subcommand("sweep", "independent runs over a parameter grid")};
    std::string sweep_mode = "rbto";
    std::vector<std::string> grid;
    int jobs = 0;
    for (Subcommand* s : {&dto, &rbto, &verify, &sweep}) add_config_flags(*s);
    sweep.app->add_option("--mode", sweep_mode, "dto, rbto or verify")->capture_default_str();
    sweep.app->add_option("--grid", grid, "key=v1,v2,... (repeatable; the cartesian product is run)");
    sweep.app->add_option("--jobs", jobs, "concurrent runs (0: hardware concurrency)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (sweep.app->parsed()) return run_sweep(mode_from_string(sweep_mode), collect(sweep), grid, jobs, out, err);
        const Subcommand& s = dto.app->parsed() ? dto : rbto.app->parsed() ? rbto : verify;
        const Mode mode = mode_from_string(s.app->get_name());
        const RunConfig config = resolve_config(collect(s));
        const RunOutput r = execute(mode, config, &err);
        out << r.directory.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << error_record(e).dump() << '\n';
        return exit_code(e);
    }
}

} // namespace rbto::cli
