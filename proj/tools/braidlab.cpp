// braidlab command line: verify | effective | holonomy | braid | tomography | sweep | export
#include "braidlab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace braidlab;

namespace {

int worker_threads()
{
    const char* env = std::getenv("BRAIDLAB_THREADS");
    if (!env || !*env) return std::max(1u, std::thread::hardware_concurrency());
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw ConfigError("BRAIDLAB_THREADS must be an integer in 1..1024");
    return static_cast<int>(v);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"braidlab: Majorana clock-arm braiding on small spin models"};
    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    bool no_stamp = false;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_path, "write the report here instead of stdout");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--no-header-timestamp", no_stamp, "omit the timestamp line and zero wall_time, for byte-identical reruns");
    app.require_subcommand(0, 1);
    app.fallthrough(); // flags may follow the subcommand
    for (const auto& [name, op] : operation_names()) app.add_subcommand(name, "run " + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config_text(read_file(config_path));
        if (seed) cfg.seed = *seed;

        std::optional<Operation> op = cfg.operation;
        if (!app.get_subcommands().empty()) {
            Operation sub = parse_operation(app.get_subcommands().front()->get_name());
            if (op && *op != sub) throw ConfigError("config operation '" + to_string(*op) + "' conflicts with subcommand '" + to_string(sub) + "'");
            op = sub;
        }
        if (!op) throw ConfigError("no operation: give a subcommand or set 'operation' in the config");

        std::string fmt = !format.empty() ? format : !cfg.output_format.empty() ? cfg.output_format : default_format(*op);
        RunOptions opts{worker_threads(), !no_stamp};
        Outcome res = run_experiment(cfg, *op, fmt, opts);

        std::string path = !out_path.empty() ? out_path : cfg.output_path;
        if (path.empty()) {
            std::cout << res.text << std::flush;
        } else {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw ConfigError("cannot write '" + path + "'");
            out << res.text;
            if (!out) throw ConfigError("write to '" + path + "' failed");
        }
        if (res.exit_code != 0) std::cerr << "braidlab: " << to_string(*op) << " reported failures\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "braidlab: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "braidlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "braidlab: error: " << e.what() << "\n";
        return 1;
    }
}
