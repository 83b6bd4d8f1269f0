#include "braidlab/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace braidlab;
namespace fs = std::filesystem;

namespace {

RunOptions quiet() { return {1, false}; }

std::string temp_file(const std::string& name, const std::string& content)
{
    fs::path p = fs::temp_directory_path() / ("braidlab_test_" + std::to_string(::getpid()) + "_" + name);
    std::ofstream(p) << content;
    return p.string();
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cli(const std::string& args)
{
    std::string cmd = std::string(BRAIDLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(parse_config_text("{\"sytem\": \"four_qubit\"}"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"braid\": {\"gate\": \"S\", \"colour\": 1}}"), ConfigError);
    EXPECT_THROW(parse_config_text("{not json"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"braid\": {\"delta_tilde\": -1}}"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"braid\": {\"gate\": \"Rxx\"}}"), ConfigError); // middle arm needs ten qubits
    EXPECT_THROW(parse_config_text("{\"noise\": {\"model\": \"depolarizing\"}}"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"seed\": -3}"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"operation\": \"dance\"}"), ConfigError);
    EXPECT_THROW(parse_config_text("{\"sweep\": {\"delta_tilde\": {\"start\": 2, \"stop\": 1, \"step\": 0.1}}}"), ConfigError);
}

TEST(Config, ParsesAFullConfig)
{
    ExperimentConfig c = parse_config_text(R"({
      "system": {"kind": "ten_qubit", "middle": {"magnitude": 1.0, "polar": 0.0, "azimuth": 0.0}},
      "operation": "tomography",
      "braid": {"arm": "middle", "target_phi": 1.0, "delta_tilde": 3.0, "N_equator": 5},
      "noise": {"model": "depolarizing", "p": 0.005},
      "shots": 8192, "seed": 17,
      "output": {"path": "out.json", "format": "json"},
      "sweep": {"gates": ["Rxx", {"gate": "S"}], "delta_tilde": [2.0, 3.0], "N_equator": [3, 5]},
      "holonomy": {"arm": "right", "target_phi": 0.5, "steps": 100},
      "tomography": {"gates": ["Rxx", {"gate": "S1", "delta_tilde": 4.0}], "positivity_projection": true},
      "verify": {"extra_conserved": ["W3"], "random_angles": 3, "grid": 3},
      "export": {"format": "qasm"}
    })");
    EXPECT_EQ(c.system.kind, SystemKind::TenQubit);
    EXPECT_EQ(*c.operation, Operation::Tomography);
    EXPECT_EQ(c.braid.target.arm, Arm::Middle);
    EXPECT_EQ(c.braid.n_equator, 5);
    EXPECT_DOUBLE_EQ(c.noise.depolarizing, 0.005);
    EXPECT_EQ(*c.shots, 8192);
    EXPECT_EQ(c.seed, 17u);
    EXPECT_EQ(c.sweep.gates.size(), 2u);
    EXPECT_EQ(c.tomography.gates[1].target.name, "S1");
    EXPECT_DOUBLE_EQ(c.tomography.gates[1].delta_tilde, 4.0);
    EXPECT_EQ(c.tomography.gates[1].n_equator, 5); // inherited from braid
    EXPECT_EQ(c.export_format, CircuitFormat::Qasm);
    EXPECT_EQ(c.verify.extra_conserved, std::vector<std::string>{"W3"});
}

TEST(Config, SweepGridIncludesStop)
{
    ExperimentConfig c = parse_config_text(R"({"sweep": {"delta_tilde": {"start": 2, "stop": 10, "step": 0.1}}})");
    ASSERT_EQ(c.sweep.delta_tilde.size(), 81u);
    EXPECT_NEAR(c.sweep.delta_tilde.back(), 10.0, 1e-12);
}

TEST(Verify, DefaultSystemPasses)
{
    ExperimentConfig c;
    Outcome o = run_experiment(c, Operation::Verify, "json", quiet());
    EXPECT_EQ(o.exit_code, 0) << o.text;
    json r = json::parse(o.text);
    for (const auto& ch : r["checks"]) {
        EXPECT_TRUE(ch["passed"].get<bool>()) << ch["name"];
        EXPECT_LT(ch["residual"].get<double>(), 1e-8) << ch["name"];
    }
}

TEST(Verify, ForcedW3OnTenQubitsFails)
{
    ExperimentConfig c = parse_config_text(R"({"system": "ten_qubit", "verify": {"extra_conserved": ["W3"]}})");
    Outcome o = run_experiment(c, Operation::Verify, "json", quiet());
    EXPECT_EQ(o.exit_code, 1);
    json r = json::parse(o.text);
    bool found = false;
    for (const auto& ch : r["checks"])
        if (ch["name"] == "commutes:W3") {
            found = true;
            EXPECT_FALSE(ch["passed"].get<bool>());
        }
    EXPECT_TRUE(found);
    EXPECT_THROW(run_experiment(c, Operation::Verify, "csv", quiet()), ConfigError);
}

TEST(Sweep, FidelityCurveHasInteriorMaximum)
{
    ExperimentConfig c = parse_config_text(R"({"sweep": {"gates": ["S"], "delta_tilde": {"start": 2, "stop": 10, "step": 0.1}, "N_equator": [3]}})");
    auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 81u);
    auto best = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.process_fidelity < b.process_fidelity; });
    EXPECT_GE(best->process_fidelity, 0.95);
    EXPECT_GT(best->delta_tilde, 2.0 + 1e-9);
    EXPECT_LT(best->delta_tilde, 10.0 - 1e-9);
}

TEST(Sweep, BestFidelityGrowsWithSteps)
{
    ExperimentConfig c = parse_config_text(R"({"sweep": {"gates": ["S"], "delta_tilde": {"start": 1, "stop": 10, "step": 0.1}, "N_equator": [1, 2, 3, 5, 8]}})");
    auto rows = run_sweep(c, 2);
    std::map<int, double> best;
    for (const auto& r : rows) best[r.n_equator] = std::max(best[r.n_equator], r.process_fidelity);
    double prev = 0;
    for (int n : {1, 2, 3, 5, 8}) {
        EXPECT_GT(best[n], prev) << n;
        prev = best[n];
    }
}

TEST(Sweep, OutputIndependentOfThreadCount)
{
    ExperimentConfig c = parse_config_text(R"({"sweep": {"gates": ["S", "T"], "delta_tilde": [2.0, 3.5, 5.0], "N_equator": [2, 3]}})");
    Outcome a = run_experiment(c, Operation::Sweep, "csv", {1, false});
    Outcome b = run_experiment(c, Operation::Sweep, "csv", {3, false});
    EXPECT_EQ(a.text, b.text);
    EXPECT_EQ(a.text.rfind("gate,delta_tilde,N,process_fidelity,leakage,wall_time\n", 0), 0u);
    Outcome stamped = run_experiment(c, Operation::Sweep, "csv", {1, true});
    EXPECT_EQ(stamped.text.rfind("# generated ", 0), 0u);
}

TEST(Tomography, ReportsStepCountsAndInputs)
{
    ExperimentConfig c = parse_config_text(R"({"tomography": {"gates": [{"gate": "S", "delta_tilde": 6.3}, {"gate": "T", "delta_tilde": 4.2}]}})");
    json r = json::parse(run_experiment(c, Operation::Tomography, "json", quiet()).text);
    ASSERT_EQ(r["gates"].size(), 2u);
    EXPECT_EQ(r["gates"][0]["N_total"], 9);
    EXPECT_EQ(r["gates"][1]["N_total"], 15);
    EXPECT_EQ(r["gates"][0]["inputs"].size(), 4u);
    for (const auto& g : r["gates"]) {
        EXPECT_GT(g["gate_count"].get<double>(), g["rotation_count"].get<double>());
        EXPECT_TRUE(g.contains("process_fidelity"));
    }

    ExperimentConfig t = parse_config_text(R"({"system": "ten_qubit", "tomography": {"gates": [{"gate": "Rxx", "delta_tilde": 6.3}]}})");
    json r10 = json::parse(run_experiment(t, Operation::Tomography, "json", quiet()).text);
    EXPECT_EQ(r10["gates"][0]["inputs"].size(), 16u);
}

TEST(Tomography, IdentityIsPerfectWithoutNoise)
{
    ExperimentConfig c = parse_config_text(R"({"tomography": {"gates": ["I"]}})");
    json r = json::parse(run_experiment(c, Operation::Tomography, "json", quiet()).text);
    EXPECT_NEAR(r["gates"][0]["process_fidelity"].get<double>(), 1.0, 1e-10);
}

TEST(Other, HolonomyEffectiveExportBraid)
{
    ExperimentConfig c = parse_config_text(R"({"holonomy": {"steps": 2000}})");
    json h = json::parse(run_experiment(c, Operation::Holonomy, "json", quiet()).text);
    EXPECT_NEAR(h["spin"]["eigenphases"][1].get<double>(), pi / 4, 1e-3);
    EXPECT_LT(h["spin"]["distance_to_ideal"].get<double>(), 1e-6);

    ExperimentConfig e = parse_config_text(R"({"system": {"kind": "four_qubit", "left": {"polar": 0.7, "azimuth": 1.2}}})");
    json eff = json::parse(run_experiment(e, Operation::Effective, "json", quiet()).text);
    EXPECT_LT(eff["arms"][0]["gauge_residual"].get<double>(), 1e-8);
    EXPECT_THROW(run_experiment(e, Operation::Braid, "json", quiet()), ConfigError); // not idle

    std::string circ = run_experiment(ExperimentConfig{}, Operation::Export, "json", quiet()).text;
    EXPECT_EQ(circ.rfind("# braidlab circuit\n# qubits 4\n", 0), 0u);

    json b = json::parse(run_experiment(ExperimentConfig{}, Operation::Braid, "json", quiet()).text);
    EXPECT_NEAR(b["braid"]["process_fidelity"].get<double>(), 0.9727501521254325, 1e-10);
}

TEST(Binary, ExitCodes)
{
    std::string good = temp_file("good.json", R"({"system": "four_qubit"})");
    std::string bad = temp_file("bad.json", "{\"system\": ");
    std::string unknown = temp_file("unknown.json", R"({"systen": "four_qubit"})");
    std::string w3 = temp_file("w3.json", R"({"system": "ten_qubit", "verify": {"extra_conserved": ["W3"]}})");
    std::string out = temp_file("out.json", "");
    EXPECT_EQ(cli("verify --config " + good + " --out " + out), 0);
    EXPECT_EQ(cli("verify --config " + bad), 2);
    EXPECT_EQ(cli("verify --config " + unknown), 2);
    EXPECT_EQ(cli("verify --config /nonexistent/config.json"), 2);
    EXPECT_EQ(cli("verify --config " + w3), 1);
    EXPECT_EQ(cli("--bogus-flag"), 2);
    EXPECT_EQ(cli("--config " + good), 2); // no operation anywhere
    EXPECT_EQ(cli("verify --format csv"), 2);
    EXPECT_EQ(json::parse(slurp(out))["passed"], true);
    for (const auto& p : {good, bad, unknown, w3, out}) fs::remove(p);
}

TEST(Binary, RepeatedSweepsAreByteIdentical)
{
    std::string cfg = temp_file("sweep.json", R"({"sweep": {"gates": ["S"], "delta_tilde": {"start": 2, "stop": 4, "step": 0.5}, "N_equator": [2, 3]}, "seed": 5})");
    std::string a = temp_file("a.csv", ""), b = temp_file("b.csv", "");
    ASSERT_EQ(cli("sweep --config " + cfg + " --no-header-timestamp --out " + a), 0);
    ASSERT_EQ(cli("sweep --config " + cfg + " --no-header-timestamp --out " + b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
    for (const auto& p : {cfg, a, b}) fs::remove(p);
}
