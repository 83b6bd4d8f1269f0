#pragma once

#include "braidlab/tomography.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <mutex>
#include <random>
#include <thread>

namespace braidlab {

using json = nlohmann::json;

// bad config, bad flags, unreadable files: exit status 2
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Operation { Verify, Effective, Holonomy, Braid, Tomography, Sweep, Export };

inline const std::vector<std::pair<std::string, Operation>>& operation_names()
{
    static const std::vector<std::pair<std::string, Operation>> t{
        {"verify", Operation::Verify},         {"effective", Operation::Effective}, {"holonomy", Operation::Holonomy},
        {"braid", Operation::Braid},           {"tomography", Operation::Tomography}, {"sweep", Operation::Sweep},
        {"export", Operation::Export}};
    return t;
}

inline Operation parse_operation(const std::string& s)
{
    for (const auto& [k, v] : operation_names())
        if (k == s) return v;
    throw ConfigError("unknown operation '" + s + "'");
}

inline std::string to_string(Operation op)
{
    for (const auto& [k, v] : operation_names())
        if (v == op) return k;
    return "?";
}

// one braid: a named gate or an explicit (arm, target_phi) loop
struct BraidSpec {
    GateTarget target{"S", Arm::Left, pi / 2};
    double delta_tilde = 3.8;
    int n_equator = 3;
};

struct NoiseSpec {
    double depolarizing = 0.0; // 0 means noiseless
    bool enabled() const { return depolarizing > 0.0; }
};

struct SweepSpec {
    std::vector<GateTarget> gates;   // empty: the braid gate
    std::vector<double> delta_tilde; // empty: the braid value
    std::vector<int> n_equator;      // empty: the braid value
};

struct HolonomySpec {
    Arm arm = Arm::Left;
    double target_phi = pi / 2;
    int steps = 10000; // per path segment
};

struct TomographySpec {
    std::vector<BraidSpec> gates; // empty: the braid
    bool positivity_projection = false;
};

struct VerifySpec {
    std::vector<std::string> extra_conserved;
    int random_angles = 20;
    int grid = 5;
};

struct ExperimentConfig {
    SystemSpec system;
    std::optional<Operation> operation;
    BraidSpec braid;
    NoiseSpec noise;
    std::optional<long> shots;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string output_format; // empty: per-operation default
    SweepSpec sweep;
    HolonomySpec holonomy;
    TomographySpec tomography;
    VerifySpec verify;
    CircuitFormat export_format = CircuitFormat::Native;
};

// ---- config parsing

namespace cfg {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

inline double number(const json& j, const std::string& where)
{
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
    return v;
}

inline long integer(const json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<long>();
}

inline std::string text(const json& j, const std::string& where)
{
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

inline Arm arm(const json& j, const std::string& where)
{
    std::string s = text(j, where);
    if (s == "left") return Arm::Left;
    if (s == "right") return Arm::Right;
    if (s == "middle") return Arm::Middle;
    throw ConfigError(where + ": arm must be left, right or middle");
}

inline SystemKind kind(const std::string& s, const std::string& where)
{
    if (s == "four_qubit" || s == "FourQubit") return SystemKind::FourQubit;
    if (s == "ten_qubit" || s == "TenQubit") return SystemKind::TenQubit;
    if (s == "tetrad_torus" || s == "TetradTorus") return SystemKind::TetradTorus;
    throw ConfigError(where + ": unknown system kind '" + s + "'");
}

inline ClockArm clock_arm(const json& j, const std::string& where)
{
    check_keys(j, {"magnitude", "polar", "azimuth"}, where);
    ClockArm a;
    if (j.contains("magnitude")) a.magnitude = number(j["magnitude"], where + ".magnitude");
    if (j.contains("polar")) a.polar = number(j["polar"], where + ".polar");
    if (j.contains("azimuth")) a.azimuth = number(j["azimuth"], where + ".azimuth");
    if (a.magnitude < 0) throw ConfigError(where + ".magnitude: must be >= 0");
    if (a.polar < 0 || a.polar > pi + 1e-12) throw ConfigError(where + ".polar: must lie in [0, pi]");
    return a;
}

inline SystemSpec system(const json& j)
{
    SystemSpec s;
    if (j.is_string()) {
        s.kind = kind(j.get<std::string>(), "system");
        return s;
    }
    check_keys(j, {"kind", "left", "right", "middle", "tetrad"}, "system");
    if (!j.contains("kind")) throw ConfigError("system: missing 'kind'");
    s.kind = kind(text(j["kind"], "system.kind"), "system.kind");
    if (j.contains("left")) s.left = clock_arm(j["left"], "system.left");
    for (const char* k : {"right", "middle"})
        if (j.contains(k)) {
            if (s.kind != SystemKind::TenQubit) throw ConfigError(std::string("system.") + k + ": only the ten-qubit system has this arm");
            s.arm(std::string(k) == "right" ? Arm::Right : Arm::Middle) = clock_arm(j[k], std::string("system.") + k);
        }
    if (j.contains("tetrad")) {
        if (s.kind != SystemKind::TetradTorus) throw ConfigError("system.tetrad: only for tetrad_torus");
        const json& t = j["tetrad"];
        if (!t.is_array() || t.size() != 3) throw ConfigError("system.tetrad: expected [x, y, z]");
        for (int i = 0; i < 3; ++i) s.tetrad[i] = number(t[i], "system.tetrad");
    }
    return s;
}

inline void require_arm(const SystemSpec& s, Arm a, const std::string& where)
{
    try {
        check_arm(s, a);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline GateTarget gate_name(const std::string& name, const std::string& where)
{
    try {
        return named_gate(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// "S" or {"gate": "S", ...} or {"arm": "left", "target_phi": 0.3, ...}
inline BraidSpec braid(const json& j, const BraidSpec& defaults, const SystemSpec& sys, const std::string& where)
{
    BraidSpec b = defaults;
    if (j.is_string()) {
        b.target = gate_name(j.get<std::string>(), where);
    } else {
        check_keys(j, {"gate", "arm", "target_phi", "delta_tilde", "N_equator"}, where);
        if (j.contains("gate")) {
            if (j.contains("arm") || j.contains("target_phi")) throw ConfigError(where + ": give either 'gate' or 'arm'/'target_phi'");
            b.target = gate_name(text(j["gate"], where + ".gate"), where);
        } else if (j.contains("arm") || j.contains("target_phi")) {
            b.target = {"custom", Arm::Left, pi / 2};
            if (j.contains("arm")) b.target.arm = arm(j["arm"], where + ".arm");
            if (j.contains("target_phi")) b.target.phi = number(j["target_phi"], where + ".target_phi");
            if (std::abs(b.target.phi) > 2 * pi + 1e-12) throw ConfigError(where + ".target_phi: |phi| must be <= 2 pi");
        }
        if (j.contains("delta_tilde")) b.delta_tilde = number(j["delta_tilde"], where + ".delta_tilde");
        if (j.contains("N_equator")) b.n_equator = static_cast<int>(integer(j["N_equator"], where + ".N_equator"));
    }
    if (!(b.delta_tilde > 0)) throw ConfigError(where + ".delta_tilde: must be positive");
    if (b.n_equator < 1) throw ConfigError(where + ".N_equator: must be >= 1");
    require_arm(sys, b.target.arm, where);
    return b;
}

inline NoiseSpec noise(const json& j)
{
    NoiseSpec n;
    if (j.is_null()) return n;
    if (j.is_string()) {
        if (j.get<std::string>() != "none") throw ConfigError("noise: string form must be \"none\"");
        return n;
    }
    check_keys(j, {"model", "p"}, "noise");
    std::string model = j.contains("model") ? text(j["model"], "noise.model") : std::string(j.empty() ? "none" : "depolarizing");
    if (model == "none") {
        if (j.contains("p")) throw ConfigError("noise.p: not used by model none");
        return n;
    }
    if (model != "depolarizing") throw ConfigError("noise.model: none or depolarizing");
    if (!j.contains("p")) throw ConfigError("noise: depolarizing needs 'p'");
    n.depolarizing = number(j["p"], "noise.p");
    if (n.depolarizing < 0 || n.depolarizing > 1) throw ConfigError("noise.p: must lie in [0, 1]");
    return n;
}

// {"start", "stop", "step"} (stop included) or a list of values
inline std::vector<double> grid(const json& j, const std::string& where)
{
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(number(v, where));
    } else if (j.is_number()) {
        out.push_back(number(j, where));
    } else {
        check_keys(j, {"start", "stop", "step"}, where);
        for (const char* k : {"start", "stop", "step"})
            if (!j.contains(k)) throw ConfigError(where + ": missing '" + k + "'");
        double a = number(j["start"], where + ".start"), b = number(j["stop"], where + ".stop"), h = number(j["step"], where + ".step");
        if (!(h > 0) || b < a) throw ConfigError(where + ": need step > 0 and stop >= start");
        const long count = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
        if (count > 100000) throw ConfigError(where + ": grid too large");
        for (long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * h);
    }
    if (out.empty()) throw ConfigError(where + ": grid is empty");
    return out;
}

} // namespace cfg

inline ExperimentConfig parse_config(const json& j)
{
    try {
        cfg::check_keys(j, {"system", "operation", "braid", "noise", "shots", "seed", "output", "sweep", "holonomy", "tomography",
                            "verify", "export"},
                        "config");
        ExperimentConfig c;
        if (j.contains("system")) c.system = cfg::system(j["system"]);
        if (j.contains("operation")) c.operation = parse_operation(cfg::text(j["operation"], "operation"));
        if (c.system.kind == SystemKind::TenQubit) c.braid.target = named_gate("Rxx");
        if (j.contains("braid")) c.braid = cfg::braid(j["braid"], c.braid, c.system, "braid");
        cfg::require_arm(c.system, c.braid.target.arm, "braid");
        if (j.contains("noise")) c.noise = cfg::noise(j["noise"]);
        if (j.contains("shots") && !j["shots"].is_null()) {
            c.shots = cfg::integer(j["shots"], "shots");
            if (*c.shots < 1) throw ConfigError("shots: must be positive");
        }
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
                throw ConfigError("seed: expected a non-negative integer");
            c.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("output")) {
            const json& o = j["output"];
            cfg::check_keys(o, {"path", "format"}, "output");
            if (o.contains("path")) c.output_path = cfg::text(o["path"], "output.path");
            if (o.contains("format")) {
                c.output_format = cfg::text(o["format"], "output.format");
                if (c.output_format != "csv" && c.output_format != "json") throw ConfigError("output.format: csv or json");
            }
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            cfg::check_keys(s, {"gates", "delta_tilde", "N_equator"}, "sweep");
            if (s.contains("gates")) {
                if (!s["gates"].is_array() || s["gates"].empty()) throw ConfigError("sweep.gates: expected a nonempty list");
                for (const auto& g : s["gates"]) {
                    if (g.is_object() && (g.contains("delta_tilde") || g.contains("N_equator")))
                        throw ConfigError("sweep.gates: delta_tilde and N_equator come from the sweep grid");
                    c.sweep.gates.push_back(cfg::braid(g, c.braid, c.system, "sweep.gates").target);
                }
            }
            if (s.contains("delta_tilde")) {
                c.sweep.delta_tilde = cfg::grid(s["delta_tilde"], "sweep.delta_tilde");
                for (double d : c.sweep.delta_tilde)
                    if (!(d > 0)) throw ConfigError("sweep.delta_tilde: values must be positive");
            }
            if (s.contains("N_equator")) {
                const json& nj = s["N_equator"];
                if (nj.is_array()) {
                    for (const auto& v : nj) c.sweep.n_equator.push_back(static_cast<int>(cfg::integer(v, "sweep.N_equator")));
                } else {
                    c.sweep.n_equator.push_back(static_cast<int>(cfg::integer(nj, "sweep.N_equator")));
                }
                if (c.sweep.n_equator.empty()) throw ConfigError("sweep.N_equator: grid is empty");
                for (int n : c.sweep.n_equator)
                    if (n < 1) throw ConfigError("sweep.N_equator: values must be >= 1");
            }
        }
        if (j.contains("holonomy")) {
            const json& h = j["holonomy"];
            cfg::check_keys(h, {"arm", "target_phi", "steps"}, "holonomy");
            if (h.contains("arm")) c.holonomy.arm = cfg::arm(h["arm"], "holonomy.arm");
            if (h.contains("target_phi")) c.holonomy.target_phi = cfg::number(h["target_phi"], "holonomy.target_phi");
            if (h.contains("steps")) c.holonomy.steps = static_cast<int>(cfg::integer(h["steps"], "holonomy.steps"));
            if (c.holonomy.steps < 1) throw ConfigError("holonomy.steps: must be >= 1");
            if (std::abs(c.holonomy.target_phi) > 2 * pi + 1e-12) throw ConfigError("holonomy.target_phi: |phi| must be <= 2 pi");
        }
        cfg::require_arm(c.system, c.holonomy.arm, "holonomy");
        if (j.contains("tomography")) {
            const json& t = j["tomography"];
            cfg::check_keys(t, {"gates", "positivity_projection"}, "tomography");
            if (t.contains("gates")) {
                if (!t["gates"].is_array() || t["gates"].empty()) throw ConfigError("tomography.gates: expected a nonempty list");
                for (const auto& g : t["gates"]) c.tomography.gates.push_back(cfg::braid(g, c.braid, c.system, "tomography.gates"));
            }
            if (t.contains("positivity_projection")) {
                if (!t["positivity_projection"].is_boolean()) throw ConfigError("tomography.positivity_projection: expected a boolean");
                c.tomography.positivity_projection = t["positivity_projection"].get<bool>();
            }
        }
        if (j.contains("verify")) {
            const json& v = j["verify"];
            cfg::check_keys(v, {"extra_conserved", "random_angles", "grid"}, "verify");
            if (v.contains("extra_conserved")) {
                if (!v["extra_conserved"].is_array()) throw ConfigError("verify.extra_conserved: expected a list of names");
                for (const auto& e : v["extra_conserved"]) {
                    std::string nm = cfg::text(e, "verify.extra_conserved");
                    try {
                        named_operator(nm, c.system.n_qubits());
                    } catch (const std::invalid_argument& ex) {
                        throw ConfigError(std::string("verify.extra_conserved: ") + ex.what());
                    }
                    c.verify.extra_conserved.push_back(nm);
                }
            }
            if (v.contains("random_angles")) c.verify.random_angles = static_cast<int>(cfg::integer(v["random_angles"], "verify.random_angles"));
            if (v.contains("grid")) c.verify.grid = static_cast<int>(cfg::integer(v["grid"], "verify.grid"));
            if (c.verify.random_angles < 1 || c.verify.grid < 2) throw ConfigError("verify: random_angles >= 1 and grid >= 2");
        }
        if (j.contains("export")) {
            const json& e = j["export"];
            cfg::check_keys(e, {"format"}, "export");
            if (e.contains("format")) {
                try {
                    c.export_format = parse_circuit_format(cfg::text(e["format"], "export.format"));
                } catch (const std::invalid_argument& ex) {
                    throw ConfigError(std::string("export.format: ") + ex.what());
                }
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig parse_config_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

// ---- JSON helpers

inline json to_json(const Mat& m)
{
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json a = json::array(), b = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            a.push_back(m(r, c).real());
            b.push_back(m(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"re", re}, {"im", im}};
}

inline json to_json(const ClockArm& a) { return {{"magnitude", a.magnitude}, {"polar", a.polar}, {"azimuth", a.azimuth}}; }

inline json to_json(const SystemSpec& s)
{
    static const char* names[] = {"four_qubit", "ten_qubit", "tetrad_torus"};
    json j{{"kind", names[static_cast<int>(s.kind)]}, {"left", to_json(s.left)}};
    if (s.kind == SystemKind::TenQubit) {
        j["right"] = to_json(s.right);
        j["middle"] = to_json(s.middle);
    }
    if (s.kind == SystemKind::TetradTorus) j["tetrad"] = {s.tetrad[0], s.tetrad[1], s.tetrad[2]};
    return j;
}

inline std::string g12(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
    return buf;
}

inline std::string utc_timestamp()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- verify

struct Check {
    std::string name;
    double residual = 0.0;
    double tolerance = 1e-8;
    bool passed() const { return residual <= tolerance; }
};

namespace detail {

inline double max_coeff(const OperatorSum& op)
{
    double m = 0;
    for (const auto& [c, p] : op.terms()) m = std::max(m, std::abs(c));
    return m;
}

inline SystemSpec random_angles(const SystemSpec& base, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> th(0.0, pi), ph(0.0, 2 * pi);
    SystemSpec s = base;
    s.left.polar = th(gen);
    s.left.azimuth = ph(gen);
    if (s.kind == SystemKind::TenQubit) {
        for (Arm a : {Arm::Right, Arm::Middle}) {
            s.arm(a).polar = th(gen);
            s.arm(a).azimuth = ph(gen);
        }
    }
    return s;
}

// the W operators fixed to -1 on the code. W3 and W7 act as logical operators
// (W3 = n on the four-qubit code, W7 = -Z Z' on the ten-qubit code)
inline std::vector<NamedString> code_sector_operators(const SystemSpec& s)
{
    std::vector<NamedString> out;
    for (const auto& w : conserved_set(s))
        if (w.name != "W3" && w.name != "W7") out.push_back(w);
    return out;
}

inline std::vector<Arm> arms_of(const SystemSpec& s)
{
    if (s.kind == SystemKind::TenQubit) return {Arm::Left, Arm::Right, Arm::Middle};
    return {Arm::Left};
}

} // namespace detail

inline std::vector<Check> verify_checks(const ExperimentConfig& c)
{
    const SystemSpec& base = c.system;
    const int n = base.n_qubits();
    std::mt19937_64 gen(c.seed);
    std::vector<Check> out;

    std::vector<NamedString> conserved = conserved_set(base);
    for (const auto& e : c.verify.extra_conserved) conserved.push_back({e, named_operator(e, n)});

    std::vector<SystemSpec> samples;
    for (int i = 0; i < c.verify.random_angles; ++i) samples.push_back(detail::random_angles(base, gen));

    Check herm{"hamiltonian_hermitian", 0, 1e-12};
    Check square{"hamiltonian_square", 0, 1e-12};
    std::vector<Check> comm;
    for (const auto& w : conserved) comm.push_back({"commutes:" + w.name, 0, 1e-12});
    for (const auto& s : samples) {
        OperatorSum h = hamiltonian(s);
        for (const auto& [k, p] : h.terms()) herm.residual = std::max(herm.residual, std::abs(k.imag()));
        if (s.kind == SystemKind::FourQubit) {
            OperatorSum sq = h * h;
            sq.add(-s.left.magnitude * s.left.magnitude, PauliString(n));
            square.residual = std::max(square.residual, detail::max_coeff(sq));
        }
        for (std::size_t i = 0; i < conserved.size(); ++i) {
            OperatorSum w(conserved[i].op);
            comm[i].residual = std::max(comm[i].residual, detail::max_coeff((w * h + cplx(-1) * (h * w)).pruned(1e-15)));
        }
    }
    out.push_back(herm);
    if (base.kind == SystemKind::FourQubit) out.push_back(square);
    out.insert(out.end(), comm.begin(), comm.end());

    Check mutual{"conserved_mutually_commute", 0, 0.5};
    for (std::size_t i = 0; i < conserved.size(); ++i)
        for (std::size_t j = i + 1; j < conserved.size(); ++j)
            if (!commutes(conserved[i].op, conserved[j].op)) mutual.residual = 2.0;
    out.push_back(mutual);

    if (base.kind == SystemKind::FourQubit) {
        // (W1, W2) blocks share one spectrum
        Check blocks{"w_block_spectra", 0, 1e-12};
        std::vector<PauliString> ws{named_operator("W1", n), named_operator("W2", n)};
        for (const auto& s : samples) {
            OperatorSum h = hamiltonian(s);
            std::optional<Eigen::VectorXd> ref;
            for (const Label& t : std::vector<Label>{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}}) {
                LabeledBasis b = labeled_basis(ws, {t}, n);
                Eigen::SelfAdjointEigenSolver<Mat> es(effective_hamiltonian(h, b).matrix, Eigen::EigenvaluesOnly);
                if (!ref) ref = es.eigenvalues();
                else if (ref->size() != es.eigenvalues().size()) blocks.residual = 1.0;
                else blocks.residual = std::max(blocks.residual, (*ref - es.eigenvalues()).cwiseAbs().maxCoeff());
            }
        }
        out.push_back(blocks);
    }

    if (base.kind != SystemKind::TetradTorus) {
        // projected Hamiltonians against the closed forms, up to a diagonal gauge
        for (Arm arm : detail::arms_of(base)) {
            Check eff{"effective:" + to_string(arm), 0, 1e-8};
            LabeledBasis sb = sector_basis(base, arm);
            const int g = c.verify.grid;
            for (int i = 0; i < g; ++i)
                for (int k = 0; k < g; ++k) {
                    double a = pi * i / (g - 1), b = 2 * pi * k / (g - 1);
                    Mat m = traceless(effective_hamiltonian(hamiltonian(base.with_arm(arm, a, b)), sb).matrix);
                    eff.residual = std::max(eff.residual, gauge_align(m, analytic_effective(arm, a, b)).residual);
                }
            out.push_back(eff);

            Check gf{"gauge_field:" + to_string(arm), 0, 1e-6};
            std::uniform_real_distribution<double> th(0.05, pi - 0.05), ph(0.0, 2 * pi);
            for (int i = 0; i < 10; ++i) {
                double a = th(gen), b = ph(gen);
                GaugeField an = analytic_gauge_fields(arm, a, b), fd = finite_difference_gauge_fields(arm, a, b);
                gf.residual = std::max({gf.residual, (an.a_polar - fd.a_polar).cwiseAbs().maxCoeff(),
                                        (an.a_azimuth - fd.a_azimuth).cwiseAbs().maxCoeff()});
            }
            out.push_back(gf);
        }

        SystemSpec idle = base;
        for (Arm a : detail::arms_of(base)) idle.arm(a).polar = 0.0;
        Mat code = code_matrix(idle);
        Check cw{"code_states_in_sector", 0, 1e-10};
        for (Eigen::Index j = 0; j < code.cols(); ++j) {
            QuantumState s = QuantumState::from_vector(code.col(j));
            for (const auto& w : detail::code_sector_operators(base)) cw.residual = std::max(cw.residual, std::abs(expectation(s, w.op) + 1.0));
        }
        out.push_back(cw);

        Check lo{"logical_operators", 0, 1e-10};
        auto ops = logical_operators(idle);
        for (int q = 0; q < base.n_logical(); ++q)
            for (char ch : {'X', 'Y', 'Z'})
                lo.residual = std::max(lo.residual, (restrict_to_code(ops[q][ch], code) - logical_pauli_matrix(ch, q, base.n_logical()))
                                                        .cwiseAbs()
                                                        .maxCoeff());
        out.push_back(lo);

        Check init{"init_circuits", 0, 1e-10};
        for (const auto& labels : tomography_inputs(base.logical_dim())) {
            Vec target = code * logical_coefficients(labels);
            Vec got = prepare_logical(labels, idle, PrepMethod::CircuitReplay).vector();
            init.residual = std::max(init.residual, 1.0 - std::abs(target.dot(got)));
        }
        out.push_back(init);
    }
    return out;
}

// ---- channels and sweeps

struct ChannelRecord {
    ChoiMatrix choi;
    std::vector<std::vector<std::string>> inputs;
    std::vector<double> state_fidelities;
    double process_fidelity = 0.0;
    double leakage = 0.0;
    double mean_init_gates = 0.0;
};

inline std::string input_name(const std::vector<std::string>& labels)
{
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? "," : "") + labels[i];
    return s;
}

// population inside the code space
inline double code_population(const QuantumState& s, const Mat& code)
{
    if (s.pure()) return (code.adjoint() * s.vector()).squaredNorm();
    return (code.adjoint() * s.density() * code).trace().real();
}

// prepare by circuit replay, braid, and reconstruct by logical state tomography
inline ChannelRecord run_channel(const TrotterPlan& plan, const SystemSpec& system, const NoiseSpec& noise,
                                 std::optional<Sampling> sampling = std::nullopt)
{
    const LogicalFrame frame = logical_frame(system);
    const Mat code = code_matrix(system);
    const Mat ideal = ideal_gate(plan, system);
    ChannelRecord r;
    r.inputs = tomography_inputs(system.logical_dim());
    std::vector<Mat> outs;
    double pop = 0, init = 0;
    for (std::size_t i = 0; i < r.inputs.size(); ++i) {
        const auto& in = r.inputs[i];
        const StateMode mode = noise.enabled() ? StateMode::DensityMatrix : StateMode::PureVector;
        QuantumState s = prepare_logical(in, system, PrepMethod::CircuitReplay, mode, noise.depolarizing);
        s = execute_braid(plan, std::move(s), noise.depolarizing);
        std::optional<Sampling> sm = sampling;
        if (sm) sm->stream = sm->stream * 32 + i;
        Mat rho = state_tomography(s, frame, sm);
        outs.push_back(rho);
        r.state_fidelities.push_back(state_fidelity(ideal * logical_coefficients(in), rho));
        pop += code_population(s, code);
        init += static_cast<double>(init_circuit(in, system).size());
    }
    const double k = static_cast<double>(r.inputs.size());
    r.choi = choi_from_outputs(outs, system.logical_dim());
    r.process_fidelity = process_fidelity(unitary_choi(ideal), r.choi);
    r.leakage = std::max(0.0, 1.0 - pop / k);
    r.mean_init_gates = init / k;
    return r;
}

struct SweepRow {
    std::string gate;
    double delta_tilde = 0.0;
    int n_equator = 0;
    double process_fidelity = 0.0;
    double leakage = 0.0;
    double wall_time = 0.0;
};

struct RunOptions {
    int threads = 1;
    bool header_timestamp = true;
};

// fills rows[i] = f(i) on a small pool; row order never depends on scheduling
template <class Row, class F>
std::vector<Row> parallel_rows(std::size_t count, int threads, F f)
{
    std::vector<Row> rows(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                rows[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return rows;
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c, int threads = 1)
{
    std::vector<GateTarget> gates = c.sweep.gates.empty() ? std::vector<GateTarget>{c.braid.target} : c.sweep.gates;
    std::vector<double> dts = c.sweep.delta_tilde.empty() ? std::vector<double>{c.braid.delta_tilde} : c.sweep.delta_tilde;
    std::vector<int> ns = c.sweep.n_equator.empty() ? std::vector<int>{c.braid.n_equator} : c.sweep.n_equator;
    struct Point {
        GateTarget g;
        double dt;
        int n;
    };
    std::vector<Point> grid;
    for (const auto& g : gates)
        for (int n : ns)
            for (double dt : dts) grid.push_back({g, dt, n});
    return parallel_rows<SweepRow>(grid.size(), threads, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Point& p = grid[i];
        TrotterPlan plan = gate_plan(p.g, p.dt, p.n, c.system);
        SweepRow row{p.g.name, p.dt, p.n, 0, 0, 0};
        if (!c.noise.enabled() && !c.shots) {
            LogicalGate lg = extract_logical_gate(plan, c.system);
            row.process_fidelity = block_fidelity(ideal_gate(plan, c.system), lg.block);
            row.leakage = lg.leakage;
        } else {
            std::optional<Sampling> sm;
            if (c.shots) sm = Sampling{*c.shots, c.seed, i};
            ChannelRecord r = run_channel(plan, c.system, c.noise, sm);
            row.process_fidelity = r.process_fidelity;
            row.leakage = r.leakage;
        }
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return row;
    });
}

// ---- running a config

struct Outcome {
    std::string text;
    int exit_code = 0;
};

namespace detail {

inline void require_idle(const SystemSpec& s, const std::string& what)
{
    if (s.kind == SystemKind::TetradTorus) throw ConfigError(what + ": not defined for tetrad_torus");
    if (!s.idle()) throw ConfigError(what + " starts from the idle configuration; set every arm's polar angle to 0");
}

inline json braid_json(const BraidSpec& b, const TrotterPlan& plan)
{
    return {{"gate", b.target.name},
            {"arm", to_string(b.target.arm)},
            {"target_phi", b.target.phi},
            {"delta_tilde", b.delta_tilde},
            {"N_equator", b.n_equator},
            {"segment_steps", plan.segment_steps()},
            {"N_total", plan.total_steps()},
            {"rotation_count", plan.gates.size()},
            {"rounded", plan.rounded}};
}

inline std::string header_line(const RunOptions& o)
{
    return o.header_timestamp ? "# generated " + utc_timestamp() + "\n" : std::string();
}

inline json with_stamp(json j, const RunOptions& o)
{
    if (o.header_timestamp) j["generated"] = utc_timestamp();
    return j;
}

} // namespace detail

inline Outcome run_experiment(const ExperimentConfig& c, Operation op, const std::string& format, const RunOptions& opts)
{
    const bool csv = format == "csv";
    auto json_only = [&] {
        if (csv) throw ConfigError(to_string(op) + " writes JSON only");
    };
    json report{{"operation", to_string(op)}, {"system", to_json(c.system)}, {"seed", c.seed}};

    switch (op) {
    case Operation::Verify: {
        json_only();
        bool ok = true;
        json checks = json::array();
        for (const auto& ch : verify_checks(c)) {
            ok = ok && ch.passed();
            checks.push_back({{"name", ch.name}, {"passed", ch.passed()}, {"residual", ch.residual}, {"tolerance", ch.tolerance}});
        }
        report["checks"] = checks;
        report["passed"] = ok;
        return {detail::with_stamp(report, opts).dump(2) + "\n", ok ? 0 : 1};
    }
    case Operation::Effective: {
        json_only();
        if (c.system.kind == SystemKind::TetradTorus) throw ConfigError("effective: not defined for tetrad_torus");
        json arms = json::array();
        for (Arm arm : detail::arms_of(c.system)) {
            const ClockArm& ca = c.system.arm(arm);
            LabeledBasis sb = sector_basis(c.system, arm);
            EffectiveHamiltonian eh = effective_hamiltonian(hamiltonian(c.system), sb);
            Mat analytic = ca.magnitude * analytic_effective(arm, ca.polar, ca.azimuth);
            GaugeAlignment ga = gauge_align(traceless(eh.matrix), analytic);
            arms.push_back({{"arm", to_string(arm)},
                            {"polar", ca.polar},
                            {"azimuth", ca.azimuth},
                            {"labels", eh.basis_labels},
                            {"matrix", to_json(eh.matrix)},
                            {"analytic", to_json(analytic)},
                            {"gauge_residual", ga.residual}});
        }
        report["arms"] = arms;
        return {detail::with_stamp(report, opts).dump(2) + "\n", 0};
    }
    case Operation::Holonomy: {
        json_only();
        detail::require_idle(c.system, "holonomy");
        ParamPath path = clock_path(c.holonomy.target_phi, c.holonomy.steps, c.holonomy.arm);
        SpinHolonomy sh = spin_holonomy(c.system, path);
        Mat ideal = sh.support * ideal_gate(c.holonomy.arm, path.solid_angle(), c.system) * sh.support;
        WilsonResult an = wilson_loop(analytic_family(c.holonomy.arm), path, low_dim(c.holonomy.arm));
        report["arm"] = to_string(c.holonomy.arm);
        report["target_phi"] = c.holonomy.target_phi;
        report["steps_per_segment"] = c.holonomy.steps;
        report["solid_angle"] = path.solid_angle();
        report["spin"] = {{"eigenphases", sh.wilson.phases},
                          {"min_relative_gap", sh.wilson.min_gap},
                          {"logical", to_json(sh.logical)},
                          {"ideal", to_json(ideal)},
                          {"distance_to_ideal", phase_free_distance(sh.logical, ideal)}};
        report["effective_model"] = {{"eigenphases", an.phases}};
        if (c.holonomy.arm != Arm::Middle)
            report["majorana"] = {{"eigenphases", wilson_loop(majorana_family(), path, 2).phases}};
        return {detail::with_stamp(report, opts).dump(2) + "\n", 0};
    }
    case Operation::Export: {
        detail::require_idle(c.system, "export");
        TrotterPlan plan = gate_plan(c.braid.target, c.braid.delta_tilde, c.braid.n_equator, c.system);
        return {export_circuit(plan, c.export_format), 0};
    }
    case Operation::Braid: {
        detail::require_idle(c.system, "braid");
        TrotterPlan plan = gate_plan(c.braid.target, c.braid.delta_tilde, c.braid.n_equator, c.system);
        json rec = detail::braid_json(c.braid, plan);
        rec["solid_angle"] = plan.target_phi;
        if (!c.noise.enabled() && !c.shots) {
            LogicalGate lg = extract_logical_gate(plan, c.system);
            rec["method"] = "code_block";
            rec["process_fidelity"] = block_fidelity(ideal_gate(plan, c.system), lg.block);
            rec["leakage"] = lg.leakage;
            rec["logical_unitary"] = to_json(lg.unitary);
        } else {
            std::optional<Sampling> sm;
            if (c.shots) sm = Sampling{*c.shots, c.seed, 0};
            ChannelRecord r = run_channel(plan, c.system, c.noise, sm);
            rec["method"] = "tomography";
            rec["process_fidelity"] = r.process_fidelity;
            rec["leakage"] = r.leakage;
        }
        if (csv) {
            std::ostringstream os;
            os << detail::header_line(opts) << "gate,delta_tilde,N_equator,N_total,rotation_count,process_fidelity,leakage\n";
            os << c.braid.target.name << "," << g12(c.braid.delta_tilde) << "," << c.braid.n_equator << "," << plan.total_steps() << ","
               << plan.gates.size() << "," << g12(rec["process_fidelity"].get<double>()) << "," << g12(rec["leakage"].get<double>()) << "\n";
            return {os.str(), 0};
        }
        report["noise"] = {{"depolarizing", c.noise.depolarizing}};
        report["braid"] = rec;
        return {detail::with_stamp(report, opts).dump(2) + "\n", 0};
    }
    case Operation::Tomography: {
        detail::require_idle(c.system, "tomography");
        std::vector<BraidSpec> gates = c.tomography.gates.empty() ? std::vector<BraidSpec>{c.braid} : c.tomography.gates;
        json recs = json::array();
        std::ostringstream os;
        os << detail::header_line(opts) << "gate,delta_tilde,N_total,gate_count,process_fidelity,leakage";
        for (const auto& in : tomography_inputs(c.system.logical_dim())) os << ",F[" << input_name(in) << "]";
        os << "\n";
        for (std::size_t gi = 0; gi < gates.size(); ++gi) {
            const BraidSpec& b = gates[gi];
            TrotterPlan plan = gate_plan(b.target, b.delta_tilde, b.n_equator, c.system);
            std::optional<Sampling> sm;
            if (c.shots) sm = Sampling{*c.shots, c.seed, gi};
            ChannelRecord r = run_channel(plan, c.system, c.noise, sm);
            const double gate_count = static_cast<double>(plan.gates.size()) + r.mean_init_gates;
            json rec = detail::braid_json(b, plan);
            rec["gate_count"] = gate_count;
            rec["init_gate_count"] = r.mean_init_gates;
            rec["process_fidelity"] = r.process_fidelity;
            rec["leakage"] = r.leakage;
            rec["choi_min_eigenvalue"] = min_eigenvalue(r.choi.matrix);
            rec["choi"] = to_json(r.choi.matrix);
            if (c.tomography.positivity_projection) {
                PositivityProjection pp = positivity_projection(r.choi);
                rec["positivity_projection"] = {
                    {"applied", pp.applied},
                    {"process_fidelity", process_fidelity(unitary_choi(ideal_gate(plan, c.system)), pp.choi)}};
            }
            json ins = json::array();
            for (std::size_t i = 0; i < r.inputs.size(); ++i)
                ins.push_back({{"input", input_name(r.inputs[i])}, {"state_fidelity", r.state_fidelities[i]}});
            rec["inputs"] = ins;
            recs.push_back(rec);
            os << b.target.name << "," << g12(b.delta_tilde) << "," << plan.total_steps() << "," << g12(gate_count) << ","
               << g12(r.process_fidelity) << "," << g12(r.leakage);
            for (double f : r.state_fidelities) os << "," << g12(f);
            os << "\n";
        }
        if (csv) return {os.str(), 0};
        report["noise"] = {{"depolarizing", c.noise.depolarizing}};
        report["shots"] = c.shots ? json(*c.shots) : json(nullptr);
        report["gates"] = recs;
        return {detail::with_stamp(report, opts).dump(2) + "\n", 0};
    }
    case Operation::Sweep: {
        detail::require_idle(c.system, "sweep");
        std::vector<SweepRow> rows = run_sweep(c, opts.threads);
        if (!opts.header_timestamp)
            for (auto& r : rows) r.wall_time = 0.0;
        if (csv) {
            std::ostringstream os;
            os << detail::header_line(opts) << "gate,delta_tilde,N,process_fidelity,leakage,wall_time\n";
            for (const auto& r : rows)
                os << r.gate << "," << g12(r.delta_tilde) << "," << r.n_equator << "," << g12(r.process_fidelity) << "," << g12(r.leakage)
                   << "," << g12(r.wall_time) << "\n";
            return {os.str(), 0};
        }
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"gate", r.gate},
                           {"delta_tilde", r.delta_tilde},
                           {"N", r.n_equator},
                           {"process_fidelity", r.process_fidelity},
                           {"leakage", r.leakage},
                           {"wall_time", r.wall_time}});
        report["noise"] = {{"depolarizing", c.noise.depolarizing}};
        report["rows"] = arr;
        return {detail::with_stamp(report, opts).dump(2) + "\n", 0};
    }
    }
    throw std::logic_error("unhandled operation");
}

inline std::string default_format(Operation op) { return op == Operation::Sweep ? "csv" : "json"; }

} // namespace braidlab
