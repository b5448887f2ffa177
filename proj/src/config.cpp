#include "relax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::config {

namespace {

using enum Command;

struct KeySpec {
    KeyInfo info;
    std::vector<Command> commands;
    std::map<Command, std::string> defaults;  // commands without an entry use `fallback`
    std::string fallback;
};

const std::vector<KeySpec>& specs() {
    static const std::vector<KeySpec> table = {
        {{"bath.family", "spectral density family: flat or ohmic"},
         {sweep_nonlocal, sweep_ladder, dicke, simulate}, {}, "flat"},
        {{"bath.amplitude", "spectral density amplitude g"},
         {sweep_nonlocal, sweep_ladder, dicke, simulate}, {{dicke, "1"}}, "2"},
        {{"bath.beta", "inverse temperature: a number, inf, or calibrate"},
         {sweep_nonlocal, sweep_ladder, dicke, simulate}, {{dicke, "inf"}}, "calibrate"},
        {{"bath.gamma_zero", "zero-frequency rate override, or none"},
         {sweep_nonlocal, sweep_ladder, dicke, simulate}, {}, "none"},
        {{"bath.lamb_shift", "Lamb-shift table omega:Im(sigma),... or none"}, {simulate}, {}, "none"},
        {{"model.kind", "oracle or ladder"}, {simulate}, {}, "oracle"},
        {{"model.n", "qubit count"}, {simulate}, {}, "2"},
        {{"model.delta_e", "energy gap"}, {sweep_nonlocal, sweep_ladder, simulate}, {}, "1"},
        {{"model.omega0", "Dicke level splitting"}, {dicke}, {}, "1"},
        {{"model.solution", "solution bitstring: zeros, ones, or explicit bits"},
         {sweep_nonlocal, sweep_ladder, simulate}, {}, "zeros"},
        {{"model.energies", "explicit shell energies E_0,...,E_n, or none"}, {simulate}, {}, "none"},
        {{"coupling.kind", "projector, indirect, direct, hadamard or collective_bitflip"},
         {sweep_nonlocal, sweep_ladder, simulate}, {{sweep_ladder, "collective_bitflip"}}, "projector"},
        {{"coupling.lambda", "system-bath coupling strength"},
         {sweep_nonlocal, sweep_ladder, dicke, simulate}, {{dicke, "0.1"}}, "0.01"},
        {{"sweep.method", "rate, quantum or both"}, {sweep_nonlocal, sweep_ladder, dicke}, {}, "both"},
        {{"sweep.sizes", "comma-separated N (nonlocal) or n (ladder, Dicke)"},
         {sweep_nonlocal, sweep_ladder, dicke},
         {{sweep_nonlocal, "16,32,64,128,256,512,1024,2048,4096"},
          {sweep_ladder, "25,35,50,71,100,141,200,283,400"},
          {dicke, "20,40,80,160"}},
         ""},
        {{"sweep.init", "initial state: auto, uniform, coherent or top"}, {sweep_nonlocal, sweep_ladder}, {}, "auto"},
        {{"calibration.gibbs_target", "Gibbs ground population the temperature is tuned to"},
         {sweep_nonlocal, sweep_ladder, simulate}, {}, "0.95"},
        {{"calibration.threshold", "ground population that counts as relaxed"},
         {sweep_nonlocal, sweep_ladder}, {}, "0.9"},
        {{"simulate.engine", "reduced or oracle"}, {simulate}, {}, "reduced"},
        {{"simulate.method", "rate or quantum"}, {simulate}, {}, "rate"},
        {{"simulate.init", "uniform, coherent or top"}, {simulate}, {}, "uniform"},
        {{"simulate.include_lamb_shift", "add the Lamb-shift commutator (oracle engine)"}, {simulate}, {}, "false"},
        {{"simulate.t_end", "final time, 0 for five slowest relaxation times"}, {simulate}, {}, "0"},
        {{"simulate.points", "number of output times"}, {simulate}, {}, "101"},
        {{"output", "output path, - for stdout"}, {sweep_nonlocal, sweep_ladder, dicke, simulate, validate}, {}, "-"},
        {{"jobs", "worker threads"}, {sweep_nonlocal, sweep_ladder, dicke, simulate, validate}, {}, "1"},
    };
    return table;
}

const KeySpec* find_spec(std::string_view key) {
    for (const auto& s : specs())
        if (s.info.key == key) return &s;
    return nullptr;
}

bool applies(const KeySpec& s, Command c) {
    return std::find(s.commands.begin(), s.commands.end(), c) != s.commands.end();
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view text, std::string_view why) {
    throw ConfigError(fmt::format("{}: invalid value '{}' ({})", key, text, why));
}

double positive(std::string_view key, std::string_view text) {
    const double v = parse_double(key, text);
    if (!(v > 0.0) || !std::isfinite(v)) bad(key, text, "must be positive and finite");
    return v;
}

models::CouplingKind parse_kind(std::string_view key, std::string_view text) {
    if (text == "bitflip") return models::CouplingKind::collective_bitflip;
    try {
        return models::parse_coupling(text);
    } catch (const ConfigError&) {
        bad(key, text, "unknown coupling kind");
    }
}

std::optional<reduced::InitialState> parse_init(std::string_view key, std::string_view text, bool allow_auto) {
    if (allow_auto && text == "auto") return std::nullopt;
    try {
        return reduced::parse_initial_state(text);
    } catch (const ConfigError&) {
        bad(key, text, "expected uniform, coherent or top");
    }
}

BathSettings bath_settings(const Config& c) {
    BathSettings b;
    const auto& fam = c.get("bath.family");
    if (fam == "flat")
        b.family = bath::Family::flat;
    else if (fam == "ohmic")
        b.family = bath::Family::ohmic;
    else
        bad("bath.family", fam, "expected flat or ohmic");
    b.amplitude = positive("bath.amplitude", c.get("bath.amplitude"));
    const auto& beta = c.get("bath.beta");
    if (beta != "calibrate") {
        const double v = parse_double("bath.beta", beta);
        if (!(v > 0.0)) bad("bath.beta", beta, "must be positive");
        b.beta = v;
    }
    const auto& g0 = c.get("bath.gamma_zero");
    if (g0 != "none") {
        const double v = parse_double("bath.gamma_zero", g0);
        if (!(v >= 0.0) || !std::isfinite(v)) bad("bath.gamma_zero", g0, "must be finite and non-negative");
        b.gamma_zero = v;
    }
    if (c.command() == Command::simulate) {
        const auto& ls = c.get("bath.lamb_shift");
        if (ls != "none") {
            for (auto item : split(ls, ',')) {
                const auto parts = split(item, ':');
                if (parts.size() != 2) bad("bath.lamb_shift", ls, "entries are omega:value");
                b.lamb_shift.set(parse_double("bath.lamb_shift", parts[0]),
                                 {0.0, parse_double("bath.lamb_shift", parts[1])});
            }
        }
    }
    return b;
}

SolutionSpec solution_spec(const std::string& text) {
    SolutionSpec s;
    if (text == "zeros") return s;
    if (text == "ones") {
        s.kind = SolutionSpec::Kind::ones;
        return s;
    }
    if (text.empty() || text.find_first_not_of("01") != std::string::npos)
        bad("model.solution", text, "expected zeros, ones or a bitstring");
    s.kind = SolutionSpec::Kind::explicit_bits;
    s.bits = text;
    return s;
}

std::size_t jobs(const Config& c) {
    const long long j = parse_int("jobs", c.get("jobs"));
    if (j < 1 || j > 1024) bad("jobs", c.get("jobs"), "must be in [1, 1024]");
    return static_cast<std::size_t>(j);
}

void check_increasing(std::string_view key, const std::vector<long long>& v) {
    if (v.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1]) throw ConfigError(fmt::format("{}: sizes must be strictly increasing", key));
}

} // namespace

std::string_view to_string(Command command) noexcept {
    switch (command) {
        case sweep_nonlocal: return "sweep-nonlocal";
        case sweep_ladder: return "sweep-ladder";
        case dicke: return "dicke";
        case simulate: return "simulate";
        case validate: return "validate";
    }
    return "?";
}

const std::vector<KeyInfo>& keys() {
    static const std::vector<KeyInfo> out = [] {
        std::vector<KeyInfo> v;
        for (const auto& s : specs()) v.push_back(s.info);
        return v;
    }();
    return out;
}

std::vector<KeyInfo> keys(Command command) {
    std::vector<KeyInfo> v;
    for (const auto& s : specs())
        if (applies(s, command)) v.push_back(s.info);
    return v;
}

Config::Config(Command command) : command_(command) {
    for (const auto& s : specs()) {
        if (!applies(s, command)) continue;
        const auto it = s.defaults.find(command);
        values_[s.info.key] = it != s.defaults.end() ? it->second : s.fallback;
    }
}

void Config::set(std::string_view key, std::string_view value) {
    const KeySpec* spec = find_spec(key);
    if (!spec) throw ConfigError(fmt::format("unknown config key '{}'", key));
    if (!applies(*spec, command_))
        throw ConfigError(fmt::format("config key '{}' does not apply to {}", key, to_string(command_)));
    values_[std::string(key)] = std::string(trim(value));
}

void Config::load_text(std::string_view text, const std::string& origin) {
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("{}:{}: expected key=value", origin, line_no));
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path);
}

const std::string& Config::get(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(fmt::format("config key '{}' is not available for {}", key, to_string(command_)));
    return it->second;
}

std::vector<std::pair<std::string, std::string>> Config::resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : specs())
        if (applies(s, command_)) out.emplace_back(s.info.key, values_.at(s.info.key));
    return out;
}

double parse_double(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || std::isnan(v)) bad(key, text, "not a number");
    return v;
}

long long parse_int(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad(key, text, "not an integer");
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    bad(key, text, "expected true or false");
}

std::vector<long long> parse_int_list(std::string_view key, std::string_view text) {
    std::vector<long long> out;
    for (auto item : split(text, ',')) out.push_back(parse_int(key, item));
    return out;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    for (auto item : split(text, ',')) out.push_back(parse_double(key, item));
    return out;
}

std::vector<reduced::Method> methods(MethodSelection selection) {
    switch (selection) {
        case MethodSelection::rate: return {reduced::Method::rate};
        case MethodSelection::quantum: return {reduced::Method::quantum};
        case MethodSelection::both: return {reduced::Method::rate, reduced::Method::quantum};
    }
    return {};
}

models::StateIndex SolutionSpec::resolve(unsigned n) const {
    switch (kind) {
        case Kind::zeros: return 0;
        case Kind::ones: return n >= 64 ? ~models::StateIndex{0} : (models::StateIndex{1} << n) - 1;
        case Kind::explicit_bits:
            if (bits.size() != n)
                throw ConfigError(fmt::format("model.solution has {} bits but the model has {} qubits", bits.size(), n));
            return models::parse_bitstring(bits, n);
    }
    return 0;
}

bath::BathSpectrum BathSettings::spectrum(double beta) const {
    const auto density = family == bath::Family::flat ? bath::SpectralDensity::flat(amplitude, gamma_zero)
                                                      : bath::SpectralDensity::ohmic(amplitude, gamma_zero);
    return bath::BathSpectrum(beta, density, lamb_shift);
}

SweepSettings sweep_settings(const Config& c) {
    if (c.command() != sweep_nonlocal && c.command() != sweep_ladder)
        throw ConfigError("sweep settings requested for a non-sweep command");
    SweepSettings s;
    s.command = c.command();
    s.kind = parse_kind("coupling.kind", c.get("coupling.kind"));
    const bool ladder = c.command() == sweep_ladder;
    if (ladder && s.kind != models::CouplingKind::collective_bitflip)
        bad("coupling.kind", c.get("coupling.kind"), "ladder sweeps use the collective_bitflip coupling");
    if (!ladder && !models::is_nonlocal(s.kind))
        bad("coupling.kind", c.get("coupling.kind"), "nonlocal sweeps take projector, indirect, direct or hadamard");

    const auto& m = c.get("sweep.method");
    if (m == "rate")
        s.method = MethodSelection::rate;
    else if (m == "quantum")
        s.method = MethodSelection::quantum;
    else if (m == "both")
        s.method = MethodSelection::both;
    else
        bad("sweep.method", m, "expected rate, quantum or both");

    const auto sizes = parse_int_list("sweep.sizes", c.get("sweep.sizes"));
    check_increasing("sweep.sizes", sizes);
    for (long long v : sizes) {
        if (ladder && (v < 1 || v > 1000)) bad("sweep.sizes", c.get("sweep.sizes"), "ladder sizes n lie in [1, 1000]");
        if (!ladder && (v < 2 || v > (1LL << 40) || (v & (v - 1)) != 0))
            bad("sweep.sizes", c.get("sweep.sizes"), "N must be a power of two in [2, 2^40]");
        s.sizes.push_back(static_cast<std::uint64_t>(v));
    }

    s.init = parse_init("sweep.init", c.get("sweep.init"), true);
    if (s.init == reduced::InitialState::top_shell && !ladder)
        bad("sweep.init", c.get("sweep.init"), "top is a ladder state");
    s.bath = bath_settings(c);
    s.lambda = positive("coupling.lambda", c.get("coupling.lambda"));
    s.delta_e = positive("model.delta_e", c.get("model.delta_e"));
    s.solution = solution_spec(c.get("model.solution"));
    s.calibration.gibbs_target = parse_double("calibration.gibbs_target", c.get("calibration.gibbs_target"));
    s.calibration.threshold = parse_double("calibration.threshold", c.get("calibration.threshold"));
    s.calibration.validate();
    s.jobs = jobs(c);
    return s;
}

DickeSettings dicke_settings(const Config& c) {
    if (c.command() != dicke) throw ConfigError("Dicke settings requested for another command");
    DickeSettings s;
    const auto sizes = parse_int_list("sweep.sizes", c.get("sweep.sizes"));
    check_increasing("sweep.sizes", sizes);
    for (long long v : sizes) {
        if (v < 1 || v > 1000) bad("sweep.sizes", c.get("sweep.sizes"), "Dicke sizes n lie in [1, 1000]");
        s.sizes.push_back(static_cast<unsigned>(v));
    }
    if (c.get("bath.family") != "flat") bad("bath.family", c.get("bath.family"), "the Dicke run uses g(omega0) directly");
    s.g = positive("bath.amplitude", c.get("bath.amplitude"));
    s.omega0 = positive("model.omega0", c.get("model.omega0"));
    s.lambda = positive("coupling.lambda", c.get("coupling.lambda"));
    const auto& beta = c.get("bath.beta");
    s.beta = parse_double("bath.beta", beta);
    if (!(s.beta > 0.0)) bad("bath.beta", beta, "must be positive");
    const auto& method = c.get("sweep.method");
    if (method != "both") bad("sweep.method", method, "the Dicke run always reports both methods");
    s.jobs = jobs(c);
    return s;
}

SimulateSettings simulate_settings(const Config& c) {
    if (c.command() != simulate) throw ConfigError("simulate settings requested for another command");
    SimulateSettings s;
    const auto& engine = c.get("simulate.engine");
    if (engine == "reduced")
        s.engine = SimulateSettings::Engine::reduced;
    else if (engine == "oracle")
        s.engine = SimulateSettings::Engine::oracle;
    else
        bad("simulate.engine", engine, "expected reduced or oracle");
    const auto& model = c.get("model.kind");
    if (model == "oracle")
        s.model = SimulateSettings::Model::oracle;
    else if (model == "ladder")
        s.model = SimulateSettings::Model::ladder;
    else
        bad("model.kind", model, "expected oracle or ladder");

    s.kind = parse_kind("coupling.kind", c.get("coupling.kind"));
    const bool ladder = s.model == SimulateSettings::Model::ladder;
    if (ladder != (s.kind == models::CouplingKind::collective_bitflip))
        bad("coupling.kind", c.get("coupling.kind"), "ladders take collective_bitflip, the oracle the nonlocal kinds");
    try {
        s.method = reduced::parse_method(c.get("simulate.method"));
    } catch (const ConfigError&) {
        bad("simulate.method", c.get("simulate.method"), "expected rate or quantum");
    }
    s.init = *parse_init("simulate.init", c.get("simulate.init"), false);
    if (s.init == reduced::InitialState::top_shell && !ladder)
        bad("simulate.init", c.get("simulate.init"), "top is a ladder state");

    const long long n = parse_int("model.n", c.get("model.n"));
    const long long max_n = s.engine == SimulateSettings::Engine::oracle ? 8 : (ladder ? 1000 : 40);
    if (n < 1 || n > max_n) bad("model.n", c.get("model.n"), fmt::format("must be in [1, {}] here", max_n));
    s.n = static_cast<unsigned>(n);
    s.delta_e = positive("model.delta_e", c.get("model.delta_e"));
    if (c.get("model.energies") != "none") {
        if (!ladder) bad("model.energies", c.get("model.energies"), "explicit energies need a ladder model");
        s.shell_energies = parse_double_list("model.energies", c.get("model.energies"));
        if (s.shell_energies.size() != s.n + 1)
            bad("model.energies", c.get("model.energies"), "need n+1 shell energies");
        for (std::size_t i = 1; i < s.shell_energies.size(); ++i)
            if (s.shell_energies[i] < s.shell_energies[i - 1])
                bad("model.energies", c.get("model.energies"), "energies must be non-decreasing");
    }
    s.w = solution_spec(c.get("model.solution")).resolve(s.n);
    s.bath = bath_settings(c);
    // Every nonlocal coupling has zero-frequency terms in the full master equation.
    if (s.engine == SimulateSettings::Engine::oracle && !ladder && s.bath.family == bath::Family::flat &&
        !s.bath.gamma_zero)
        bad("bath.gamma_zero", c.get("bath.gamma_zero"), "the oracle engine needs a finite zero-frequency rate");
    if (!s.bath.lamb_shift.empty() && s.engine != SimulateSettings::Engine::oracle)
        bad("bath.lamb_shift", c.get("bath.lamb_shift"), "the Lamb shift only enters the oracle engine");
    s.lambda = positive("coupling.lambda", c.get("coupling.lambda"));
    s.gibbs_target = parse_double("calibration.gibbs_target", c.get("calibration.gibbs_target"));
    if (!(s.gibbs_target > 0.0 && s.gibbs_target < 1.0))
        bad("calibration.gibbs_target", c.get("calibration.gibbs_target"), "must lie in (0, 1)");
    s.include_lamb_shift = parse_bool("simulate.include_lamb_shift", c.get("simulate.include_lamb_shift"));
    s.t_end = parse_double("simulate.t_end", c.get("simulate.t_end"));
    if (!(s.t_end >= 0.0) || !std::isfinite(s.t_end)) bad("simulate.t_end", c.get("simulate.t_end"), "must be >= 0");
    const long long pts = parse_int("simulate.points", c.get("simulate.points"));
    if (pts < 2 || pts > 1000000) bad("simulate.points", c.get("simulate.points"), "must be in [2, 1e6]");
    s.points = static_cast<std::size_t>(pts);
    return s;
}

} // namespace relax::config
