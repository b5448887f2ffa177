// config.hpp: key=value configuration shared by the CLI subcommands
//
// Every key has a default per subcommand; a config file and command-line flags
// override them in that order. Unknown keys and out-of-range values are rejected
// before anything is computed.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relax/analysis.hpp"
#include "relax/bath.hpp"
#include "relax/models.hpp"
#include "relax/reduced.hpp"

namespace relax::config {

enum class Command { sweep_nonlocal, sweep_ladder, dicke, simulate, validate };

std::string_view to_string(Command command) noexcept;

struct KeyInfo {
    std::string key;
    std::string help;
};

// All recognized keys, in the order they are written to CSV headers.
const std::vector<KeyInfo>& keys();
// Keys accepted by one command.
std::vector<KeyInfo> keys(Command command);

class Config {
public:
    explicit Config(Command command);

    Command command() const noexcept { return command_; }
    // Throws ConfigError for unknown keys.
    void set(std::string_view key, std::string_view value);
    // Lines of key=value; '#' starts a comment.
    void load_file(const std::string& path);
    void load_text(std::string_view text, const std::string& origin = "<text>");

    const std::string& get(std::string_view key) const;
    // Fully resolved key/value pairs for the CSV header.
    std::vector<std::pair<std::string, std::string>> resolved() const;

private:
    Command command_;
    std::map<std::string, std::string, std::less<>> values_;
};

// Value parsers; all throw ConfigError with the key name on failure.
double parse_double(std::string_view key, std::string_view text);
long long parse_int(std::string_view key, std::string_view text);
bool parse_bool(std::string_view key, std::string_view text);
std::vector<long long> parse_int_list(std::string_view key, std::string_view text);
std::vector<double> parse_double_list(std::string_view key, std::string_view text);

enum class MethodSelection { rate, quantum, both };

std::vector<reduced::Method> methods(MethodSelection selection);

// Solution bitstring policy for sweeps over several sizes.
struct SolutionSpec {
    enum class Kind { zeros, ones, explicit_bits } kind{Kind::zeros};
    std::string bits;
    models::StateIndex resolve(unsigned n) const;
};

struct BathSettings {
    bath::Family family{bath::Family::flat};
    double amplitude{2.0};
    std::optional<double> beta;  // empty: calibrate per size
    std::optional<double> gamma_zero;
    bath::LambShiftTable lamb_shift;

    bath::BathSpectrum spectrum(double beta) const;
};

struct SweepSettings {
    Command command{Command::sweep_nonlocal};
    models::CouplingKind kind{models::CouplingKind::projector};
    MethodSelection method{MethodSelection::both};
    std::vector<std::uint64_t> sizes;  // N for nonlocal sweeps, n for ladders
    std::optional<reduced::InitialState> init;  // empty: uniform for rate, coherent for quantum
    BathSettings bath;
    double lambda{0.01};
    double delta_e{1.0};
    SolutionSpec solution;
    analysis::CalibrationTarget calibration;
    std::size_t jobs{1};
};

struct DickeSettings {
    std::vector<unsigned> sizes;
    double omega0{1.0};
    double lambda{0.1};
    double g{1.0};
    double beta{bath::kZeroTemperature};
    std::size_t jobs{1};
};

struct SimulateSettings {
    enum class Engine { reduced, oracle } engine{Engine::reduced};
    enum class Model { oracle, ladder } model{Model::oracle};
    models::CouplingKind kind{models::CouplingKind::projector};
    reduced::Method method{reduced::Method::rate};
    reduced::InitialState init{reduced::InitialState::uniform_diagonal};
    unsigned n{2};
    double delta_e{1.0};
    std::vector<double> shell_energies;  // empty: equidistant
    models::StateIndex w{0};
    BathSettings bath;
    double lambda{0.01};
    double gibbs_target{0.95};
    bool include_lamb_shift{false};
    double t_end{0.0};  // 0: five relaxation times of the slowest mode
    std::size_t points{101};
};

SweepSettings sweep_settings(const Config& config);
DickeSettings dicke_settings(const Config& config);
SimulateSettings simulate_settings(const Config& config);

} // namespace relax::config
