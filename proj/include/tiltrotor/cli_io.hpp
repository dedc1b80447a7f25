#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltrotor/airframe.hpp"
#include "tiltrotor/control.hpp"
#include "tiltrotor/corridor.hpp"
#include "tiltrotor/sim.hpp"

namespace tiltrotor {

// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitRunFailed = 1,
    kExitParseError = 2,
    kExitInvalidConfig = 3,
    kExitUsage = 64,
};

struct RandomGusts {
    int count = 0;
    double max_force_N = 0.0;
    double max_moment_Nm = 0.0;
    double duration_s = 2.0;
};

struct CorridorSettings {
    GridSpec grid;
    double margin_frac = 0.10;
    ScheduleOptions schedule;
};

struct RunConfig {
    AircraftConfig aircraft;
    GainSchedule gains = default_gain_schedule();
    ControlConfig control;
    CorridorSettings corridor;
    std::vector<Scenario> scenarios;
    std::map<std::string, RandomGusts> random_gusts;  // by scenario name
    std::string output_directory = "out";
    std::uint64_t seed = 0;

    const Scenario* find_scenario(const std::string& name) const;
};

// Built-in defaults; identical to the shipped config/default.yaml.
RunConfig default_run_config();

// The stock scenarios: transition, heli/fw altitude steps, heli pitch step
// and a 60 s hover hold.
std::vector<Scenario> default_scenarios();

class ConfigParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigInvalid : public std::runtime_error {
public:
    explicit ConfigInvalid(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

// Every violated invariant across all sections.
std::vector<std::string> validate(const RunConfig& rc);

RunConfig load_config(const std::string& path);
RunConfig load_config_text(const std::string& yaml_text);

// Corridor and controller context for a validated config. Random gust
// templates are expanded into the scenarios here, seeded by rc.seed.
RunContext make_context(const RunConfig& rc);
Scenario expand_disturbances(const Scenario& sc, const RunConfig& rc);

// Override one named numeric parameter; throws std::invalid_argument for an
// unknown name. Names are listed by sweep_parameters().
void set_parameter(RunConfig& rc, const std::string& name, double value);
std::vector<std::string> sweep_parameters();

struct TraceColumn {
    std::string name;
    std::function<double(const TraceRow&)> value;
};

// Numeric trace columns in file order; the mode column follows time_s.
const std::vector<TraceColumn>& trace_columns();
inline constexpr const char* kTraceFormat = "# tiltrotor-trace v1";

std::string format_double(double v);

void write_trace_csv(const std::string& path, const SimTrace& trace);
void write_corridor_csv(const std::string& path, const Corridor& c);
void write_summary(const std::string& path, const SimTrace& trace, const MetricReport& m);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

// RFC-4180 reader; lines starting with '#' before the header are skipped.
CsvTable read_csv(const std::string& path);

// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

int cli(int argc, const char* const* argv);

}  // namespace tiltrotor
