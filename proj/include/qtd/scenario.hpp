#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"

#include "qtd/equilibrium.hpp"
#include "qtd/propagator_models.hpp"

namespace qtd::scenario {

inline constexpr const char* kSchemaVersion = "qtdsim-scenario/1";
inline constexpr const char* kReportSchemaVersion = "qtdsim-report/1";
/// Default output directory when neither the config nor the CLI names one.
inline constexpr const char* kOutputDirEnv = "QTDSIM_OUT_DIR";

enum class SystemKind { undecomposed, bipartite };
enum class TemperatureMode { prescribed, extracted };
enum class PolicyKind { none, separation, reservoir, constrained };

/// Fully resolved scenario: operators built, protocols parsed, defaults
/// applied. `resolved` holds the normalized JSON image of the config.
struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 0;
    bool seed_given = false;
    Constants consts;
    double z_constant = 1.0;

    SystemKind kind = SystemKind::bipartite;
    HilbertDims dims{1, 1};
    int dim = 0;

    HamiltonianTriple triple;
    HamiltonianProtocol hamiltonian;
    Matrix h2_sub_static;  // reservoir Hamiltonian block, when applicable

    DensityOperator initial;

    PolicyKind policy = PolicyKind::none;
    PropagatorSupport support = PropagatorSupport::full;
    double separation_rate = 1.0;
    int separation_target = 0;  // 0 = both sub-systems, else 1 or 2
    Protocol t_hr;

    TemperatureMode temp_mode = TemperatureMode::prescribed;
    Protocol theta, theta1, theta2, t_box, t1, t2;
    std::optional<Protocol> t12, theta12;

    ConstitutiveOmega omega_ex, omega_int;

    double t_end = 1.0;
    double dt = 1e-3;
    int record_every = 1;
    double inequality_tol = 1e-9;
    double partition_tol = 1e-10;
    double abort_negativity = 1e-8;

    std::string out_dir;
    std::string basename;

    nlohmann::ordered_json resolved;

    Temperatures temps_at(double t) const;
};

struct ValidationError {
    std::string path;
    std::string message;
};

struct ValidationResult {
    std::optional<ScenarioConfig> config;
    std::vector<ValidationError> errors;
    std::vector<ValidationError> warnings;  // non-fatal
    bool ok() const { return config.has_value(); }
};

ValidationResult validate_file(const std::string& path);
ValidationResult validate_json(const nlohmann::ordered_json& j, const std::string& name_hint);

struct InvariantSummary {
    std::string name;
    int violations = 0;
    double worst = 0.0;  // most negative margin (bounds) / largest |residual|
    std::optional<double> first_violation_time;
};

struct RunReport {
    std::string name;
    bool ok = false;
    std::string error;
    int steps = 0;
    int rows = 0;
    std::vector<InvariantSummary> invariants;
    EquilibriumReport final_equilibrium;
    double wall_seconds = 0.0;  // stdout only, never serialized
    std::filesystem::path csv_path;
    std::filesystem::path report_path;
};

/// Integrates the scenario, writes `<basename>.csv` and
/// `<basename>.report.json` under the output directory.
RunReport run(const ScenarioConfig& config);
RunReport run_file(const std::string& path, const std::string& out_override = "");

/// Runs every config the glob matches (wildcards in the filename component),
/// optionally in parallel; one failure does not abort the rest. Reports come
/// back sorted by path regardless of the worker count.
std::vector<RunReport> batch(const std::string& glob, int jobs,
                             const std::string& out_override = "");

/// Documented CSV column order (after the leading t column).
const std::vector<std::string>& csv_columns(SystemKind kind);

nlohmann::ordered_json report_to_json(const RunReport& report);

}  // namespace qtd::scenario
