// JSON run configuration. Every block is optional; unknown keys and
// mistyped values raise Error(config) with the offending line.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "downwash/dynamic_sim.hpp"
#include "downwash/field_analysis.hpp"
#include "downwash/interaction_loads.hpp"
#include "downwash/jet_model.hpp"
#include "downwash/scaling_fit.hpp"

namespace downwash::io {

enum class OutputUnits { normalized, si };

OutputUnits parse_output_units(std::string_view text);

struct NearFieldOverrides {
    std::optional<double> rotor_jet_peak;
    std::optional<double> annulus_inner_fraction;
    std::optional<double> jet_width_sigma;
    std::optional<double> inflow_peak_fraction;
    std::optional<double> blend_window;

    NearFieldConfig apply(NearFieldConfig base) const;
};

struct FieldOptions {
    GridSpec grid;
    long frames = 1;            // noisy frames averaged when noise_sigma > 0
    double noise_sigma = 0.0;   // per-frame Gaussian noise, fraction of u0
    bool svg = true;
};

struct AnalyzeOptions {
    std::string input;  // default: <out>/field.csv
    double merge_eps = 0.02;
    int merge_window = 3;
    double slope_tolerance = 0.02;
    std::vector<double> collapse_stations{7, 8, 9, 10, 11, 12};
    double xi_max = 2.0;
};

struct FitOptions {
    std::string input;  // stations or field csv; default: <out>/stations.csv
    FitRange range;
    bool inverse_variance = true;
    int min_stations = 3;
};

struct LoadQuery {
    double dx = 0.0;
    double dz = 0.0;
    std::optional<Vehicle> vehicle;  // both when unset
};

struct LoadsOptions {
    std::string input;       // default: $DOWNWASH_DATA_DIR/loads.csv
    bool synthetic = false;  // use the anchored synthetic grid instead of a file
    OutOfRange policy = OutOfRange::asymptotic;
    std::vector<LoadQuery> queries{{0.0, 4.0, std::nullopt}};
    std::vector<double> sweep_dx;
    std::vector<double> sweep_dz;
};

struct EnvelopeOptions {
    Vehicle vehicle = Vehicle::lower;
    double threshold = 0.98;
    double std_threshold = 0.0;  // 0 selects 5 % of the surface maximum
    bool deficit = true;         // report the momentum-deficit rank correlation
};

enum class LagKind { wake, none };

struct DynsimOptions {
    DynamicProfile profile;
    LagKind lag = LagKind::wake;
    double gain = 1.0;
    int substeps = 8;
    Vehicle vehicle = Vehicle::lower;
    int bins = 72;
};

struct IngestOptions {
    std::string kind = "field";  // field | loads | synthetic-loads
    std::string source;
    std::map<std::string, std::string> columns;  // canonical name -> source column
    std::map<std::string, double> scale;         // canonical name -> factor
    std::vector<std::string> ignore;
    std::optional<LengthUnit> length_unit;
    std::optional<VelocityUnit> velocity_unit;
    std::optional<long> frame_count;
    std::optional<long> trials;
};

struct RunConfig {
    std::filesystem::path origin;  // config file, empty when defaults are used
    VehicleGeometry vehicle;
    Environment environment;
    JetScaling scaling;
    std::string scaling_from_fit;  // path of a fit JSON replacing `scaling`
    NearFieldOverrides near_field;
    std::optional<OutputUnits> units;
    FieldOptions field;
    AnalyzeOptions analyze;
    FitOptions fit;
    LoadsOptions loads;
    EnvelopeOptions envelope;
    DynsimOptions dynsim;
    IngestOptions ingest;
};

/// Parses and validates configuration text. `origin` names the source in messages.
RunConfig parse_config(std::string_view text, const std::filesystem::path& origin);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace downwash::io
