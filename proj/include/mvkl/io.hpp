#pragma once

#include "mvkl/solver.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvkl {

struct RegionDecl {
    int dim = 1;
    // Per-axis [lo, hi] bounds; needed for meshing and enables membership checks.
    std::vector<std::pair<double, double>> box;

    bool operator==(const RegionDecl&) const = default;
};

struct BetweenViewRecipe {
    int views = 1;
    int dim_y = 1;

    bool operator==(const BetweenViewRecipe&) const = default;
};

struct RegularizerRecipe {
    bool within_view = false;
    std::optional<BetweenViewRecipe> between_view;
    std::optional<double> sigma_graph;  // defaults to the kernel sigma
    std::optional<double> epsilon;
    bool normalized = false;
    std::optional<double> gamma_B;  // defaults to 0
    std::optional<double> gamma_W;  // defaults to gamma_I

    bool operator==(const RegularizerRecipe&) const = default;
};

struct MeshRequest {
    int region = 1;
    int grid = 50;
    int component = 0;

    bool operator==(const MeshRequest&) const = default;
};

struct OutputSpec {
    std::string report = "report.json";
    std::string trace = "trace.csv";
    std::string mesh_prefix = "mesh";
    std::vector<MeshRequest> meshes;

    bool operator==(const OutputSpec&) const = default;
};

// Declarative run description, as read from the configuration file.
struct RunConfig {
    int ambient_dim = 0;
    std::vector<Vector> points;
    std::vector<int> point_regions;  // empty: untagged
    std::vector<int> dims;           // empty: from regions, else 1
    std::vector<int> label_dims;     // empty: same as dims
    std::vector<Vector> labels;      // labeled points come first
    std::vector<Matrix> combination; // empty: identity
    LossKind loss = LossKind::LeastSquares;
    double gamma_A = 1.0;
    double gamma_I = 0.0;
    KernelConfig kernel;
    std::map<int, RegionDecl> regions;
    RegularizerRecipe regularizer;
    SolveConfig solve;
    OutputSpec outputs;
};

/// Parse a configuration document. Relative CSV paths resolve against base_dir.
/// Throws ValidationError naming the offending field path.
[[nodiscard]] RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

[[nodiscard]] RunConfig read_config(const std::filesystem::path& path);

// Serialize with all data inlined; parse_config(write_config(c)) == c.
[[nodiscard]] std::string write_config(const RunConfig& cfg);

// Intermediate regularizer products, kept for diagnostics.
struct RegularizerParts {
    std::optional<GraphWeights> weights;
    std::optional<LaplacianMatrix> laplacian;
    std::optional<RegularizerOperator> between;
    std::optional<RegularizerOperator> within;
    RegularizerOperator combined;
};

[[nodiscard]] SpaceDims resolve_dims(const RunConfig& cfg);
[[nodiscard]] std::vector<InputPoint> resolve_points(const RunConfig& cfg);
[[nodiscard]] RegularizerParts build_regularizer(const RunConfig& cfg);

/// Validated problem, with M assembled from the regularizer recipe.
[[nodiscard]] ProblemSpec build_problem(const RunConfig& cfg);

// Text renderings. Every float is printed with 17 significant digits.
[[nodiscard]] std::string format_real(double x);
[[nodiscard]] std::string report_to_text(const SolveReport& r);
[[nodiscard]] SolveReport report_from_text(std::string_view text);
[[nodiscard]] std::string trace_to_csv(const SolveReport& r);
[[nodiscard]] std::string check_diagnostics(const RunConfig& cfg, const ProblemSpec& spec);

struct MeshData {
    MeshRequest request;
    std::string filename;
    std::string csv;
};

[[nodiscard]] std::vector<MeshData> render_meshes(const RunConfig& cfg, const ProblemSpec& spec,
                                                  const CoefficientVector& a);

// Writes report, trace and mesh files into out_dir; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const RunConfig& cfg, const ProblemSpec& spec,
                                                 const SolveReport& report,
                                                 const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> write_meshes(const RunConfig& cfg, const ProblemSpec& spec,
                                                const CoefficientVector& a,
                                                const std::filesystem::path& out_dir);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mvkl
