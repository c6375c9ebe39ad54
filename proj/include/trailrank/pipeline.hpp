#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trailrank/describe.hpp"
#include "trailrank/embed.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/synth.hpp"

namespace trailrank {

struct PipelineConfig {
    std::filesystem::path workdir = "trailrank-work";
    // Inputs. Empty paths fall back to the synthetic corpus under workdir/corpus.
    std::filesystem::path routes;
    std::filesystem::path layers;
    std::filesystem::path dem;
    std::filesystem::path places;
    std::optional<std::filesystem::path> queries;

    ProviderSpec provider;
    DescriptionConfig description;
    SynthSpec synth;
    double sample_step = kDefaultSampleStep;
    bool thin = false;
    int jobs = 1;

    /// Reads an INI file with sections [paths], [provider], [description],
    /// [synth], [evaluate] and [run]. Relative paths resolve against the
    /// file's directory. Throws InvalidArgument for unknown keys or bad values.
    static PipelineConfig from_ini(const std::filesystem::path& path);

    /// TRAILRANK_WORKDIR, when set, replaces the workdir.
    void apply_environment();

    bool uses_synthetic_corpus() const noexcept { return routes.empty(); }
    std::filesystem::path corpus_dir() const { return workdir / "corpus"; }
    std::filesystem::path routes_path() const;
    std::filesystem::path layers_path() const;
    std::filesystem::path dem_path() const;
    std::filesystem::path places_path() const;
};

enum class Stage { Synth, Attributes, Describe, Embed, Rank, Evaluate };

std::string_view stage_name(Stage s) noexcept;
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

struct StageOutcome {
    Stage stage;
    bool skipped = false;
};

/// Error raised by a stage; carries the stage for diagnostics.
class StageError : public Error {
public:
    StageError(Stage stage, const Error& cause);
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

/// Exit status for an error: 1 usage, 2 data, 3 provider.
int exit_code_for(Errc code) noexcept;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitProvider = 3;

/// Owns the workdir for its lifetime (exclusive lock file).
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    /// Runs one stage; skipped when its outputs are newer than its inputs and
    /// the recorded config fingerprint matches, unless `force`.
    StageOutcome run(Stage stage, bool force = false);

    /// Whole chain. The synth stage runs only when no input routes are configured.
    std::vector<StageOutcome> run_all(bool force = false);

    const PipelineConfig& config() const noexcept { return config_; }

    // Workdir artifacts.
    std::filesystem::path attributes_path() const { return config_.workdir / "attributes.tsv"; }
    std::filesystem::path rejected_path() const { return config_.workdir / "rejected.tsv"; }
    std::filesystem::path descriptions_path() const { return config_.workdir / "descriptions.jsonl"; }
    std::filesystem::path embeddings_path() const { return config_.workdir / "embeddings.trv"; }
    std::filesystem::path rankings_path() const { return config_.workdir / "rankings.tsv"; }
    std::filesystem::path curves_path() const { return config_.workdir / "curves.csv"; }
    std::filesystem::path report_path() const { return config_.workdir / "report.json"; }
    std::filesystem::path plot_path(std::string_view attribute) const;

private:
    std::vector<std::filesystem::path> inputs(Stage s) const;
    std::vector<std::filesystem::path> outputs(Stage s) const;
    std::string fingerprint(Stage s) const;
    bool up_to_date(Stage s) const;
    void record(Stage s) const;
    void execute(Stage s);

    void run_synth();
    void run_attributes();
    void run_describe();
    void run_embed();
    void run_rank();
    void run_evaluate();

    PipelineConfig config_;
    int lock_fd_ = -1;
};

}  // namespace trailrank
