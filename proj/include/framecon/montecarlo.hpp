#ifndef FRAMECON_MONTECARLO_HPP
#define FRAMECON_MONTECARLO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "framecon/bounds.hpp"
#include "framecon/rng.hpp"
#include "framecon/samplers.hpp"

namespace framecon::mc {

enum class TailStatistic { OpDev, FroDev, MaxRowDevAdditive };

std::string to_string(TailStatistic s);
TailStatistic tail_statistic_from_string(const std::string& name);

enum class SweepKind { None, N, Eps };

struct ExperimentConfig {
    samplers::EnsembleSpec spec;
    TailStatistic statistic = TailStatistic::OpDev;
    double eps = 0;  // tail threshold for the statistic
    long trials = 1;
    std::uint64_t master_seed = 0;
    SweepKind sweep_kind = SweepKind::None;
    std::vector<double> sweep;  // n values or eps values, strictly increasing
    double ci_level = 0.95;
    int workers = 1;
    double ball_fro_c = 1.0;  // constant for the ball Frobenius bound

    void validate() const;  // throws std::invalid_argument
};

// One Monte Carlo sweep row. `trials` counts trials that produced a sample
// (failed-to-sample trials are excluded from the denominator and tallied in
// sampling_failures, which is not part of the CSV schema).
struct ExperimentRecord {
    std::string model;
    std::string norm_or_stat;
    int d = 0;
    long n = 0;
    double eps = 0;
    long trials = 0;
    long successes = 0;
    double p_hat = 0;
    double ci_low = 0;
    double ci_high = 0;
    double bound_raw = 0;
    double bound_clamped = 0;
    bool bound_valid = false;
    std::uint64_t seed = 0;

    long sampling_failures = 0;  // side tally, not serialized
};

// Fields of the CSV schema compared (seed and counts exactly, reals bitwise
// after a 17-significant-digit round trip).
bool schema_fields_equal(const ExperimentRecord& a, const ExperimentRecord& b);

double normal_quantile(double p);

struct WilsonInterval {
    double low = 0;
    double high = 1;
};

// Wilson score interval at two-sided confidence `level`; accurate near
// proportion 0, where these experiments live.
WilsonInterval wilson_interval(long successes, long trials, double level);

// Half-width of the one-sided Wilson bound at the given one-sided level,
// measured from p_hat upward: wilson_upper(successes, trials, level) - p_hat.
double wilson_upper_radius(long successes, long trials, double one_sided_level);

// Estimate P(statistic >= eps) over config.trials independent frames, each
// drawn from SeedPath(master_seed, trial_index, stream_index). The paired
// theoretical bound for (model, statistic) is evaluated on the same
// parameters; pairings with no closed form yield bound_valid = false.
ExperimentRecord estimate_tail(const ExperimentConfig& config);

struct ExpectationStatistic {
    enum class Kind { FrameOperatorEntry, MaxRowNorm, SqNorm } kind = Kind::SqNorm;
    int j = 0;  // FrameOperatorEntry row
    int k = 0;  // FrameOperatorEntry column
};

struct MeanStdErr {
    double mean = 0;
    double std_error = 0;
};

// Sample mean and standard error of a per-frame statistic over `trials`
// frames. SqNorm averages ||x_i||^2 over the frame's vectors.
MeanStdErr estimate_expectation(const samplers::EnsembleSpec& spec,
                                const ExpectationStatistic& statistic, long trials,
                                const rng::SeedPath& seed, int workers = 1);

// One record per sweep value; sweep point k uses stream_index k, so records
// are independent and deterministic for any worker count. Per-point sampler
// exhaustion is recorded in-row and the sweep continues.
std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& config);

extern const char* const kCsvHeader;

void emit_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
std::string csv_string(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> parse_csv(const std::filesystem::path& path);

// Static SVG line chart: empirical series with CI band plus theoretical
// bound series; optional log-scale vertical axis.
void emit_plot(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path,
               bool log_y = true);

}  // namespace framecon::mc

#endif
