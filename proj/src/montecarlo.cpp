#include "framecon/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "framecon/frame.hpp"

namespace framecon::mc {

std::string to_string(TailStatistic s) {
    switch (s) {
        case TailStatistic::OpDev: return "op_dev";
        case TailStatistic::FroDev: return "fro_dev";
        case TailStatistic::MaxRowDevAdditive: return "max_row_dev_additive";
    }
    return "?";
}

TailStatistic tail_statistic_from_string(const std::string& name) {
    if (name == "op_dev") return TailStatistic::OpDev;
    if (name == "fro_dev") return TailStatistic::FroDev;
    if (name == "max_row_dev_additive") return TailStatistic::MaxRowDevAdditive;
    throw std::invalid_argument("unknown statistic: " + name);
}

void ExperimentConfig::validate() const {
    spec.validate();
    if (trials < 1) throw std::invalid_argument("experiment requires trials >= 1");
    if (eps < 0) throw std::invalid_argument("experiment requires eps >= 0");
    if (!(ci_level > 0 && ci_level < 1))
        throw std::invalid_argument("ci_level must lie in (0, 1)");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (sweep_kind != SweepKind::None) {
        if (sweep.empty()) throw std::invalid_argument("sweep requires at least one value");
        for (std::size_t i = 1; i < sweep.size(); ++i)
            if (!(sweep[i] > sweep[i - 1]))
                throw std::invalid_argument("sweep values must be strictly increasing");
    }
}

double normal_quantile(double p) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("quantile requires p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

WilsonInterval wilson_interval(long successes, long trials, double level) {
    if (trials < 1) throw std::invalid_argument("wilson interval requires trials >= 1");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("successes must lie in [0, trials]");
    const double z = normal_quantile(0.5 + level / 2.0);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double radius =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    // center - radius is exactly 0 (or 1) at the boundary counts; rounding
    // must not push the interval past p_hat
    return {std::clamp(center - radius, 0.0, p), std::clamp(center + radius, p, 1.0)};
}

double wilson_upper_radius(long successes, long trials, double one_sided_level) {
    const double z = normal_quantile(one_sided_level);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double radius =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    return std::min(1.0, center + radius) - p;
}

namespace {

double evaluate_statistic(const Frame& frame, TailStatistic stat) {
    const DeviationStats dev = deviation_stats(frame);
    switch (stat) {
        case TailStatistic::OpDev: return dev.op_dev;
        case TailStatistic::FroDev: return dev.fro_dev;
        case TailStatistic::MaxRowDevAdditive: return dev.max_row_dev_additive;
    }
    return 0;
}

// Closed-form companion bound for the (model, statistic, eps) triple; mark
// the row invalid when the pairing has none.
bounds::TailBoundResult paired_bound(const ExperimentConfig& config) {
    using samplers::Model;
    const auto& spec = config.spec;
    switch (spec.model) {
        case Model::Sphere:
            if (config.statistic == TailStatistic::OpDev)
                return bounds::sphere_tail(spec.d, spec.n, config.eps, bounds::Norm::Op);
            if (config.statistic == TailStatistic::FroDev)
                return bounds::sphere_tail(spec.d, spec.n, config.eps, bounds::Norm::Fro);
            break;
        case Model::Ball:
            if (config.statistic == TailStatistic::OpDev)
                return bounds::ball_tail(spec.d, spec.n, config.eps, bounds::Norm::Op);
            if (config.statistic == TailStatistic::FroDev)
                return bounds::ball_tail(spec.d, spec.n, config.eps, bounds::Norm::Fro,
                                         config.ball_fro_c);
            break;
        case Model::Stiefel:
            if (config.statistic == TailStatistic::MaxRowDevAdditive)
                return bounds::stiefel_tail(spec.d, spec.n, config.eps);
            break;
        case Model::Shell:
            if (config.statistic == TailStatistic::OpDev && config.eps == spec.eps) {
                // complement of the shell Parseval probability lower bound
                auto prob = bounds::shell_parseval_prob(spec.d, spec.n, spec.eps);
                auto r = bounds::TailBoundResult::of(prob.aux.at("failure_term"));
                return r;
            }
            break;
        default:
            break;
    }
    bounds::TailBoundResult none;
    none.raw_value = std::numeric_limits<double>::quiet_NaN();
    none.clamped = std::numeric_limits<double>::quiet_NaN();
    none.add_violation("no closed-form bound for this model/statistic pairing");
    return none;
}

}  // namespace

ExperimentRecord estimate_tail(const ExperimentConfig& config) {
    config.validate();
    const long trials = config.trials;
    const int workers = std::max(1, config.workers);

    std::vector<std::int8_t> outcome(static_cast<std::size_t>(trials), 0);  // 1 hit, -1 failed
    auto run_range = [&](int w) {
        for (long t = w; t < trials; t += workers) {
            rng::SeedPath path{config.master_seed, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(0)};
            try {
                Frame frame = samplers::sample_frame(config.spec, path);
                outcome[static_cast<std::size_t>(t)] =
                    evaluate_statistic(frame, config.statistic) >= config.eps ? 1 : 0;
            } catch (const samplers::AcceptanceExhausted&) {
                outcome[static_cast<std::size_t>(t)] = -1;
            }
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& th : pool) th.join();
    }

    long successes = 0, failures = 0;
    for (auto o : outcome) {
        if (o == 1) ++successes;
        if (o == -1) ++failures;
    }
    const long effective = trials - failures;

    ExperimentRecord rec;
    rec.model = samplers::to_string(config.spec.model);
    rec.norm_or_stat = to_string(config.statistic);
    rec.d = config.spec.d;
    rec.n = config.spec.n;
    rec.eps = config.eps;
    rec.trials = effective;
    rec.successes = successes;
    rec.sampling_failures = failures;
    rec.seed = config.master_seed;
    if (effective > 0) {
        rec.p_hat = static_cast<double>(successes) / static_cast<double>(effective);
        const WilsonInterval ci = wilson_interval(successes, effective, config.ci_level);
        rec.ci_low = ci.low;
        rec.ci_high = ci.high;
    } else {
        rec.p_hat = rec.ci_low = rec.ci_high = std::numeric_limits<double>::quiet_NaN();
    }
    const bounds::TailBoundResult bound = paired_bound(config);
    rec.bound_raw = bound.raw_value;
    rec.bound_clamped = bound.clamped;
    rec.bound_valid = bound.valid;
    return rec;
}

MeanStdErr estimate_expectation(const samplers::EnsembleSpec& spec,
                                const ExpectationStatistic& statistic, long trials,
                                const rng::SeedPath& seed, int workers) {
    spec.validate();
    if (trials < 2) throw std::invalid_argument("expectation requires trials >= 2");
    std::vector<double> values(static_cast<std::size_t>(trials));
    workers = std::max(1, workers);
    auto run_range = [&](int w) {
        for (long t = w; t < trials; t += workers) {
            rng::SeedPath path{seed.master_seed, static_cast<std::uint64_t>(t),
                               seed.stream_index};
            Frame frame = samplers::sample_frame(spec, path);
            double v = 0;
            switch (statistic.kind) {
                case ExpectationStatistic::Kind::FrameOperatorEntry:
                    v = frame_operator(frame)(statistic.j, statistic.k);
                    break;
                case ExpectationStatistic::Kind::MaxRowNorm:
                    v = frame.vectors().rowwise().norm().maxCoeff();
                    break;
                case ExpectationStatistic::Kind::SqNorm:
                    v = frame.vectors().rowwise().squaredNorm().mean();
                    break;
            }
            values[static_cast<std::size_t>(t)] = v;
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& th : pool) th.join();
    }
    // reduce in index order so the result is independent of scheduling
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(trials);
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    MeanStdErr out;
    out.mean = mean;
    out.std_error =
        std::sqrt(ss / (static_cast<double>(trials) - 1.0) / static_cast<double>(trials));
    return out;
}

std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.sweep_kind == SweepKind::None || config.sweep.empty())
        throw std::invalid_argument("run_sweep requires a nonempty sweep");
    std::vector<ExperimentRecord> records;
    records.reserve(config.sweep.size());
    for (std::size_t k = 0; k < config.sweep.size(); ++k) {
        ExperimentConfig point = config;
        point.sweep_kind = SweepKind::None;
        point.sweep.clear();
        if (config.sweep_kind == SweepKind::N) {
            point.spec.n = static_cast<int>(config.sweep[k]);
        } else {
            point.eps = config.sweep[k];
            // shell ensembles are parametrized by the same eps as the tail
            // threshold; sweep them together
            if (point.spec.model == samplers::Model::Shell ||
                point.spec.model == samplers::Model::ConditionalShell)
                point.spec.eps = config.sweep[k];
        }
        // fresh sub-stream per sweep point
        point.master_seed = rng::detail::mix64(config.master_seed ^
                                               (0xa5a5a5a5a5a5a5a5ULL + k));
        ExperimentRecord rec = estimate_tail(point);
        rec.seed = config.master_seed;  // report the user-facing seed
        records.push_back(std::move(rec));
    }
    return records;
}

const char* const kCsvHeader =
    "model,norm_or_stat,d,n,eps,trials,successes,p_hat,ci_low,ci_high,bound_raw,"
    "bound_clamped,bound_valid,seed";

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string csv_string(const std::vector<ExperimentRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("emit_csv requires at least one record");
    std::ostringstream os;
    os << kCsvHeader << "\n";
    for (const auto& r : records) {
        os << r.model << ',' << r.norm_or_stat << ',' << r.d << ',' << r.n << ','
           << fmt17(r.eps) << ',' << r.trials << ',' << r.successes << ',' << fmt17(r.p_hat)
           << ',' << fmt17(r.ci_low) << ',' << fmt17(r.ci_high) << ',' << fmt17(r.bound_raw)
           << ',' << fmt17(r.bound_clamped) << ',' << (r.bound_valid ? "true" : "false") << ','
           << r.seed << "\n";
    }
    return os.str();
}

void emit_csv(const std::vector<ExperimentRecord>& records,
              const std::filesystem::path& path) {
    const std::string body = csv_string(records);  // fail before creating the file
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << body;
    if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<ExperimentRecord> parse_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty CSV " + path.string());
    if (line != kCsvHeader)
        throw std::runtime_error("unexpected CSV header in " + path.string());
    std::vector<ExperimentRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        auto next = [&]() {
            if (!std::getline(ls, field, ','))
                throw std::runtime_error("short CSV row: " + line);
            return field;
        };
        ExperimentRecord r;
        r.model = next();
        r.norm_or_stat = next();
        r.d = std::stoi(next());
        r.n = std::stol(next());
        r.eps = std::stod(next());
        r.trials = std::stol(next());
        r.successes = std::stol(next());
        r.p_hat = std::stod(next());
        r.ci_low = std::stod(next());
        r.ci_high = std::stod(next());
        r.bound_raw = std::stod(next());
        r.bound_clamped = std::stod(next());
        r.bound_valid = next() == "true";
        r.seed = std::stoull(next());
        records.push_back(std::move(r));
    }
    return records;
}

bool schema_fields_equal(const ExperimentRecord& a, const ExperimentRecord& b) {
    auto deq = [](double x, double y) {
        if (std::isnan(x) && std::isnan(y)) return true;
        return x == y;
    };
    return a.model == b.model && a.norm_or_stat == b.norm_or_stat && a.d == b.d &&
           a.n == b.n && deq(a.eps, b.eps) && a.trials == b.trials &&
           a.successes == b.successes && deq(a.p_hat, b.p_hat) && deq(a.ci_low, b.ci_low) &&
           deq(a.ci_high, b.ci_high) && deq(a.bound_raw, b.bound_raw) &&
           deq(a.bound_clamped, b.bound_clamped) && a.bound_valid == b.bound_valid &&
           a.seed == b.seed;
}

}  // namespace framecon::mc
