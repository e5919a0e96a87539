#include "cli.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "framecon/bounds.hpp"
#include "framecon/frame.hpp"
#include "framecon/montecarlo.hpp"
#include "framecon/paulsen.hpp"
#include "framecon/rng.hpp"
#include "framecon/samplers.hpp"

namespace framecon::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key))
        throw std::invalid_argument("config missing [" + section + "] " + key);
    return s->second.at(key);
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    sections[section][key] = value;
}

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream is(text);
    std::string line, section;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed config line: " + line);
        cfg.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

std::string ConfigFile::serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, kv] : sections) {
        if (!first) os << "\n";
        first = false;
        os << '[' << name << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    }
    return os.str();
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << body;
    if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output dir " + dir.string());
    return dir;
}

void write_manifest(const fs::path& dir, ConfigFile cfg) {
    cfg.set("run", "version", kVersion);
    write_text(dir / "run-manifest.cfg", cfg.serialize());
}

json bound_to_json(const std::string& theorem, const json& params,
                   const bounds::TailBoundResult& r) {
    json out;
    out["theorem"] = theorem;
    out["params"] = params;
    out["raw"] = r.raw_value;
    out["clamped"] = r.clamped;
    out["valid"] = r.valid;
    out["notes"] = r.notes;
    json aux = json::object();
    for (const auto& [k, v] : r.aux) aux[k] = v;
    out["aux"] = aux;
    return out;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + csv);
    return out;
}

// ---------------------------------------------------------------- sample --

int run_sample(const samplers::EnsembleSpec& spec, std::uint64_t seed, int count,
               const std::string& out) {
    spec.validate();
    const fs::path dir = prepare_out_dir(out);
    for (int i = 0; i < count; ++i) {
        Frame frame = samplers::sample_frame(
            spec, rng::SeedPath{seed, static_cast<std::uint64_t>(i), 0});
        char name[32];
        std::snprintf(name, sizeof(name), "frame-%04d.txt", i);
        save_frame(dir / name, frame);
    }
    ConfigFile manifest;
    manifest.set("run", "subcommand", "sample");
    manifest.set("run", "seed", std::to_string(seed));
    manifest.set("run", "out", out);
    manifest.set("sample", "model", samplers::to_string(spec.model));
    manifest.set("sample", "d", std::to_string(spec.d));
    manifest.set("sample", "n", std::to_string(spec.n));
    manifest.set("sample", "eps", fmt17(spec.eps));
    if (spec.radius_override) manifest.set("sample", "radius", fmt17(*spec.radius_override));
    manifest.set("sample", "count", std::to_string(count));
    write_manifest(dir, manifest);
    std::cout << "wrote " << count << " frame(s) to " << dir.string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- bound --

int run_bound(const std::string& theorem, int d, long n, double eps, double c, double delta,
              double confidence, double quad_tol, const std::string& model,
              const std::string& out) {
    json params;
    bounds::TailBoundResult result;
    json output;

    if (theorem == "sphere-op" || theorem == "sphere-fro") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        result = bounds::sphere_tail(
            d, n, eps, theorem == "sphere-op" ? bounds::Norm::Op : bounds::Norm::Fro);
        output = bound_to_json(theorem, params, result);
    } else if (theorem == "ball-op") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        output = bound_to_json(theorem, params, bounds::ball_tail(d, n, eps, bounds::Norm::Op));
    } else if (theorem == "ball-fro") {
        params = {{"d", d}, {"n", n}, {"eps", eps}, {"c", c}};
        output =
            bound_to_json(theorem, params, bounds::ball_tail(d, n, eps, bounds::Norm::Fro, c));
    } else if (theorem == "stiefel") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        output = bound_to_json(theorem, params, bounds::stiefel_tail(d, n, eps));
    } else if (theorem == "stiefel-union") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        output = bound_to_json(theorem, params, bounds::stiefel_union_tail(d, n, eps));
    } else if (theorem == "stiefel-K") {
        params = {{"d", d}, {"n", n}, {"quad_tol", quad_tol}};
        const bounds::StiefelK k = bounds::stiefel_K(d, n, quad_tol);
        output["theorem"] = theorem;
        output["params"] = params;
        output["K"] = k.k_value;
        output["K_alt_prefactor"] = k.k_alt;
        output["quad_error"] = k.quad_error;
    } else if (theorem == "shell-prob") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        output = bound_to_json(theorem, params, bounds::shell_parseval_prob(d, n, eps));
    } else if (theorem == "paulsen-prob") {
        params = {{"d", d}, {"n", n}, {"eps", eps}};
        output = bound_to_json(theorem, params, bounds::paulsen_prob(d, n, eps));
    } else if (theorem == "paulsen-dist") {
        params = {{"d", d}, {"eps", eps}};
        const auto b = bounds::paulsen_distance_bound(d, eps);
        output["theorem"] = theorem;
        output["params"] = params;
        output["probabilistic"] = b.probabilistic;
        output["hamilton_moitra"] = b.hamilton_moitra;
    } else if (theorem == "sample-size") {
        params = {{"model", model}, {"d", d}, {"eps", eps}, {"delta", delta},
                  {"confidence", confidence}};
        if (model == "stiefel") {
            const auto s = bounds::stiefel_sample_size(eps, confidence, d);
            output["theorem"] = theorem;
            output["params"] = params;
            output["n"] = s.n;
            output["valid"] = s.valid;
            output["notes"] = s.notes;
        } else {
            const long size =
                bounds::sample_size(samplers::model_from_string(model), d, eps, delta);
            output["theorem"] = theorem;
            output["params"] = params;
            output["n"] = size;
            output["valid"] = true;
            output["notes"] = json::array();
        }
    } else {
        throw std::invalid_argument("unknown theorem: " + theorem);
    }

    const std::string line = output.dump();
    std::cout << line << "\n";
    const fs::path dir = prepare_out_dir(out);
    write_text(dir / "bound.json", line + "\n");
    ConfigFile manifest;
    manifest.set("run", "subcommand", "bound");
    manifest.set("run", "out", out);
    manifest.set("bound", "theorem", theorem);
    manifest.set("bound", "d", std::to_string(d));
    manifest.set("bound", "n", std::to_string(n));
    manifest.set("bound", "eps", fmt17(eps));
    manifest.set("bound", "c", fmt17(c));
    manifest.set("bound", "delta", fmt17(delta));
    manifest.set("bound", "confidence", fmt17(confidence));
    manifest.set("bound", "quad_tol", fmt17(quad_tol));
    manifest.set("bound", "model", model);
    write_manifest(dir, manifest);
    return 0;
}

// -------------------------------------------------------------------- mc --

struct McJob {
    std::string tag;  // output file stem
    mc::ExperimentConfig config;
    bool k_overlay = false;  // also emit the exact-K bound companion series
};

std::vector<double> sweep_n_default() { return {25, 50, 100, 200, 400, 800}; }

std::vector<McJob> preset_jobs(const std::string& name, std::uint64_t seed, int workers) {
    std::vector<McJob> jobs;
    auto base = [&](samplers::Model model, int d, double eps) {
        mc::ExperimentConfig cfg;
        cfg.spec.model = model;
        cfg.spec.d = d;
        cfg.spec.n = 2 * d;
        cfg.statistic = mc::TailStatistic::OpDev;
        cfg.eps = eps;
        cfg.trials = 2000;
        cfg.master_seed = seed;
        cfg.sweep_kind = mc::SweepKind::N;
        cfg.sweep = sweep_n_default();
        cfg.workers = workers;
        return cfg;
    };
    if (name == "appendix-sphere" || name == "appendix-ball") {
        const auto model =
            name == "appendix-sphere" ? samplers::Model::Sphere : samplers::Model::Ball;
        int idx = 0;
        for (int d : {2, 4}) {
            for (double eps : {0.3, 0.5}) {
                McJob job;
                char tag[64];
                std::snprintf(tag, sizeof(tag), "%s-d%d-eps%g", name.c_str(), d, eps);
                job.tag = tag;
                job.config = base(model, d, eps);
                job.config.master_seed = seed + static_cast<std::uint64_t>(idx++);
                jobs.push_back(std::move(job));
            }
        }
        return jobs;
    }
    if (name == "appendix-stiefel") {
        McJob job;
        job.tag = "appendix-stiefel-d2-eps0.5";
        job.config = base(samplers::Model::Stiefel, 2, 0.5);
        job.config.statistic = mc::TailStatistic::MaxRowDevAdditive;
        job.config.sweep = {200, 400, 800, 1600};
        job.k_overlay = true;
        jobs.push_back(std::move(job));
        return jobs;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

void describe_presets(std::ostream& os) {
    os << "appendix-sphere   sphere model, op_dev tail vs n; d in {2,4}, eps in {0.3,0.5},\n"
          "                  n sweep {25,50,100,200,400,800}, 2000 trials per point\n"
          "appendix-ball     same grid for the ball model\n"
          "appendix-stiefel  stiefel model, max additive row deviation tail vs n; d=2,\n"
          "                  eps=0.5, n sweep {200,400,800,1600}, 2000 trials; emits a\n"
          "                  companion CSV with the exact-K bound overlay\n"
          "paulsen-demo      conditional-shell pipeline at d=2, eps=0.5, n=1500, 100 runs\n"
          "\nrun with: framecon mc --preset <name> --seed <seed> [--workers W] [--out DIR]\n"
          "every grid point satisfies the preconditions of its paired bound\n";
}

int run_paulsen_pipeline(int d, long n, double eps, int runs, std::uint64_t seed,
                         int max_tries, const std::string& out);

int run_paulsen_demo(std::uint64_t seed, const std::string& out) {
    // n = 1500 clears the 95% threshold 2 d^3 ln(80 d) / eps^4 = 1300 at
    // (d, eps) = (2, 0.5)
    return run_paulsen_pipeline(2, 1500, 0.5, 100, seed, 1000, out);
}

int run_mc_jobs(const std::vector<McJob>& jobs, const ConfigFile& manifest,
                const std::string& out, bool plot) {
    const fs::path dir = prepare_out_dir(out);
    for (const auto& job : jobs) {
        const auto records = mc::run_sweep(job.config);
        mc::emit_csv(records, dir / (job.tag + ".csv"));
        if (plot) mc::emit_plot(records, dir / (job.tag + ".svg"), true);
        if (job.k_overlay) {
            auto overlay = records;
            for (auto& rec : overlay) {
                const auto exact =
                    bounds::stiefel_exact_tail(rec.d, rec.n, rec.eps, 1e-10);
                rec.bound_raw = exact.raw_value;
                rec.bound_clamped = exact.clamped;
                rec.bound_valid = exact.valid;
            }
            mc::emit_csv(overlay, dir / (job.tag + "-kcurve.csv"));
            if (plot) mc::emit_plot(overlay, dir / (job.tag + "-kcurve.svg"), true);
        }
    }
    write_manifest(dir, manifest);
    return 0;
}

// ---------------------------------------------------------------- paulsen --

int run_paulsen_pipeline(int d, long n, double eps, int runs, std::uint64_t seed,
                         int max_tries, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    std::ostringstream reports;
    std::ostringstream csv;
    csv << mc::kCsvHeader << ",dist_proj_sq,dist_enpf_sq,total_sq,theorem_bound\n";
    for (int run = 0; run < runs; ++run) {
        const rng::SeedPath path{seed, static_cast<std::uint64_t>(run), 0};
        const auto report = paulsen::paulsen_pipeline(d, n, eps, path, {}, max_tries);
        json j;
        j["run"] = run;
        j["d"] = d;
        j["n"] = n;
        j["eps"] = eps;
        j["projected_is_eps2d_parseval"] = report.projected_is_eps2d_parseval;
        j["dist_proj_sq"] = report.dist_to_projection_sq;
        j["dist_enpf_sq"] = report.dist_to_enpf_sq;
        j["total_sq"] = report.total_sq;
        j["theorem_bound"] = report.theorem_bound;
        j["hm_bound_on_projection"] = report.hm_bound_on_projection;
        j["search_converged"] = report.search_converged;
        reports << j.dump() << "\n";

        const auto prob = bounds::paulsen_prob(d, n, eps);
        const long hit = report.projected_is_eps2d_parseval ? 1 : 0;
        const auto ci = mc::wilson_interval(hit, 1, 0.95);
        csv << "conditional_shell,paulsen_pipeline," << d << ',' << n << ',' << fmt17(eps)
            << ",1," << hit << ',' << fmt17(static_cast<double>(hit)) << ','
            << fmt17(ci.low) << ',' << fmt17(ci.high) << ',' << fmt17(prob.raw_value) << ','
            << fmt17(prob.clamped) << ',' << (prob.valid ? "true" : "false") << ',' << seed
            << ',' << fmt17(report.dist_to_projection_sq) << ','
            << fmt17(report.dist_to_enpf_sq) << ',' << fmt17(report.total_sq) << ','
            << fmt17(report.theorem_bound) << "\n";
    }
    write_text(dir / "reports.jsonl", reports.str());
    write_text(dir / "paulsen.csv", csv.str());
    ConfigFile manifest;
    manifest.set("run", "subcommand", "paulsen");
    manifest.set("run", "seed", std::to_string(seed));
    manifest.set("run", "out", out);
    manifest.set("paulsen", "mode", "run");
    manifest.set("paulsen", "d", std::to_string(d));
    manifest.set("paulsen", "n", std::to_string(n));
    manifest.set("paulsen", "eps", fmt17(eps));
    manifest.set("paulsen", "runs", std::to_string(runs));
    manifest.set("paulsen", "max_tries", std::to_string(max_tries));
    write_manifest(dir, manifest);
    return 0;
}

int run_paulsen_family(double theta, int k, const std::string& out) {
    const auto fam = paulsen::example_family(theta, k);
    const fs::path dir = prepare_out_dir(out);
    save_frame(dir / "u_frame.txt", fam.u_frame);
    save_frame(dir / "v_frame.txt", fam.v_frame);
    json j;
    j["theta"] = fam.theta;
    j["k"] = fam.k;
    j["d"] = 2 * fam.k;
    j["n"] = 4 * fam.k;
    j["eps"] = fam.eps;
    j["block_dist_sq"] = fam.block_dist_sq;
    j["family_dist_sq"] = fam.family_dist_sq;
    j["lower_bound_d_eps_over_8"] = 2 * fam.k * fam.eps / 8.0;
    const std::string line = j.dump();
    std::cout << line << "\n";
    write_text(dir / "family.json", line + "\n");
    ConfigFile manifest;
    manifest.set("run", "subcommand", "paulsen");
    manifest.set("run", "out", out);
    manifest.set("paulsen", "mode", "family");
    manifest.set("paulsen", "theta", fmt17(theta));
    manifest.set("paulsen", "k", std::to_string(k));
    write_manifest(dir, manifest);
    return 0;
}

int run_paulsen_verify(const std::vector<double>& thetas, const std::vector<int>& ks,
                       const std::string& out) {
    const auto rows = paulsen::verify_lower_bound_family(thetas, ks);
    const fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    csv << "theta,k,d,n,eps,family_dist_sq,lower_bound,search_dist_sq,search_converged,"
           "ratio_dist_over_eps_d\n";
    for (const auto& row : rows) {
        csv << fmt17(row.theta) << ',' << row.k << ',' << row.d << ',' << row.n << ','
            << fmt17(row.eps) << ',' << fmt17(row.family_dist_sq) << ','
            << fmt17(row.lower_bound) << ',' << fmt17(row.search_dist_sq) << ','
            << (row.search_converged ? "true" : "false") << ','
            << fmt17(row.ratio_dist_over_eps_d) << "\n";
    }
    write_text(dir / "verify-family.csv", csv.str());
    std::cout << csv.str();
    ConfigFile manifest;
    manifest.set("run", "subcommand", "paulsen");
    manifest.set("run", "out", out);
    manifest.set("paulsen", "mode", "verify-family");
    std::ostringstream ts, kss;
    for (std::size_t i = 0; i < thetas.size(); ++i) ts << (i ? "," : "") << fmt17(thetas[i]);
    for (std::size_t i = 0; i < ks.size(); ++i) kss << (i ? "," : "") << ks[i];
    manifest.set("paulsen", "theta_grid", ts.str());
    manifest.set("paulsen", "k_grid", kss.str());
    write_manifest(dir, manifest);
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"random frame concentration toolkit"};
    app.require_subcommand(0, 1);

    // ---- sample
    auto* sample = app.add_subcommand("sample", "draw frames from an ensemble");
    std::string sample_model = "sphere";
    int sample_d = 2, sample_n = 4, sample_count = 1;
    double sample_eps = 0.5;
    double sample_radius = 0;
    std::uint64_t sample_seed = 0;
    bool sample_seed_set = false;
    std::string sample_out = "framecon-out";
    sample->add_option("--model", sample_model,
                       "sphere|ball|shell|stiefel|conditional_shell");
    sample->add_option("--d", sample_d, "ambient dimension");
    sample->add_option("--n", sample_n, "vectors per frame");
    sample->add_option("--eps", sample_eps, "shell width");
    sample->add_option("--radius", sample_radius, "radius override");
    sample->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { sample_seed = v; sample_seed_set = true; },
        "master seed");
    sample->add_option("--count", sample_count, "number of frames");
    sample->add_option("--out", sample_out, "output directory");

    // ---- bound
    auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
    std::string theorem, bound_model = "sphere", bound_out = "framecon-out";
    int bound_d = 2;
    long bound_n = 100;
    double bound_eps = 0.5, bound_c = 1.0, bound_delta = 0.05, bound_conf = 0.95;
    double bound_quad_tol = 1e-10;
    bound->add_option("--theorem", theorem,
                      "sphere-op|sphere-fro|ball-op|ball-fro|stiefel|stiefel-union|"
                      "stiefel-K|shell-prob|paulsen-prob|paulsen-dist|sample-size")
        ->required();
    bound->add_option("--d", bound_d, "ambient dimension");
    bound->add_option("--n", bound_n, "number of vectors");
    bound->add_option("--eps", bound_eps, "tolerance eps");
    bound->add_option("--c", bound_c, "ball Frobenius constant");
    bound->add_option("--delta", bound_delta, "failure probability (sample-size)");
    bound->add_option("--confidence", bound_conf, "0.95 or 0.99 (stiefel sample-size)");
    bound->add_option("--quad-tol", bound_quad_tol, "stiefel-K quadrature tolerance");
    bound->add_option("--model", bound_model, "sphere|ball|stiefel (sample-size)");
    bound->add_option("--out", bound_out, "output directory");

    // ---- mc
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo tail estimation sweeps");
    std::string mc_config, mc_preset, mc_model = "sphere", mc_stat = "op_dev";
    std::string mc_out = "framecon-out", mc_format = "csv", mc_sweep_n, mc_sweep_eps;
    int mc_d = 2, mc_n = 100, mc_workers = 1, mc_max_tries = 1000;
    long mc_trials = 1000;
    double mc_eps = 0.5, mc_ci = 0.95, mc_ball_c = 1.0;
    std::uint64_t mc_seed = 0;
    bool mc_seed_set = false, mc_plot = false;
    mc_cmd->add_option("--config", mc_config, "config file (or run-manifest)");
    mc_cmd->add_option("--preset", mc_preset,
                       "appendix-sphere|appendix-ball|appendix-stiefel");
    mc_cmd->add_option("--model", mc_model, "ensemble model");
    mc_cmd->add_option("--statistic", mc_stat, "op_dev|fro_dev|max_row_dev_additive");
    mc_cmd->add_option("--d", mc_d, "ambient dimension");
    mc_cmd->add_option("--n", mc_n, "vectors per frame");
    mc_cmd->add_option("--eps", mc_eps, "tail threshold (and shell width)");
    mc_cmd->add_option("--trials", mc_trials, "trials per point");
    mc_cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { mc_seed = v; mc_seed_set = true; }, "master seed");
    mc_cmd->add_option("--sweep-n", mc_sweep_n, "comma-separated n values");
    mc_cmd->add_option("--sweep-eps", mc_sweep_eps, "comma-separated eps values");
    mc_cmd->add_option("--ci-level", mc_ci, "Wilson interval level");
    mc_cmd->add_option("--workers", mc_workers, "worker threads (speed only)");
    mc_cmd->add_option("--ball-c", mc_ball_c, "ball Frobenius constant");
    mc_cmd->add_option("--max-tries", mc_max_tries, "conditional shell rejection budget");
    mc_cmd->add_option("--out", mc_out, "output directory");
    mc_cmd->add_option("--format", mc_format, "csv|json");
    mc_cmd->add_flag("--plot", mc_plot, "emit SVG plots");

    // ---- paulsen
    auto* pl = app.add_subcommand("paulsen", "probabilistic Paulsen pipeline");
    pl->require_subcommand(1);
    auto* pl_run = pl->add_subcommand("run", "sample, project, search");
    int pl_d = 2, pl_runs = 10, pl_max_tries = 1000;
    long pl_n = 1500;
    double pl_eps = 0.5;
    std::uint64_t pl_seed = 0;
    bool pl_seed_set = false;
    std::string pl_out = "framecon-out";
    pl_run->add_option("--d", pl_d, "ambient dimension");
    pl_run->add_option("--n", pl_n, "vectors per frame");
    pl_run->add_option("--eps", pl_eps, "class tolerance");
    pl_run->add_option("--runs", pl_runs, "pipeline repetitions");
    pl_run->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { pl_seed = v; pl_seed_set = true; }, "master seed");
    pl_run->add_option("--max-tries", pl_max_tries, "rejection budget");
    pl_run->add_option("--out", pl_out, "output directory");

    auto* pl_family = pl->add_subcommand("family", "exact lower-bound example family");
    double pl_theta = 0.1;
    int pl_k = 1;
    std::string pl_family_out = "framecon-out";
    pl_family->add_option("--theta", pl_theta, "angle parameter, 0 < theta < pi/8");
    pl_family->add_option("--k", pl_k, "number of diagonal blocks");
    pl_family->add_option("--out", pl_family_out, "output directory");

    auto* pl_verify = pl->add_subcommand("verify-family", "grid verification table");
    std::string pl_thetas = "0.02,0.05,0.1", pl_ks = "1,3,5", pl_verify_out = "framecon-out";
    pl_verify->add_option("--theta-grid", pl_thetas, "comma-separated thetas");
    pl_verify->add_option("--k-grid", pl_ks, "comma-separated block counts");
    pl_verify->add_option("--out", pl_verify_out, "output directory");

    // ---- presets
    auto* presets = app.add_subcommand("presets", "list experiment presets");

    std::vector<std::string> argv_copy(args.rbegin(), args.rend());  // CLI11 wants reversed
    try {
        app.parse(argv_copy);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sample->parsed()) {
            if (!sample_seed_set)
                throw std::invalid_argument("sample requires --seed; there is no silent "
                                            "nondeterminism");
            samplers::EnsembleSpec spec;
            spec.model = samplers::model_from_string(sample_model);
            spec.d = sample_d;
            spec.n = sample_n;
            spec.eps = sample_eps;
            if (sample_radius > 0) spec.radius_override = sample_radius;
            return run_sample(spec, sample_seed, sample_count, sample_out);
        }
        if (bound->parsed()) {
            return run_bound(theorem, bound_d, bound_n, bound_eps, bound_c, bound_delta,
                             bound_conf, bound_quad_tol, bound_model, bound_out);
        }
        if (mc_cmd->parsed()) {
            ConfigFile manifest;
            if (!mc_config.empty()) {
                const ConfigFile file = ConfigFile::load(mc_config);
                if (file.has("run", "preset") && mc_preset.empty())
                    mc_preset = file.get("run", "preset");
                if (file.has("run", "seed") && !mc_seed_set) {
                    mc_seed = std::stoull(file.get("run", "seed"));
                    mc_seed_set = true;
                }
                if (file.has("run", "workers")) mc_workers = std::stoi(file.get("run", "workers"));
                if (file.has("run", "out")) mc_out = file.get("run", "out");
                if (file.has("run", "format")) mc_format = file.get("run", "format");
                if (file.has("run", "plot")) mc_plot = file.get("run", "plot") == "true";
                if (file.has("experiment", "model")) mc_model = file.get("experiment", "model");
                if (file.has("experiment", "statistic"))
                    mc_stat = file.get("experiment", "statistic");
                if (file.has("experiment", "d")) mc_d = std::stoi(file.get("experiment", "d"));
                if (file.has("experiment", "n")) mc_n = std::stoi(file.get("experiment", "n"));
                if (file.has("experiment", "eps"))
                    mc_eps = std::stod(file.get("experiment", "eps"));
                if (file.has("experiment", "trials"))
                    mc_trials = std::stol(file.get("experiment", "trials"));
                if (file.has("experiment", "ci_level"))
                    mc_ci = std::stod(file.get("experiment", "ci_level"));
                if (file.has("experiment", "ball_c"))
                    mc_ball_c = std::stod(file.get("experiment", "ball_c"));
                if (file.has("experiment", "max_tries"))
                    mc_max_tries = std::stoi(file.get("experiment", "max_tries"));
                if (file.has("sweep", "kind") && file.has("sweep", "values")) {
                    if (file.get("sweep", "kind") == "n")
                        mc_sweep_n = file.get("sweep", "values");
                    else
                        mc_sweep_eps = file.get("sweep", "values");
                }
            }
            if (!mc_seed_set)
                throw std::invalid_argument("mc requires --seed; there is no silent "
                                            "nondeterminism");
            if (mc_format != "csv" && mc_format != "json")
                throw std::invalid_argument("format must be csv or json");

            if (!mc_preset.empty()) {
                if (mc_preset == "paulsen-demo") return run_paulsen_demo(mc_seed, mc_out);
                const auto jobs = preset_jobs(mc_preset, mc_seed, mc_workers);
                ConfigFile preset_manifest;
                preset_manifest.set("run", "subcommand", "mc");
                preset_manifest.set("run", "preset", mc_preset);
                preset_manifest.set("run", "seed", std::to_string(mc_seed));
                preset_manifest.set("run", "workers", std::to_string(mc_workers));
                preset_manifest.set("run", "out", mc_out);
                preset_manifest.set("run", "format", mc_format);
                preset_manifest.set("run", "plot", mc_plot ? "true" : "false");
                return run_mc_jobs(jobs, preset_manifest, mc_out, mc_plot);
            }

            McJob job;
            job.tag = "results";
            auto& cfg = job.config;
            cfg.spec.model = samplers::model_from_string(mc_model);
            cfg.spec.d = mc_d;
            cfg.spec.n = mc_n;
            cfg.spec.max_tries = mc_max_tries;
            cfg.statistic = mc::tail_statistic_from_string(mc_stat);
            cfg.eps = mc_eps;
            if (cfg.spec.model == samplers::Model::Shell ||
                cfg.spec.model == samplers::Model::ConditionalShell)
                cfg.spec.eps = mc_eps;
            cfg.trials = mc_trials;
            cfg.master_seed = mc_seed;
            cfg.ci_level = mc_ci;
            cfg.workers = mc_workers;
            cfg.ball_fro_c = mc_ball_c;
            if (!mc_sweep_n.empty()) {
                cfg.sweep_kind = mc::SweepKind::N;
                cfg.sweep = parse_list(mc_sweep_n);
            } else if (!mc_sweep_eps.empty()) {
                cfg.sweep_kind = mc::SweepKind::Eps;
                cfg.sweep = parse_list(mc_sweep_eps);
            } else {
                // single point behaves as a one-element n sweep
                cfg.sweep_kind = mc::SweepKind::N;
                cfg.sweep = {static_cast<double>(mc_n)};
            }

            ConfigFile manifest2;
            manifest2.set("run", "subcommand", "mc");
            manifest2.set("run", "seed", std::to_string(mc_seed));
            manifest2.set("run", "workers", std::to_string(mc_workers));
            manifest2.set("run", "out", mc_out);
            manifest2.set("run", "format", mc_format);
            manifest2.set("run", "plot", mc_plot ? "true" : "false");
            manifest2.set("experiment", "model", mc_model);
            manifest2.set("experiment", "statistic", mc_stat);
            manifest2.set("experiment", "d", std::to_string(mc_d));
            manifest2.set("experiment", "n", std::to_string(mc_n));
            manifest2.set("experiment", "eps", fmt17(mc_eps));
            manifest2.set("experiment", "trials", std::to_string(mc_trials));
            manifest2.set("experiment", "ci_level", fmt17(mc_ci));
            manifest2.set("experiment", "ball_c", fmt17(mc_ball_c));
            manifest2.set("experiment", "max_tries", std::to_string(mc_max_tries));
            manifest2.set("sweep", "kind", cfg.sweep_kind == mc::SweepKind::N ? "n" : "eps");
            std::ostringstream vals;
            for (std::size_t i = 0; i < cfg.sweep.size(); ++i)
                vals << (i ? "," : "") << fmt17(cfg.sweep[i]);
            manifest2.set("sweep", "values", vals.str());

            if (mc_format == "json") {
                const auto records = mc::run_sweep(cfg);
                const fs::path dir = prepare_out_dir(mc_out);
                std::ostringstream body;
                for (const auto& r : records) {
                    json j;
                    j["model"] = r.model;
                    j["norm_or_stat"] = r.norm_or_stat;
                    j["d"] = r.d;
                    j["n"] = r.n;
                    j["eps"] = r.eps;
                    j["trials"] = r.trials;
                    j["successes"] = r.successes;
                    j["p_hat"] = r.p_hat;
                    j["ci_low"] = r.ci_low;
                    j["ci_high"] = r.ci_high;
                    j["bound_raw"] = r.bound_raw;
                    j["bound_clamped"] = r.bound_clamped;
                    j["bound_valid"] = r.bound_valid;
                    j["seed"] = r.seed;
                    body << j.dump() << "\n";
                }
                write_text(dir / "results.jsonl", body.str());
                if (mc_plot) mc::emit_plot(records, dir / "results.svg", true);
                write_manifest(dir, manifest2);
                return 0;
            }
            return run_mc_jobs({job}, manifest2, mc_out, mc_plot);
        }
        if (pl_run->parsed()) {
            if (!pl_seed_set)
                throw std::invalid_argument("paulsen run requires --seed; there is no "
                                            "silent nondeterminism");
            return run_paulsen_pipeline(pl_d, pl_n, pl_eps, pl_runs, pl_seed, pl_max_tries,
                                        pl_out);
        }
        if (pl_family->parsed()) {
            return run_paulsen_family(pl_theta, pl_k, pl_family_out);
        }
        if (pl_verify->parsed()) {
            std::vector<int> ks;
            for (double v : parse_list(pl_ks)) ks.push_back(static_cast<int>(v));
            return run_paulsen_verify(parse_list(pl_thetas), ks, pl_verify_out);
        }
        if (presets->parsed()) {
            describe_presets(std::cout);
            return 0;
        }
        std::cout << app.help();
        return 0;
    } catch (const samplers::AcceptanceExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace framecon::cli
