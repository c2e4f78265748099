#include "supou_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "supou/errors.hpp"
#include "supou/estimator.hpp"
#include "supou/moments.hpp"
#include "supou/params.hpp"
#include "supou/report.hpp"
#include "supou/simulator.hpp"
#include "supou/stats.hpp"

namespace supou::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kLevyMatchTolerance = 1e-12;

struct Options {
    std::string model;
    double mu = 0.015;
    double sigma2 = 0.003;
    double alpha_pi = 4.0;
    double B = -0.1;
    double delta = 1.0;
    int n_obs = 10000;
    int n_paths = 100;
    std::vector<int> lags;
    int m = 0;
    std::uint64_t seed = 0;
    double truncation_lead = 2000.0;
    int euler_substeps = 20;
    double cp_rate = 0.0;
    double jump_shape = 3.0;
    double jump_rate = 0.0;
    std::string input;
    bool prices = false;
    bool returns = false;
    double annualize_factor = 0.0;
    std::string out_dir = ".";
    unsigned workers = 1;
    int fit_lags = 20;
    int bins = 20;
    int max_iterations = gmm::GmmConfig{}.max_iterations;
    int restart_attempts = gmm::GmmConfig{}.restart_attempts;

    // Flags whose presence matters, resolved from the chosen subcommand after parsing.
    bool has_model = false;
    bool has_cp_rate = false;
    bool has_jump_shape = false;
    bool has_jump_rate = false;
    bool has_annualize = false;
};

bool given(const CLI::App& cmd, const std::string& name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shorter form for messages.
std::string fmt_msg(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\"");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\"");
    return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

ParamVector params_of(const Options& o) { return ParamVector{o.mu, o.sigma2, o.alpha_pi, o.B}; }

ModelKind model_of(const Options& o, ModelKind fallback) {
    if (!o.has_model) return fallback;
    try {
        return parse_model_kind(o.model);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
}

gmm::MomentConditionSet conditions_of(const Options& o, ModelKind kind) {
    gmm::MomentConditionSet c = gmm::default_conditions(kind, o.delta);
    if (!o.lags.empty()) {
        c.lags = o.lags;
    } else if (o.m > 0) {
        c.lags.clear();
        for (int h = 1; h <= o.m; ++h) c.lags.push_back(h);
    }
    gmm::validate(c);
    return c;
}

gmm::GmmConfig gmm_config_of(const Options& o, std::uint64_t seed) {
    gmm::GmmConfig c;
    c.max_iterations = o.max_iterations;
    c.restart_attempts = o.restart_attempts;
    c.seed = seed;
    gmm::validate(c);
    return c;
}

std::optional<double> annualize_of(const Options& o) {
    if (!o.has_annualize) return std::nullopt;
    if (!(o.annualize_factor > 0.0)) throw InputError("--annualize-factor must be positive");
    return o.annualize_factor;
}

bool close_relative(double a, double b) { return std::fabs(a - b) <= kLevyMatchTolerance * std::fabs(b); }

sim::LevySpec levy_of(const Options& o, const ParamVector& beta) {
    if (!(beta.mu > 0.0)) throw InputError("simulation needs mu > 0 (the driving process is a subordinator)");
    const double shape = o.has_jump_shape ? o.jump_shape : 3.0;
    sim::LevySpec spec = sim::LevySpec::matching(beta.mu, beta.sigma2, shape);
    if (o.has_cp_rate) spec.rate = o.cp_rate;
    if (o.has_jump_rate) spec.jump_rate = o.jump_rate;
    sim::validate(spec);
    const sim::LevyMoments lm = sim::levy_moments(spec);
    if (!close_relative(lm.mu, beta.mu) || !close_relative(lm.sigma2, beta.sigma2)) {
        throw InputError("Levy specification (rate " + fmt_msg(spec.rate) + ", Gamma(" + fmt_msg(spec.jump_shape) + ", " +
                         fmt_msg(spec.jump_rate) + ") jumps) implies mu = " + fmt_msg(lm.mu) + ", sigma2 = " +
                         fmt_msg(lm.sigma2) + " but the parameters give mu = " + fmt_msg(beta.mu) +
                         ", sigma2 = " + fmt_msg(beta.sigma2));
    }
    return spec;
}

sim::SimulationConfig simulation_of(const Options& o, std::uint64_t seed) {
    sim::SimulationConfig c;
    c.truncation_lead = o.truncation_lead;
    c.euler_substeps = o.euler_substeps;
    c.seed = seed;
    sim::validate(c);
    return c;
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

ordered_json levy_json(const sim::LevySpec& spec) {
    const sim::LevyMoments lm = sim::levy_moments(spec);
    return ordered_json{{"rate", spec.rate},
                        {"jump_shape", spec.jump_shape},
                        {"jump_rate", spec.jump_rate},
                        {"mu", lm.mu},
                        {"sigma2", lm.sigma2}};
}

ordered_json simulation_json(const Options& o) {
    return ordered_json{{"delta", o.delta},
                        {"n_obs", o.n_obs},
                        {"truncation_lead", o.truncation_lead},
                        {"euler_substeps", o.euler_substeps}};
}

ordered_json result_document(const gmm::GmmResult& result, std::optional<double> factor, const std::string& input,
                             const Series* series) {
    ordered_json doc;
    doc["version"] = kVersion;
    if (!input.empty()) {
        ordered_json in{{"path", input}};
        if (series != nullptr) {
            in["n_values"] = series->values.size();
            if (!series->dates.empty()) {
                in["first_date"] = series->dates.front();
                in["last_date"] = series->dates.back();
            }
        }
        doc["input"] = in;
    }
    const ordered_json body = to_json(result, factor);
    for (const auto& [key, value] : body.items()) doc[key] = value;
    return doc;
}

// ---------------------------------------------------------------------------- simulate

int cmd_simulate(const Options& o, std::ostream& out) {
    const ModelKind kind = model_of(o, ModelKind::SupOU);
    const ParamVector beta = params_of(o);
    validate(beta, kind);
    const ObservationSchedule schedule{o.delta, o.n_obs};
    if (o.n_obs < 1) throw InputError("--n-obs must be at least 1");
    validate(schedule);
    const sim::LevySpec spec = levy_of(o, beta);
    const sim::SimulationConfig config = simulation_of(o, o.seed);

    const sim::PathSample path = sim::simulate_path(kind, spec, PiSpec::from(beta), schedule, config);
    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    {
        auto csv = open_out(dir / "path.csv");
        sim::write_csv(path, csv);
    }
    ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = "simulate";
    manifest["model"] = std::string(to_string(kind));
    manifest["seed"] = o.seed;
    manifest["params"] = to_json(beta);
    manifest["levy"] = levy_json(spec);
    manifest["simulation"] = simulation_json(o);
    manifest["outputs"] = {"path.csv"};
    write_json(dir / "manifest.json", manifest);
    out << "wrote " << path.values.size() << " observations to " << (dir / "path.csv").string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------- estimate

int cmd_estimate(const Options& o, std::ostream& out) {
    const ModelKind kind = model_of(o, ModelKind::SupOU);
    if (o.input.empty()) throw InputError("estimate needs --input");
    const Series series = read_series(o.input);
    const gmm::MomentConditionSet conditions = conditions_of(o, kind);
    const std::optional<double> factor = annualize_of(o);
    const gmm::GmmConfig config = gmm_config_of(o, o.seed);

    std::vector<double> data = series.values;
    if (kind == ModelKind::SupOUSV) data = stats::demean(data);
    if (data.size() <= static_cast<std::size_t>(conditions.max_lag())) {
        throw InsufficientDataError("need more than " + std::to_string(conditions.max_lag()) +
                                    " observations, got " + std::to_string(data.size()));
    }
    const gmm::GmmResult result = gmm::two_step_gmm(data, conditions, config);

    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    write_json(dir / "result.json", result_document(result, factor, o.input, &series));
    const ParamVector& e = result.step2_estimate;
    out << "step 2 estimate: mu=" << fmt(e.mu) << " sigma2=" << fmt(e.sigma2) << " alpha_pi=" << fmt(e.alpha_pi)
        << " B=" << fmt(e.B) << (result.converged_step2 ? "" : " (not converged)") << '\n';
    return result.converged_step2 ? kOk : kNotConverged;
}

// ---------------------------------------------------------------------------- study

struct PathOutcome {
    std::uint64_t seed = 0;
    std::optional<gmm::GmmResult> result;
    std::string error;
};

constexpr std::array<const char*, 4> kParamNames{"mu", "sigma2", "alpha_pi", "B"};

double coordinate(const ParamVector& p, std::size_t i) {
    switch (i) {
        case 0: return p.mu;
        case 1: return p.sigma2;
        case 2: return p.alpha_pi;
        default: return p.B;
    }
}

int cmd_study(const Options& o, std::ostream& out) {
    const ModelKind kind = model_of(o, ModelKind::SupOU);
    const ParamVector truth = params_of(o);
    validate(truth, kind);
    if (o.n_paths < 1) throw InputError("--n-paths must be at least 1");
    if (o.n_obs < 1) throw InputError("--n-obs must be at least 1");
    if (o.bins < 1) throw InputError("--bins must be at least 1");
    if (o.workers < 1) throw InputError("--workers must be at least 1");
    const ObservationSchedule schedule{o.delta, o.n_obs};
    validate(schedule);
    const sim::LevySpec spec = levy_of(o, truth);
    const gmm::MomentConditionSet conditions = conditions_of(o, kind);
    simulation_of(o, o.seed);
    gmm_config_of(o, o.seed);
    const unsigned workers = std::max(1u, std::min<unsigned>(o.workers, static_cast<unsigned>(o.n_paths)));

    std::vector<PathOutcome> outcomes(static_cast<std::size_t>(o.n_paths));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t p = next++; p < outcomes.size(); p = next++) {
            PathOutcome& slot = outcomes[p];
            slot.seed = o.seed + p;
            try {
                const sim::PathSample path =
                    sim::simulate_path(kind, spec, PiSpec::from(truth), schedule, simulation_of(o, slot.seed));
                std::vector<double> data = path.values;
                if (kind == ModelKind::SupOUSV) data = stats::demean(data);
                slot.result = gmm::two_step_gmm(data, conditions, gmm_config_of(o, slot.seed));
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);

    std::array<std::vector<double>, 4> converged_values;
    std::size_t n_conv1 = 0;
    std::size_t n_conv2 = 0;
    std::size_t n_errors = 0;
    {
        auto jsonl = open_out(dir / "paths.jsonl");
        auto csv = open_out(dir / "estimates.csv");
        csv << "path,seed,converged_step1,converged_step2,mu_step1,sigma2_step1,alpha_pi_step1,B_step1,"
               "mu,sigma2,alpha_pi,B,step2_objective\n";
        for (std::size_t p = 0; p < outcomes.size(); ++p) {
            const PathOutcome& slot = outcomes[p];
            ordered_json line;
            line["path"] = p;
            line["seed"] = slot.seed;
            if (!slot.result) {
                ++n_errors;
                line["error"] = slot.error;
                jsonl << line.dump() << '\n';
                csv << p << ',' << slot.seed << ",false,false,,,,,,,,,\n";
                continue;
            }
            const gmm::GmmResult& r = *slot.result;
            const ordered_json body = to_json(r);
            for (const auto& [key, value] : body.items()) line[key] = value;
            line["error"] = nullptr;
            jsonl << line.dump() << '\n';
            n_conv1 += r.converged_step1 ? 1 : 0;
            csv << p << ',' << slot.seed << ',' << (r.converged_step1 ? "true" : "false") << ','
                << (r.converged_step2 ? "true" : "false");
            for (std::size_t i = 0; i < 4; ++i) csv << ',' << fmt(coordinate(r.step1_estimate, i));
            for (std::size_t i = 0; i < 4; ++i) csv << ',' << fmt(coordinate(r.step2_estimate, i));
            csv << ',' << fmt(r.step2_objective) << '\n';
            if (r.converged_step2) {
                ++n_conv2;
                for (std::size_t i = 0; i < 4; ++i) converged_values[i].push_back(coordinate(r.step2_estimate, i));
            }
        }
    }

    ordered_json medians;
    ordered_json abs_errors;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& values = converged_values[i];
        {
            auto hist = open_out(dir / (std::string("hist_") + kParamNames[i] + ".csv"));
            if (values.empty()) {
                hist << "left,right,count\n";
            } else {
                stats::write_histogram_csv(stats::histogram(values, o.bins), hist);
            }
        }
        {
            auto qq = open_out(dir / (std::string("qq_") + kParamNames[i] + ".csv"));
            if (values.size() < 2) {
                qq << "theoretical,sample\n";
            } else {
                stats::write_qq_csv(stats::normal_qq_points(values), qq);
            }
        }
        if (values.empty()) {
            medians[kParamNames[i]] = nullptr;
            abs_errors[kParamNames[i]] = nullptr;
            continue;
        }
        std::vector<double> err(values.size());
        const double t = coordinate(truth, i);
        std::transform(values.begin(), values.end(), err.begin(), [t](double v) { return std::fabs(v - t); });
        medians[kParamNames[i]] = stats::median(values);
        abs_errors[kParamNames[i]] = stats::median(err);
    }

    ordered_json summary;
    summary["version"] = kVersion;
    summary["command"] = "study";
    summary["model"] = std::string(to_string(kind));
    summary["seed"] = o.seed;
    summary["n_paths"] = o.n_paths;
    summary["truth"] = to_json(truth);
    summary["levy"] = levy_json(spec);
    summary["simulation"] = simulation_json(o);
    summary["lags"] = conditions.lags;
    summary["converged_step1"] = n_conv1;
    summary["converged_step2"] = n_conv2;
    summary["not_converged_step2"] = outcomes.size() - n_conv2;
    summary["errors"] = n_errors;
    summary["median"] = medians;
    summary["median_abs_error"] = abs_errors;
    write_json(dir / "summary.json", summary);

    out << "study: " << n_conv2 << " of " << outcomes.size() << " paths converged in step 2\n";
    return kOk;
}

// ---------------------------------------------------------------------------- fit

void write_comparison(const fs::path& path, const ParamVector& beta, double delta,
                      const std::vector<double>& squared, int max_lag) {
    auto csv = open_out(path);
    csv << "lag,empirical_acov,model_acov,empirical_acf,model_acf\n";
    const double emp_var = stats::sample_var(squared);
    const double model_var = sv_sqret_var(beta, delta);
    for (int h = 1; h <= max_lag; ++h) {
        const double emp = stats::sample_acov(squared, static_cast<std::size_t>(h));
        const double model = sv_sqret_acov(beta, delta, h);
        csv << h << ',' << fmt(emp) << ',' << fmt(model) << ',' << fmt(emp_var > 0.0 ? emp / emp_var : 0.0) << ','
            << fmt(model / model_var) << '\n';
    }
}

int cmd_fit(const Options& o, std::ostream& out) {
    if (o.has_model && model_of(o, ModelKind::SupOUSV) != ModelKind::SupOUSV) {
        throw InputError("fit estimates the stochastic volatility model; use --model sv");
    }
    if (o.input.empty()) throw InputError("fit needs --input");
    if (o.prices == o.returns) throw InputError("fit needs exactly one of --prices or --returns");
    if (o.fit_lags < 1) throw InputError("--fit-lags must be at least 1");
    const Series series = read_series(o.input);
    const gmm::MomentConditionSet conditions = conditions_of(o, ModelKind::SupOUSV);
    const std::optional<double> factor = annualize_of(o);
    const gmm::GmmConfig config = gmm_config_of(o, o.seed);

    const std::vector<double> raw = o.prices ? log_returns(series.values) : series.values;
    if (raw.size() <= static_cast<std::size_t>(std::max(conditions.max_lag(), o.fit_lags))) {
        throw InsufficientDataError("need more than " + std::to_string(std::max(conditions.max_lag(), o.fit_lags)) +
                                    " returns, got " + std::to_string(raw.size()));
    }
    const std::vector<double> y = stats::demean(raw);
    const gmm::GmmResult result = gmm::two_step_gmm(y, conditions, config);

    std::vector<double> squared(y.size());
    std::transform(y.begin(), y.end(), squared.begin(), [](double v) { return v * v; });

    const fs::path dir(o.out_dir);
    prepare_out_dir(dir);
    write_json(dir / "result.json", result_document(result, factor, o.input, &series));
    write_comparison(dir / "comparison_step1.csv", result.step1_estimate, o.delta, squared, o.fit_lags);
    write_comparison(dir / "comparison_step2.csv", result.step2_estimate, o.delta, squared, o.fit_lags);
    const ParamVector& e = result.step2_estimate;
    out << "fit: mu=" << fmt(e.mu) << " sigma2=" << fmt(e.sigma2) << " alpha_pi=" << fmt(e.alpha_pi)
        << " B=" << fmt(e.B) << "; model acf decays like h^" << fmt(1.0 - e.alpha_pi)
        << (result.converged_step2 ? "" : " (not converged)") << '\n';
    return result.converged_step2 ? kOk : kNotConverged;
}

// ---------------------------------------------------------------------------- option wiring

void add_model_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--model", o.model, "Model kind: supou, int or sv");
    cmd.add_option("--mu", o.mu, "Mean of the driving Levy process per unit time")->capture_default_str();
    cmd.add_option("--sigma2", o.sigma2, "Variance of the driving Levy process per unit time")
        ->capture_default_str();
    cmd.add_option("--alpha-pi", o.alpha_pi, "Gamma shape of the mean-reversion law")->capture_default_str();
    cmd.add_option("--B", o.B, "Scale of the mean-reversion law (negative)")->capture_default_str();
    cmd.add_option("--delta", o.delta, "Observation spacing")->capture_default_str();
}

void add_simulation_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--n-obs", o.n_obs, "Observations per path")->capture_default_str();
    cmd.add_option("--seed", o.seed, "Base random seed")->capture_default_str();
    cmd.add_option("--truncation-lead", o.truncation_lead, "Length of the burn-in window before time 0")
        ->capture_default_str();
    cmd.add_option("--euler-substeps", o.euler_substeps, "Euler substeps per observation (SV model)")
        ->capture_default_str();
    cmd.add_option("--cp-rate", o.cp_rate, "Compound Poisson arrival rate");
    cmd.add_option("--jump-shape", o.jump_shape, "Gamma shape of the jump sizes");
    cmd.add_option("--jump-rate", o.jump_rate, "Gamma rate of the jump sizes");
}

void add_estimation_options(CLI::App& cmd, Options& o, bool with_seed) {
    cmd.add_option("--lags", o.lags, "Comma separated autocovariance lags")->delimiter(',');
    cmd.add_option("--m", o.m, "Use lags 1..m (ignored when --lags is given)");
    cmd.add_option("--max-iterations", o.max_iterations, "BFGS iteration limit")->capture_default_str();
    cmd.add_option("--restart-attempts", o.restart_attempts, "Extra second-step starts after a failure")
        ->capture_default_str();
    if (with_seed) cmd.add_option("--seed", o.seed, "Seed for restart perturbations")->capture_default_str();
}

int dispatch(const std::string& name, const Options& o, std::ostream& out) {
    if (name == "simulate") return cmd_simulate(o, out);
    if (name == "estimate") return cmd_estimate(o, out);
    if (name == "study") return cmd_study(o, out);
    return cmd_fit(o, out);
}

}  // namespace

Series parse_series(std::istream& in, const std::string& source) {
    Series s;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string field; std::getline(ss, field, ',');) fields.push_back(trim(field));
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.empty() || fields.size() > 2) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected `value` or `date,value`");
        }
        const auto value = parse_double(fields.back());
        if (!value) {
            if (!columns && s.values.empty() && line_no == 1) {
                columns = fields.size();
                continue;
            }
            throw InputError(source + ":" + std::to_string(line_no) + ": not a finite number: '" + fields.back() +
                             "'");
        }
        if (columns && *columns != fields.size()) {
            throw InputError(source + ":" + std::to_string(line_no) + ": inconsistent number of columns");
        }
        columns = fields.size();
        if (fields.size() == 2) s.dates.push_back(fields.front());
        s.values.push_back(*value);
    }
    if (s.values.empty()) throw InputError(source + ": no observations");
    return s;
}

Series read_series(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file " + path.string());
    return parse_series(in, path.string());
}

std::vector<double> log_returns(const std::vector<double>& prices) {
    if (prices.size() < 2) throw InputError("need at least two prices");
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw InputError("price " + std::to_string(i + 1) + " is not positive: " + fmt_msg(prices[i]));
        }
        if (i > 0) r[i - 1] = std::log(prices[i]) - std::log(prices[i - 1]);
    }
    return r;
}

unsigned default_workers() {
    if (const char* env = std::getenv(kWorkersEnv)) {
        unsigned v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and GMM estimation for supOU processes", "supou"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options o;
    o.workers = default_workers();

    CLI::App* simulate = app.add_subcommand("simulate", "Simulate one path and write path.csv and manifest.json");
    add_model_options(*simulate, o);
    add_simulation_options(*simulate, o);
    simulate->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    CLI::App* estimate = app.add_subcommand("estimate", "Two-step GMM estimate for one series");
    add_model_options(*estimate, o);
    add_estimation_options(*estimate, o, true);
    estimate->add_option("--input", o.input, "CSV with `value` or `date,value` rows")->required();
    estimate->add_option("--annualize-factor", o.annualize_factor, "Report annualized estimates");
    estimate->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    CLI::App* study = app.add_subcommand("study", "Monte Carlo study: simulate and estimate many paths");
    add_model_options(*study, o);
    add_simulation_options(*study, o);
    add_estimation_options(*study, o, false);
    study->add_option("--n-paths", o.n_paths, "Number of paths")->capture_default_str();
    study->add_option("--workers", o.workers, std::string("Worker threads (default from ") + kWorkersEnv + ")")
        ->check(CLI::PositiveNumber);
    study->add_option("--bins", o.bins, "Histogram bins")->capture_default_str();
    study->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    CLI::App* fit = app.add_subcommand("fit", "Fit the SV model to prices or log returns");
    fit->add_option("--model", o.model, "Model kind (only sv)");
    fit->add_option("--delta", o.delta, "Observation spacing")->capture_default_str();
    add_estimation_options(*fit, o, true);
    fit->add_option("--input", o.input, "CSV with `value` or `date,value` rows")->required();
    auto* prices = fit->add_flag("--prices", o.prices, "Input holds prices");
    auto* returns = fit->add_flag("--returns", o.returns, "Input holds log returns");
    prices->excludes(returns);
    fit->add_option("--fit-lags", o.fit_lags, "Lags in the comparison tables")->capture_default_str();
    fit->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const CLI::App& chosen = *app.get_subcommands().front();
    const std::string name = chosen.get_name();
    o.has_model = given(chosen, "--model");
    o.has_cp_rate = given(chosen, "--cp-rate");
    o.has_jump_shape = given(chosen, "--jump-shape");
    o.has_jump_rate = given(chosen, "--jump-rate");
    o.has_annualize = given(chosen, "--annualize-factor");

    try {
        return dispatch(name, o, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InsufficientDataError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InitializationError& e) {
        err << "error: estimation could not start: " << e.what() << '\n';
        return kNotConverged;
    } catch (const SingularWeightingError& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace supou::cli
