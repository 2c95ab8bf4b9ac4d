#include "racelab_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "racelab/analysis.hpp"
#include "racelab/bounds.hpp"
#include "racelab/config.hpp"
#include "racelab/coupling.hpp"
#include "racelab/experiment.hpp"
#include "racelab/inference.hpp"
#include "racelab/learning.hpp"
#include "racelab/parallel.hpp"
#include "racelab/processes.hpp"
#include "racelab/races.hpp"
#include "racelab/random.hpp"
#include "racelab_cli/ingest.hpp"

namespace racelab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Thrown for a failed validation; the message is already printed.
struct ValidationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
};

struct Context {
    RunConfig config;
    std::uint64_t seed;
    json config_doc;
    unsigned jobs;

    json provenance_block() const { return provenance(seed, config_doc); }
};

Context make_context(const Common& common, std::uint64_t fallback_seed = 1) {
    Context ctx;
    if (!common.config_path.empty()) ctx.config = load_config(common.config_path);
    ctx.seed = resolve_seed(common.seed ? common.seed : ctx.config.seed, fallback_seed);
    ctx.config_doc = config_to_json(ctx.config);
    ctx.jobs = common.jobs;
    return ctx;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

std::string provenance_comment(const Context& ctx) {
    const auto p = ctx.provenance_block();
    return "# seed=" + std::to_string(ctx.seed) + " config_hash=" + p["config_hash"].get<std::string>() +
           " tool_version=" + std::string(tool_version) + "\n";
}

void write_json(const fs::path& path, const json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

const TaskSpec& require_task(const RunConfig& c) {
    if (!c.task) throw std::runtime_error("config has no task section");
    return *c.task;
}

const Matrix& require_evidence(const RunConfig& c) {
    if (!c.evidence) throw std::runtime_error("config has no evidence section");
    return *c.evidence;
}

std::vector<std::size_t> truth_of(const TaskSpec& task) {
    std::vector<std::size_t> truth(task.nature_count());
    for (std::size_t o = 0; o < truth.size(); ++o) truth[o] = task.category_of(o);
    return truth;
}

WeightState hawkes_weights(const RunConfig& c) {
    if (c.weights) return WeightState::fixed(*c.weights);
    return WeightState::fixed(feature_discrepancy(require_task(c)).limit_weights);
}

RaceModel build_model(const std::string& kind, const RunConfig& c) {
    if (kind == "ddm") return DdmRace{require_evidence(c), c.race};
    if (kind == "poisson") return PoissonRace{require_evidence(c), c.race};
    if (kind == "hawkes") return HawkesRace{require_task(c), hawkes_weights(c), c.kernel, c.race};
    throw std::runtime_error("unknown model '" + kind + "' (ddm, poisson, hawkes)");
}

std::string category_label(const RunConfig& c, std::size_t j) {
    if (c.task && j < c.task->category_count()) return c.task->categories()[j].name;
    return "category" + std::to_string(j);
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string model = "poisson";
    std::size_t trials = 1000;
    std::string out;
    std::string dump;
};

void dump_paths(const Context& ctx, const RaceModel& model, const fs::path& path) {
    const RunConfig& c = ctx.config;
    const Seed seed = Seed{ctx.seed}.derive(0xd0ULL);
    std::string csv = provenance_comment(ctx) + "entity_id,time,value_or_count\n";
    const RaceParams& p = race_params(model);
    const std::size_t nature = 0;
    if (const auto* ddm = std::get_if<DdmRace>(&model)) {
        for (std::size_t j = 0; j < ddm->drifts.rows(); ++j) {
            const double mu = ddm->drifts(j, nature);
            const auto path_j = sample_brownian_drift(mu, std::sqrt(mu), p, seed.derive(j));
            for (std::size_t k = 0; k < path_j.values.size(); ++k)
                csv += category_label(c, j) + "," + fmt(path_j.time(k)) + "," + fmt(path_j.values[k]) + "\n";
        }
    } else if (const auto* poi = std::get_if<PoissonRace>(&model)) {
        for (std::size_t j = 0; j < poi->rates.rows(); ++j) {
            const auto train = sample_poisson(poi->rates(j, nature), p.horizon, seed.derive(j));
            for (std::size_t k = 0; k < train.size(); ++k)
                csv += category_label(c, j) + "," + fmt(train.times[k]) + "," + std::to_string(k + 1) + "\n";
        }
    } else {
        const auto& hk = std::get<HawkesRace>(model);
        Rng rng(seed);
        const auto rates = hk.task.rates_for(nature);
        std::vector<SpikeTrain> inputs;
        for (std::size_t i = 0; i < rates.size(); ++i) inputs.push_back(sample_poisson(rates[i], p.horizon, rng));
        for (std::size_t i = 0; i < inputs.size(); ++i)
            for (std::size_t k = 0; k < inputs[i].size(); ++k)
                csv += hk.task.features()[i] + "," + fmt(inputs[i].times[k]) + "," + std::to_string(k + 1) + "\n";
        for (std::size_t j = 0; j < hk.task.category_count(); ++j) {
            const auto w = hk.weights.column(j);
            const auto out = sample_hawkes_output(inputs, w, hk.kernel, p.horizon, rng);
            for (std::size_t k = 0; k < out.size(); ++k)
                csv += category_label(c, j) + "," + fmt(out.times[k]) + "," + std::to_string(k + 1) + "\n";
        }
    }
    write_file_atomic(path, csv);
}

int run_simulate(const Common& common, const SimulateArgs& a, std::ostream& out) {
    const Context ctx = make_context(common);
    const RaceModel model = build_model(a.model, ctx.config);
    const std::size_t natures = nature_count(model);
    std::vector<DecisionOutcome> outcomes(a.trials);
    const Seed seed{ctx.seed};
    parallel_for(a.trials, [&](std::size_t t) { outcomes[t] = run_trial(model, t % natures, seed.derive(t)); },
                 ctx.jobs);

    std::string csv = provenance_comment(ctx) + "trial,model,nature,choice,rt,crossed\n";
    for (std::size_t t = 0; t < a.trials; ++t) {
        const auto& o = outcomes[t];
        const std::size_t nature = t % natures;
        const std::string nature_name = ctx.config.task ? ctx.config.task->natures()[nature] : std::to_string(nature);
        csv += std::to_string(t) + "," + std::string(model_name(model)) + "," + nature_name + "," +
               (o.choice ? category_label(ctx.config, *o.choice) : std::string()) + "," +
               (o.crossed ? fmt(o.reaction_time) : std::string()) + "," + (o.crossed ? "1" : "0") + "\n";
    }
    if (a.out.empty()) out << csv;
    else write_file_atomic(a.out, csv);
    if (!a.dump.empty()) dump_paths(ctx, model, a.dump);
    return exit_ok;
}

// ---- bounds -----------------------------------------------------------------

struct BoundsArgs {
    double alpha = 0.1;
    std::size_t trials = 2000;
    std::size_t tail_draws = 100000;
    std::size_t paths = 2000;
    std::string out;
};

json margin_json(const MarginReport& m) {
    json w = json::array();
    for (const auto& x : m.witnesses)
        w.push_back({{"nature", x.nature}, {"leader", x.leader}, {"competitor", x.competitor}});
    return {{"value", m.value ? json(*m.value) : json(nullptr)}, {"min_gap", m.min_gap}, {"witnesses", w}};
}

int run_bounds(const Common& common, const BoundsArgs& a, std::ostream& out) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw std::domain_error("--alpha must be in (0, 1)");
    const Context ctx = make_context(common);
    const TaskSpec& task = require_task(ctx.config);
    const Matrix& gamma = require_evidence(ctx.config);
    const double horizon = ctx.config.race.horizon;
    bool all_pass = true;

    json report = {{"alpha", a.alpha}, {"horizon", horizon}};
    const auto drift = margin(gamma, task, MarginKind::drift);
    const auto poisson = margin(gamma, task, MarginKind::poisson);
    report["margins"] = {{"drift", margin_json(drift)}, {"poisson", margin_json(poisson)}};
    if (task.feature_count() > 0) report["margins"]["hawkes"] = margin_json(hawkes_margin(task));

    json interval_doc = nullptr;
    if (poisson.value) {
        const auto iv = poisson_threshold_interval(gamma, *poisson.value, a.alpha, horizon);
        interval_doc = {{"lo", iv.lo}, {"hi", iv.hi}, {"empty", iv.empty()}};
        if (!iv.empty()) {
            RaceParams p = ctx.config.race;
            p.theta = iv.midpoint();
            const auto truth = truth_of(task);
            const auto acc = mc_accuracy(PoissonRace{gamma, p}, truth, a.trials, Seed{ctx.seed}.derive(1), ctx.jobs);
            // Fails only when the guarantee is rejected by the Wilson interval.
            const bool pass = acc.ci.hi >= 1.0 - a.alpha;
            all_pass &= pass;
            interval_doc["midpoint"] = p.theta;
            interval_doc["accuracy"] = {{"value", acc.accuracy},
                                        {"timeout_rate", acc.timeout_rate},
                                        {"wilson_lo", acc.ci.lo},
                                        {"wilson_hi", acc.ci.hi},
                                        {"trials", acc.trials},
                                        {"pass", pass}};
        }
    }
    report["threshold_interval"] = interval_doc;

    json tails = json::array();
    const std::vector<double> xs{0.1, 0.25, 0.5, 1.0, 2.0};
    for (double g : {5.0, 50.0}) {
        for (const auto& t : validate_poisson_tails(g, xs, a.tail_draws, Seed{ctx.seed}.derive(2))) {
            bool pass = t.upper_frequency <= t.upper_bound;
            if (t.lower_frequency) pass = pass && *t.lower_frequency <= *t.lower_bound;
            all_pass &= pass;
            tails.push_back({{"gamma", t.gamma},
                             {"x", t.x},
                             {"upper_frequency", t.upper_frequency},
                             {"upper_bound", t.upper_bound},
                             {"lower_frequency", t.lower_frequency ? json(*t.lower_frequency) : json(nullptr)},
                             {"lower_bound", t.lower_bound ? json(*t.lower_bound) : json(nullptr)},
                             {"pass", pass}});
        }
    }
    report["poisson_tails"] = tails;

    double mu = 0.0;
    for (std::size_t r = 0; r < gamma.rows(); ++r)
        for (std::size_t o = 0; o < gamma.cols(); ++o) mu = std::max(mu, gamma(r, o));
    auto sup_json = [&](const ExceedanceCheck& e) {
        const bool pass = !e.precondition_met || e.frequency() <= a.alpha;
        all_pass &= pass;
        return json{{"bound", e.bound},        {"level", e.level},           {"paths", e.paths},
                    {"exceedances", e.exceedances}, {"frequency", e.frequency()}, {"precondition_met", e.precondition_met},
                    {"pass", pass}};
    };
    if (mu > 0.0) {
        report["poisson_sup"] = sup_json(validate_poisson_sup(mu, horizon, a.alpha, a.paths, Seed{ctx.seed}.derive(3), ctx.jobs));
        report["brownian_sup"] = sup_json(validate_brownian_sup(std::sqrt(mu), horizon, a.alpha, ctx.config.race.dt,
                                                                a.paths, Seed{ctx.seed}.derive(4), ctx.jobs));
    }
    report["pass"] = all_pass;
    report["provenance"] = ctx.provenance_block();
    if (a.out.empty()) out << report.dump(2) << "\n";
    else write_json(a.out, report);
    return all_pass ? exit_ok : exit_failure;
}

// ---- couple -----------------------------------------------------------------

struct CoupleArgs {
    std::vector<std::string> models{"poisson", "brownian", "hawkes"};
    std::vector<std::size_t> n{100, 1000, 10000};
    std::size_t reps = 500;
    double rate = 2.0;
    double theta = 4.0;
    double horizon = 8.0;
    std::vector<double> w1_rates;
    std::string out = ".";
};

int run_couple(const Common& common, const CoupleArgs& a, std::ostream& out) {
    const Context ctx = make_context(common);
    CouplingSetup setup;
    setup.rate = a.rate;
    setup.theta = a.theta;
    setup.horizon = a.horizon;
    setup.kernel = ctx.config.kernel;
    fs::create_directories(a.out);
    json report = {{"setup", {{"rate", a.rate}, {"theta", a.theta}, {"horizon", a.horizon}, {"reps", a.reps}}}};
    json fits = json::object();
    for (const auto& name : a.models) {
        const CouplingModel model = parse_coupling_model(name);
        const auto curve = hitting_error_curve(model, setup, a.n, a.reps, Seed{ctx.seed}.derive(static_cast<std::uint64_t>(model)),
                                               ctx.jobs);
        std::string csv = provenance_comment(ctx) + "n,median,q10,q90,unreached\n";
        for (std::size_t k = 0; k < curve.n_values.size(); ++k) {
            const auto& e = curve.errors[k];
            csv += std::to_string(curve.n_values[k]) + "," + fmt(e.median) + "," + fmt(e.q10) + "," + fmt(e.q90) + "," +
                   std::to_string(e.unreached) + "\n";
        }
        write_file_atomic(fs::path(a.out) / ("couple_" + name + ".csv"), csv);
        json fit = {{"limit", curve.limit}};
        if (curve.n_values.size() >= 2) {
            try {
                const auto f = rate_fit(curve);
                fit.update({{"slope", f.slope}, {"intercept", f.intercept}, {"ci", {f.ci_lo, f.ci_hi}},
                            {"degenerate", f.degenerate}});
            } catch (const std::domain_error& e) {
                fit["slope"] = nullptr;
                fit["note"] = e.what();
            }
        }
        fits[name] = fit;
    }
    report["rate_fits"] = fits;
    if (!a.w1_rates.empty()) {
        json w1 = json::array();
        std::string csv = provenance_comment(ctx) + "n,wasserstein,poisson_modal,ddm_modal\n";
        for (std::size_t n : a.n) {
            const auto r = model_agreement(a.w1_rates, a.theta, a.horizon, ctx.config.race.dt, n, a.reps,
                                           Seed{ctx.seed}.derive(0x31).derive(n), ctx.jobs);
            w1.push_back({{"n", n}, {"wasserstein", r.wasserstein}, {"agree", r.agree ? json(*r.agree) : json(nullptr)}});
            csv += std::to_string(n) + "," + fmt(r.wasserstein) + "," +
                   (r.poisson_modal ? std::to_string(*r.poisson_modal) : "") + "," +
                   (r.ddm_modal ? std::to_string(*r.ddm_modal) : "") + "\n";
        }
        write_file_atomic(fs::path(a.out) / "couple_w1.csv", csv);
        report["wasserstein"] = w1;
    }
    report["provenance"] = ctx.provenance_block();
    write_json(fs::path(a.out) / "couple_report.json", report);
    out << report["rate_fits"].dump(2) << "\n";
    return exit_ok;
}

// ---- experiment -------------------------------------------------------------

struct ExperimentSimArgs {
    double eta = 0.5;
    double theta = 0.1;
    std::string out;
    std::string group = "simulated";
};

int run_experiment_simulate(const Common& common, const ExperimentSimArgs& a, std::ostream& out) {
    const Context ctx = make_context(common);
    const auto& cfg = ctx.config.experiment;
    const Seed seed{ctx.seed};
    const RocketTask task = make_rocket_task(cfg.gamma, seed.derive(0x7a5c));
    Session s = simulate_session(task, a.eta, a.theta, cfg, seed);
    const auto group = parse_group(a.group);
    if (!group) throw std::domain_error("unknown group '" + a.group + "'");
    s.group = *group;
    s.extra_metadata["provenance"] = ctx.provenance_block();
    const std::string text = session_to_string(s) + "\n";
    if (a.out.empty()) out << text;
    else write_file_atomic(a.out, text);
    return exit_ok;
}

Session load_valid_session(const std::string& path, std::ostream& err) {
    const std::string text = read_file(path);
    auto result = validate_session(std::string_view(text));
    if (!result.ok()) {
        for (const auto& e : result.errors) err << path << ": " << e.path << ": " << e.message << "\n";
        throw ValidationFailed(path + " is not a valid session");
    }
    return std::move(*result.session);
}

int run_experiment_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    const Session s = load_valid_session(path, err);
    out << path << ": valid (" << s.phase_trials(Phase::learning).size() << " learning, "
        << s.phase_trials(Phase::transfer).size() << " transfer trials)\n";
    return exit_ok;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
    std::string session;
    std::size_t sims = 5000;
    double quantile = 0.02;
    std::string out;
};

double mean_learning_rt(const Session& s) {
    std::vector<double> rts;
    for (const auto* t : s.phase_trials(Phase::learning)) rts.push_back(t->rt_ms / 1000.0);
    return rts.empty() ? 0.0 : stats::mean(rts);
}

int run_fit(const Common& common, const FitArgs& a, std::ostream& out, std::ostream& err) {
    if (a.session.empty()) throw std::runtime_error("--session is required");
    const Session observed = load_valid_session(a.session, err);
    const Context ctx = make_context(common);
    AbcOptions options;
    options.n_sims = a.sims;
    options.quantile = a.quantile;
    options.jobs = ctx.jobs;
    const auto sample = abc_fit(observed, PriorBox{}, ctx.config.experiment, options, Seed{ctx.seed});
    json doc = posterior_to_json(sample);
    doc["session"] = {{"path", a.session},
                      {"participant_id", observed.participant_id},
                      {"group", to_string(observed.group)},
                      {"mean_learning_rt", mean_learning_rt(observed)}};
    doc["config"] = ctx.config.experiment.to_json();
    doc["provenance"] = ctx.provenance_block();
    if (a.out.empty()) out << doc.dump(2) << "\n";
    else write_json(a.out, doc);
    if (sample.low_confidence) err << "warning: observed session hit the hard cap; fit is low-confidence\n";
    return exit_ok;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
    std::string posteriors;
    std::string k = "auto";
    std::size_t k_max = 6;
    std::size_t restarts = 10;
    bool standardize = false;
    bool yates = false;
    std::string out = "report.json";
};

int run_analyze(const Common& common, const AnalyzeArgs& a, std::ostream& out) {
    const Context ctx = make_context(common);
    if (!fs::is_directory(a.posteriors)) throw std::runtime_error("not a directory: " + a.posteriors);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.posteriors))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<Point2> points;
    std::vector<std::string> groups, names;
    std::vector<double> theta_hat, mean_rt;
    for (const auto& f : files) {
        json doc;
        try {
            doc = json::parse(read_file(f));
        } catch (const json::exception& e) {
            throw std::runtime_error(f.string() + ": " + e.what());
        }
        if (!doc.contains("eta_hat") || !doc.contains("theta_hat")) continue;
        const double eta = doc.at("eta_hat").get<double>();
        const double theta = doc.at("theta_hat").get<double>();
        points.push_back({eta, theta});
        names.push_back(f.filename().string());
        const json session = doc.value("session", json::object());
        groups.push_back(session.value("group", std::string("unknown")));
        theta_hat.push_back(theta);
        mean_rt.push_back(session.value("mean_learning_rt", std::nan("")));
    }
    if (points.size() < 3) throw std::runtime_error("need at least 3 posterior files in " + a.posteriors);

    const auto space = a.standardize ? standardized(points) : points;
    const Seed seed{ctx.seed};
    const std::size_t k_hi = std::min(a.k_max, space.size() - 1);
    const auto selection = select_k(space, 2, std::max<std::size_t>(2, k_hi), seed, a.restarts);
    std::size_t k;
    if (a.k == "auto") k = selection.best_k;
    else {
        k = std::stoul(a.k);
        if (k < 2) throw std::domain_error("--k must be auto or >= 2");
    }
    const auto clustering = kmeans(space, k, seed, a.restarts);
    const auto sil = silhouette(space, clustering.labels, k);

    json report = {{"n_points", points.size()}, {"k", k}, {"standardized", a.standardize}};
    json centers = json::array();
    for (const auto& c : clustering.centers) centers.push_back({c[0], c[1]});
    report["centers"] = centers;
    report["wcss"] = clustering.wcss;
    report["silhouette"] = sil.mean;
    json per_k = json::array();
    for (std::size_t i = 0; i < selection.k_values.size(); ++i)
        per_k.push_back({{"k", selection.k_values[i]}, {"silhouette", selection.scores[i]}});
    report["silhouette_per_k"] = per_k;

    std::set<std::string> group_set(groups.begin(), groups.end());
    const std::vector<std::string> group_order(group_set.begin(), group_set.end());
    const auto table = contingency(groups, clustering.labels, k, group_order);
    report["contingency"] = {{"groups", group_order}, {"counts", table}};
    if (group_order.size() >= 2) {
        try {
            const auto chi = chi_square_independence(table, a.yates);
            report["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value},
                                    {"yates", a.yates}};
        } catch (const std::domain_error& e) {
            report["chi_square"] = {{"error", e.what()}};
        }
    }
    std::vector<double> th, rt;
    for (std::size_t i = 0; i < theta_hat.size(); ++i)
        if (std::isfinite(mean_rt[i])) {
            th.push_back(theta_hat[i]);
            rt.push_back(mean_rt[i]);
        }
    try {
        const auto fit = rt_vs_theta(th, rt);
        report["rt_vs_theta"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r", fit.r}, {"n", fit.n}};
    } catch (const std::domain_error& e) {
        report["rt_vs_theta"] = {{"error", e.what()}};
    }
    report["provenance"] = ctx.provenance_block();

    const fs::path out_path(a.out);
    write_json(out_path, report);
    const fs::path stem = out_path.parent_path() / out_path.stem();
    std::string labels = provenance_comment(ctx) + "file,group,eta_hat,theta_hat,cluster\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        labels += names[i] + "," + groups[i] + "," + fmt(points[i][0]) + "," + fmt(points[i][1]) + "," +
                  std::to_string(clustering.labels[i]) + "\n";
    write_file_atomic(stem.string() + ".labels.csv", labels);
    std::string curve = provenance_comment(ctx) + "k,silhouette\n";
    for (std::size_t i = 0; i < selection.k_values.size(); ++i)
        curve += std::to_string(selection.k_values[i]) + "," + fmt(selection.scores[i]) + "\n";
    write_file_atomic(stem.string() + ".silhouette.csv", curve);
    out << "k=" << k << " silhouette=" << sil.mean << " points=" << points.size() << "\n";
    return exit_ok;
}

// ---- serve ------------------------------------------------------------------

int run_serve(const ServeOptions& o, std::ostream& out) {
    IngestServer server(o);
    const int port = server.bind();
    out << "listening on http://" << o.host << ":" << port << " storage=" << o.storage.string() << std::endl;
    return server.listen() ? exit_ok : exit_failure;
}

template <class T>
std::vector<T> split_list(const std::string& text) {
    std::vector<T> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if constexpr (std::is_same_v<T, std::string>) values.push_back(item);
        else {
            std::istringstream is(item);
            T v;
            if (!(is >> v) || !is.eof()) throw CLI::ValidationError("bad list item '" + item + "'");
            values.push_back(v);
        }
    }
    return values;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Race-to-threshold decision models: simulation, bounds, coupling, experiment, inference", "race-lab"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "JSON configuration document");
    app.add_option("--seed", common.seed, "base seed (RACE_LAB_SEED takes precedence)");
    app.add_option("--jobs", common.jobs, "worker threads, 0 = hardware concurrency");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "batch of race trials as CSV");
    simulate->add_option("--model", sim.model, "ddm, poisson or hawkes")->capture_default_str();
    simulate->add_option("--trials", sim.trials)->capture_default_str();
    simulate->add_option("--out", sim.out, "CSV path (stdout if omitted)");
    simulate->add_option("--dump", sim.dump, "CSV of the processes of one trial");

    BoundsArgs bnd;
    auto* bounds = app.add_subcommand("bounds", "margins, threshold interval and bound validators");
    bounds->require_subcommand(1, 1);
    bounds->fallthrough();
    auto* report = bounds->add_subcommand("report", "JSON report for the configured task");
    report->add_option("--alpha", bnd.alpha)->capture_default_str();
    report->add_option("--trials", bnd.trials)->capture_default_str();
    report->add_option("--tail-draws", bnd.tail_draws)->capture_default_str();
    report->add_option("--paths", bnd.paths)->capture_default_str();
    report->add_option("--out", bnd.out);

    CoupleArgs cpl;
    std::string cpl_models = "poisson,brownian,hawkes", cpl_n = "100,1000,10000", cpl_w1;
    auto* couple = app.add_subcommand("couple", "hitting-time error curves under scaling");
    couple->add_option("--model", cpl_models, "comma list of poisson, brownian, hawkes")->capture_default_str();
    couple->add_option("--n", cpl_n, "comma list of scaling factors")->capture_default_str();
    couple->add_option("--reps", cpl.reps)->capture_default_str();
    couple->add_option("--rate", cpl.rate)->capture_default_str();
    couple->add_option("--theta", cpl.theta)->capture_default_str();
    couple->add_option("--horizon", cpl.horizon)->capture_default_str();
    couple->add_option("--w1-rates", cpl_w1, "comma list of category rates for the W1 comparison");
    couple->add_option("--out", cpl.out, "output directory")->capture_default_str();

    ExperimentSimArgs exs;
    std::string validate_path;
    auto* experiment = app.add_subcommand("experiment", "rocket task sessions");
    experiment->require_subcommand(1, 1);
    experiment->fallthrough();
    auto* exp_sim = experiment->add_subcommand("simulate", "simulate one session");
    exp_sim->add_option("--eta", exs.eta)->required();
    exp_sim->add_option("--theta", exs.theta)->required();
    exp_sim->add_option("--out", exs.out);
    exp_sim->add_option("--group", exs.group)->capture_default_str();
    auto* exp_val = experiment->add_subcommand("validate", "check a session file");
    exp_val->add_option("file", validate_path)->required();

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "ABC posterior of (eta, theta) for one session");
    fit->add_option("--session", fit_args.session)->required();
    fit->add_option("--sims", fit_args.sims)->capture_default_str();
    fit->add_option("--quantile", fit_args.quantile)->capture_default_str();
    fit->add_option("--out", fit_args.out);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "clustering and chi-square over fitted posteriors");
    analyze->add_option("--posteriors", an.posteriors)->required();
    analyze->add_option("--k", an.k, "auto or a cluster count")->capture_default_str();
    analyze->add_option("--k-max", an.k_max)->capture_default_str();
    analyze->add_option("--restarts", an.restarts)->capture_default_str();
    analyze->add_flag("--standardize", an.standardize);
    analyze->add_flag("--yates", an.yates);
    analyze->add_option("--out", an.out)->capture_default_str();

    ServeOptions srv;
    std::string static_dir, storage = "sessions";
    auto* serve = app.add_subcommand("serve", "session ingest service and task UI host");
    serve->add_option("--host", srv.host)->capture_default_str();
    serve->add_option("--port", srv.port)->capture_default_str();
    serve->add_option("--storage", storage)->capture_default_str();
    serve->add_option("--static", static_dir, "built task UI directory");

    if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
        const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
        if (std::none_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args.front(); })) {
            err << "unknown subcommand '" << args.front() << "'\n" << app.help();
            return exit_usage;
        }
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        cpl.models = split_list<std::string>(cpl_models);
        cpl.n = split_list<std::size_t>(cpl_n);
        cpl.w1_rates = split_list<double>(cpl_w1);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    } catch (const CLI::CallForVersion& e) {
        out << tool_version << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return exit_usage;
    }

    try {
        if (*simulate) return run_simulate(common, sim, out);
        if (*report) return run_bounds(common, bnd, out);
        if (*couple) return run_couple(common, cpl, out);
        if (*exp_sim) return run_experiment_simulate(common, exs, out);
        if (*exp_val) return run_experiment_validate(validate_path, out, err);
        if (*fit) return run_fit(common, fit_args, out, err);
        if (*analyze) return run_analyze(common, an, out);
        if (*serve) {
            srv.storage = storage;
            if (!static_dir.empty()) srv.static_dir = static_dir;
            return run_serve(srv, out);
        }
    } catch (const ValidationFailed& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
    err << app.help();
    return exit_usage;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace racelab::cli
