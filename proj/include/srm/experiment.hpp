// Configuration-driven experiments behind the srmrl command line tool.
//
// A config is a flat JSON object. Unknown keys are rejected so typos surface
// as validation errors instead of silently using defaults. Every output byte is
// a function of the config (and input files); wall-clock columns stay zero
// unless record_wall_time is set.
#pragma once

#include "bounds.hpp"
#include "domains.hpp"
#include "evaluation.hpp"
#include "io.hpp"
#include "optimize.hpp"
#include "policy.hpp"

#include <json.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace srm {

enum class Algorithm { srm, mr };

inline std::string to_string(Algorithm a) { return a == Algorithm::srm ? "srm" : "mr"; }

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "srm") return Algorithm::srm;
    if (s == "mr") return Algorithm::mr;
    throw ValidationError("unknown algorithm '" + s + "' (expected srm or mr)");
}

struct ExperimentConfig {
    // domain
    std::string domain = "toy1d";
    std::size_t horizon = 0; // 0: preset default
    bool noise = true;
    int toy_sign_mode = -1;
    double pendulum_fall_band = 0.2;
    double pendulum_max_rate = 10.0;
    std::size_t intruder_count = 1;
    double intruder_d_min = 0.1;
    double intruder_r_cam = 0.5;
    bool intruder_negate = false;

    // structure
    std::string representation = "rbf";
    std::string scheme = "magnitude";
    std::vector<std::size_t> centers_per_dim; // empty: preset default
    double rbf_width = 0.0;
    double epsilon = 1e-3;
    std::vector<double> limits; // empty: preset default
    std::vector<std::size_t> untied;
    double tying_cap = 1.0;

    // estimators
    std::size_t n_episodes = 50;
    std::size_t n_tilde = 0; // 0: max(1, floor(n_tilde_fraction * N))
    double n_tilde_fraction = 0.1;
    std::string weights = "range";
    std::string lipschitz_mode = "policy";
    std::string hoeffding_count = "n_tilde";
    double delta = 0.05;
    std::size_t sigma_draws = 100;
    std::string enumeration = "auto";
    std::size_t enumerate_max_n = 12;
    std::string rademacher_estimator = "direct";

    // optimizer
    std::size_t restarts = 20;
    std::size_t max_iterations = 50;
    double step_size = 0.05;
    double fd_step = 1e-3;
    double convergence_tol = 1e-6;
    std::size_t sup_restarts = 4;
    std::size_t sup_max_iterations = 20;

    // experiment
    std::uint64_t seed = 1;
    std::vector<std::size_t> sweep_episodes{5, 10, 20, 50, 100};
    std::size_t sweep_seeds = 30;
    std::vector<std::string> algorithms{"srm", "mr"};
    std::size_t eval_rollouts = 2000;
    bool record_wall_time = false;
    std::vector<std::size_t> rademacher_check_draws{10, 100, 1000, 10000};
    std::size_t rademacher_check_seeds = 20;
    std::size_t rademacher_check_class = 0; // 0: largest class
    std::string out = "out";

    void validate() const;
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& field) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace detail

#define SRM_CONFIG_FIELDS(X)                                                                                     \
    X(domain) X(horizon) X(noise) X(toy_sign_mode) X(pendulum_fall_band) X(pendulum_max_rate) X(intruder_count)  \
    X(intruder_d_min) X(intruder_r_cam) X(intruder_negate) X(representation) X(scheme) X(centers_per_dim)        \
    X(rbf_width) X(epsilon) X(limits) X(untied) X(tying_cap) X(n_episodes) X(n_tilde) X(n_tilde_fraction)        \
    X(weights) X(lipschitz_mode) X(hoeffding_count) X(delta) X(sigma_draws) X(enumeration) X(enumerate_max_n)    \
    X(rademacher_estimator) X(restarts) X(max_iterations) X(step_size) X(fd_step) X(convergence_tol)             \
    X(sup_restarts) X(sup_max_iterations) X(seed) X(sweep_episodes) X(sweep_seeds) X(algorithms)                 \
    X(eval_rollouts) X(record_wall_time) X(rademacher_check_draws) X(rademacher_check_seeds)                     \
    X(rademacher_check_class) X(out)

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    ExperimentConfig c;
    static const std::vector<std::string> known = {
#define SRM_NAME(f) #f,
        SRM_CONFIG_FIELDS(SRM_NAME)
#undef SRM_NAME
    };
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ValidationError("unknown config key '" + key + "'");
#define SRM_READ(f) detail::read_key(j, #f, c.f);
    SRM_CONFIG_FIELDS(SRM_READ)
#undef SRM_READ
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
#define SRM_WRITE(f) j[#f] = c.f;
    SRM_CONFIG_FIELDS(SRM_WRITE)
#undef SRM_WRITE
    return j;
}

#undef SRM_CONFIG_FIELDS

inline ExperimentConfig load_config(const std::string& path) {
    auto in = detail::open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

inline void ExperimentConfig::validate() const {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts, const char* key) {
        for (const char* o : opts)
            if (v == o) return;
        throw ValidationError(std::string("config key '") + key + "' has unsupported value '" + v + "'");
    };
    one_of(domain, {"toy1d", "pendulum", "intruder"}, "domain");
    one_of(representation, {"rbf", "invdist"}, "representation");
    one_of(scheme, {"magnitude", "tying"}, "scheme");
    one_of(weights, {"range", "unit"}, "weights");
    one_of(lipschitz_mode, {"policy", "class"}, "lipschitz_mode");
    one_of(hoeffding_count, {"n_tilde", "n_episodes"}, "hoeffding_count");
    one_of(enumeration, {"auto", "exact", "sampled"}, "enumeration");
    one_of(rademacher_estimator, {"direct", "surrogate"}, "rademacher_estimator");
    for (const auto& a : algorithms) parse_algorithm(a);
    if (n_episodes < 1) throw ValidationError("n_episodes must be >= 1");
    if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("delta must lie in (0, 0.5)");
    if (sigma_draws < 1) throw ValidationError("sigma_draws must be >= 1");
    if (!(n_tilde_fraction > 0.0 && n_tilde_fraction <= 1.0)) throw ValidationError("n_tilde_fraction must lie in (0, 1]");
    if (restarts < 1 || sup_restarts < 1) throw ValidationError("restarts must be >= 1");
    if (!(step_size > 0.0 && fd_step > 0.0 && convergence_tol > 0.0))
        throw ValidationError("step_size, fd_step and convergence_tol must be positive");
    if (eval_rollouts < 1) throw ValidationError("eval_rollouts must be >= 1");
    if (sweep_episodes.empty() || sweep_seeds < 1) throw ValidationError("sweep grid is empty");
    for (std::size_t n : sweep_episodes)
        if (n < 1) throw ValidationError("sweep_episodes entries must be >= 1");
    if (algorithms.empty()) throw ValidationError("algorithms must not be empty");
    if (toy_sign_mode != 1 && toy_sign_mode != -1) throw ValidationError("toy_sign_mode must be +1 or -1");
}

// ---- construction from a config ------------------------------------------------

inline DomainSpec make_domain(const ExperimentConfig& c) {
    try {
        if (c.domain == "toy1d") {
            ToyParams p;
            if (c.horizon) p.horizon = c.horizon;
            p.sign_mode = c.toy_sign_mode;
            p.noise = c.noise;
            return make_toy1d(p);
        }
        if (c.domain == "pendulum") {
            PendulumParams p;
            if (c.horizon) p.horizon = c.horizon;
            p.fall_band = c.pendulum_fall_band;
            p.max_rate = c.pendulum_max_rate;
            p.noise = c.noise;
            return make_pendulum(p);
        }
        IntruderParams p;
        if (c.horizon) p.horizon = c.horizon;
        p.intruders = c.intruder_count;
        p.d_min = c.intruder_d_min;
        p.r_cam = c.intruder_r_cam;
        p.negate = c.intruder_negate;
        p.noise = c.noise;
        return make_intruder(p);
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

inline std::vector<std::size_t> default_centers(const DomainSpec& d) {
    if (d.name == "toy1d") return {4};
    if (d.name == "pendulum") return {4, 4};
    std::vector<std::size_t> g(d.state_dim, 1); // intruder: grid over the camera, intruder coordinates at 0
    g[0] = g[1] = 4;
    return g;
}

inline std::vector<double> default_limits(const DomainSpec& d) {
    if (d.name == "toy1d") return {0.0, 0.125, 0.25, 0.375, 0.5};
    if (d.name == "pendulum") return {0.0, 50.0};
    return {0.0, 0.1};
}

inline DistanceWeights make_weights(const ExperimentConfig& c, const DomainSpec& d) {
    return c.weights == "unit" ? DistanceWeights::unit(d.state_dim, d.action_dim) : range_weights(d);
}

inline PolicyStructure make_structure(const ExperimentConfig& c, const DomainSpec& d) {
    StructureSpec s;
    s.representation = c.representation == "rbf" ? Representation::rbf : Representation::invdist;
    s.scheme = c.scheme == "magnitude" ? ParamScheme::magnitude : ParamScheme::tying;
    s.centers = grid_centers(d.state_bounds, c.centers_per_dim.empty() ? default_centers(d) : c.centers_per_dim);
    s.state_scale = make_weights(c, d).state_scale;
    s.action_bounds = d.action_bounds;
    s.rbf_width = c.rbf_width;
    s.epsilon = c.epsilon;
    s.limits = c.limits.empty() ? default_limits(d) : c.limits;
    s.untied = c.untied;
    s.tying_cap = c.tying_cap;
    try {
        return build_structure(s);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("structure: ") + e.what());
    } catch (const StructuralError& e) {
        throw ValidationError(std::string("structure: ") + e.what());
    }
}

inline EvaluationSettings make_eval_settings(const ExperimentConfig& c, const DomainSpec& d) {
    EvaluationSettings s;
    if (c.n_tilde) s.n_tilde = c.n_tilde;
    s.n_tilde_fraction = c.n_tilde_fraction;
    s.weights = make_weights(c, d);
    s.lipschitz_mode = c.lipschitz_mode == "policy" ? PolicyLipschitzMode::per_policy : PolicyLipschitzMode::class_bound;
    s.hoeffding_count = c.hoeffding_count == "n_tilde" ? HoeffdingCount::n_tilde : HoeffdingCount::n_episodes;
    return s;
}

inline ConfidenceParams make_confidence(const ExperimentConfig& c) {
    ConfidenceParams p;
    p.delta = c.delta;
    p.sigma_draws = c.sigma_draws;
    p.enumeration = c.enumeration == "auto"    ? SignEnumeration::automatic
                    : c.enumeration == "exact" ? SignEnumeration::exact
                                               : SignEnumeration::sampled;
    p.enumerate_max_n = c.enumerate_max_n;
    p.estimator = c.rademacher_estimator == "direct" ? RademacherEstimator::direct : RademacherEstimator::surrogate;
    return p;
}

// Seed roles within one (N, seed) cell.
enum class SeedRole : std::uint64_t { data = 1, search = 2, sup = 3, signs = 4, rollouts = 5 };

inline std::uint64_t role_seed(std::uint64_t base, std::size_t n_episodes, SeedRole r) {
    return derive_seed(base, {static_cast<std::uint64_t>(r), n_episodes});
}

inline SrmSettings make_srm_settings(const ExperimentConfig& c, std::uint64_t base, std::size_t n_episodes) {
    SrmSettings s;
    s.search.restarts = c.restarts;
    s.search.max_iterations = c.max_iterations;
    s.search.step_size = c.step_size;
    s.search.fd_step = c.fd_step;
    s.search.convergence_tol = c.convergence_tol;
    s.search.master_seed = role_seed(base, n_episodes, SeedRole::search);
    s.sup_search = s.search;
    s.sup_search.restarts = c.sup_restarts;
    s.sup_search.max_iterations = c.sup_max_iterations;
    s.sup_search.master_seed = role_seed(base, n_episodes, SeedRole::sup);
    s.sign_seed = role_seed(base, n_episodes, SeedRole::signs);
    return s;
}

// ---- learning ------------------------------------------------------------------

struct LearnOutcome {
    Algorithm algorithm = Algorithm::srm;
    std::size_t selected_k = 0; // 1-based
    CandidateResult candidate;
    std::vector<BoundReport> reports; // SRM: every class; MR: the largest class only
    std::vector<double> objectives;   // search objective per report
};

inline BoundReport selected_report(const LearnOutcome& o) {
    for (const auto& r : o.reports)
        if (r.class_index == o.selected_k) return r;
    throw StructuralError("selected class has no report");
}

inline LearnOutcome learn_srm(const PolicyStructure& st, const EvaluationContext& ctx, const ConfidenceParams& conf,
                              const SrmSettings& s) {
    SrmSelection sel = srm_select(st, ctx, conf, s);
    LearnOutcome o;
    o.algorithm = Algorithm::srm;
    o.selected_k = sel.k_hat;
    o.candidate = sel.candidate;
    o.reports = sel.reports;
    for (const auto& c : sel.candidates) o.objectives.push_back(c.objective);
    return o;
}

// MR's report bounds its policy against the largest class. A Rademacher value
// already computed for that class (same seeds) may be passed in.
inline LearnOutcome learn_mr(const PolicyStructure& st, const EvaluationContext& ctx, const ConfidenceParams& conf,
                             const SrmSettings& s, std::optional<double> largest_rademacher = std::nullopt) {
    LearnOutcome o;
    o.algorithm = Algorithm::mr;
    o.candidate = mr_select(st, ctx, s.search);
    o.selected_k = st.size();
    const PolicyClass& cls = st.largest();
    const std::uint64_t kk = st.size();
    const double rad = largest_rademacher
                           ? *largest_rademacher
                           : rademacher_estimate_rl(
                                 cls, ctx, conf,
                                 rademacher_sup_callback(s.sup_search.with_seed(derive_seed(s.sup_search.master_seed, {kk}))),
                                 derive_seed(s.sign_seed, {kk}));
    o.reports.push_back(compose_bound_report(ctx.evaluate(cls, o.candidate.params), rad, ctx, conf, kk));
    o.objectives.push_back(o.candidate.objective);
    return o;
}

inline const char* kReportHeader =
    "class_index,selected,objective,v_mfmc,discrepancy_d,hoeffding_term,rademacher_estimate,"
    "rademacher_error_term,omega,lower_bound,confidence_multiplier,rademacher_normalized,hoeffding_n,"
    "hoeffding_count,estimator";

inline void write_report_csv(std::ostream& out, const LearnOutcome& o) {
    out << kReportHeader << "\n";
    for (std::size_t i = 0; i < o.reports.size(); ++i) {
        const BoundReport& r = o.reports[i];
        out << r.class_index << ',' << (r.class_index == o.selected_k ? 1 : 0) << ',' << csv_number(o.objectives[i])
            << ',' << csv_number(r.v_mfmc) << ',' << csv_number(r.discrepancy_d) << ',' << csv_number(r.hoeffding_term)
            << ',' << csv_number(r.rademacher_estimate) << ',' << csv_number(r.rademacher_error_term) << ','
            << csv_number(r.omega) << ',' << csv_number(r.lower_bound) << ',' << r.confidence_multiplier << ','
            << csv_number(r.rademacher_normalized) << ',' << r.hoeffding_n << ',' << to_string(r.hoeffding_count)
            << ',' << to_string(r.estimator) << "\n";
    }
}

// ---- commands ---------------------------------------------------------------------

inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

inline TransitionDataset collect(const DomainSpec& d, std::size_t n_episodes,
                                 std::uint64_t base) {
    const auto episodes = collect_random_dataset(d, n_episodes, role_seed(base, n_episodes, SeedRole::data));
    return reindex_dataset(episodes);
}

inline std::string run_collect(const ExperimentConfig& c, std::ostream& log) {
    const DomainSpec d = make_domain(c);
    const TransitionDataset data = collect(d, c.n_episodes, c.seed);
    const auto path = ensure_dir(c.out) / "dataset.csv";
    write_dataset(path.string(), data, d.name, d.return_range);
    log << "N=" << data.episode_count() << " T=" << data.horizon() << " transitions=" << data.size() << "\n";
    return path.string();
}

inline DatasetFile load_compatible_dataset(const std::string& path, const DomainSpec& d) {
    DatasetFile f = read_dataset(path);
    if (f.domain != d.name)
        throw ValidationError("dataset was collected on domain '" + f.domain + "' but the config names '" + d.name + "'");
    if (f.data.state_dim() != d.state_dim || f.data.action_dim() != d.action_dim || f.data.horizon() != d.horizon)
        throw ValidationError("dataset dimensions or horizon do not match domain '" + d.name + "'");
    if (f.range.lower != d.return_range.lower || f.range.upper != d.return_range.upper)
        throw ValidationError("dataset return range differs from domain '" + d.name + "'");
    return f;
}

inline LearnOutcome run_learn(const ExperimentConfig& c, const std::string& dataset_path, Algorithm algo,
                              std::ostream& log) {
    const DomainSpec d = make_domain(c);
    const DatasetFile f = load_compatible_dataset(dataset_path, d);
    const PolicyStructure st = make_structure(c, d);
    const EvaluationContext ctx(d, f.data, make_eval_settings(c, d));
    const ConfidenceParams conf = make_confidence(c);
    const SrmSettings s = make_srm_settings(c, c.seed, f.data.episode_count());
    LearnOutcome o = algo == Algorithm::srm ? learn_srm(st, ctx, conf, s) : learn_mr(st, ctx, conf, s);
    const auto dir = ensure_dir(c.out);
    write_policy((dir / ("policy_" + to_string(algo) + ".txt")).string(), o.candidate.params,
                 st[o.selected_k - 1]);
    {
        auto out = detail::open_out((dir / ("report_" + to_string(algo) + ".csv")).string());
        write_report_csv(out, o);
    }
    const BoundReport r = selected_report(o);
    log << to_string(algo) << ": selected k=" << o.selected_k << " of " << st.size()
        << " lower_bound=" << csv_number(r.lower_bound) << " v_mfmc=" << csv_number(r.v_mfmc)
        << " d=" << csv_number(r.discrepancy_d) << "\n";
    return o;
}

inline MonteCarloReturn run_evaluate(const ExperimentConfig& c, const std::string& policy_path, std::ostream& log) {
    const DomainSpec d = make_domain(c);
    const PolicyStructure st = make_structure(c, d);
    const PolicyFile pf = read_policy(policy_path);
    if (pf.class_index < 1 || pf.class_index > st.size())
        throw ValidationError("policy class index " + std::to_string(pf.class_index) + " is outside the structure");
    const PolicyClass& cls = st[pf.class_index - 1];
    if (pf.representation != representation(cls) || pf.limit != magnitude_limit(cls))
        throw ValidationError("policy file does not belong to the configured structure");
    if (!is_feasible(pf.params, cls)) throw ValidationError("policy parameters are infeasible for their class");
    const auto mc = true_return_mc(d, PolicyView(cls, pf.params), c.eval_rollouts,
                                   role_seed(c.seed, 0, SeedRole::rollouts));
    auto out = detail::open_out((ensure_dir(c.out) / "evaluate.csv").string());
    out << "policy,class_index,rollouts,true_return_mean,true_return_stderr\n"
        << std::filesystem::path(policy_path).filename().string() << ',' << pf.class_index << ',' << c.eval_rollouts
        << ',' << csv_number(mc.mean) << ',' << csv_number(mc.stderr_) << "\n";
    log << "true_return_mean=" << csv_number(mc.mean) << " stderr=" << csv_number(mc.stderr_) << "\n";
    return mc;
}

// ---- sweep ----------------------------------------------------------------------

struct SweepRow {
    Algorithm algorithm = Algorithm::srm;
    std::size_t n_episodes = 0;
    std::size_t seed = 0;
    std::size_t selected_k = 0;
    double true_return_mean = 0.0;
    double true_return_stderr = 0.0;
    double lower_bound = 0.0;
    double v_mfmc = 0.0;
    double discrepancy_d = 0.0;
    double omega = 0.0;
    double wall_time_s = 0.0;
    std::string error;
};

inline const char* kSweepHeader = "algorithm,n_episodes,seed,selected_k,true_return_mean,true_return_stderr,"
                                  "lower_bound,v_mfmc,discrepancy_d,omega,wall_time_s,error";

inline void write_sweep_row(std::ostream& out, const SweepRow& r) {
    out << to_string(r.algorithm) << ',' << r.n_episodes << ',' << r.seed << ',' << r.selected_k << ','
        << csv_number(r.true_return_mean) << ',' << csv_number(r.true_return_stderr) << ','
        << csv_number(r.lower_bound) << ',' << csv_number(r.v_mfmc) << ',' << csv_number(r.discrepancy_d) << ','
        << csv_number(r.omega) << ',' << csv_number(r.wall_time_s) << ',' << r.error << "\n";
}

// One (N, seed) cell: both algorithms on the same dataset and the same
// evaluation rollouts.
inline std::vector<SweepRow> run_sweep_cell(const ExperimentConfig& c, const DomainSpec& d, const PolicyStructure& st,
                                            std::size_t n_episodes, std::size_t seed_index) {
    const std::uint64_t base = derive_seed(c.seed, {seed_index});
    std::vector<Algorithm> algos;
    for (const auto& a : c.algorithms) algos.push_back(parse_algorithm(a));
    std::vector<SweepRow> rows;
    for (Algorithm a : algos) {
        SweepRow r;
        r.algorithm = a;
        r.n_episodes = n_episodes;
        r.seed = seed_index;
        rows.push_back(r);
    }
    try {
        const TransitionDataset data = collect(d, n_episodes, base);
        const EvaluationContext ctx(d, data, make_eval_settings(c, d));
        const ConfidenceParams conf = make_confidence(c);
        const SrmSettings s = make_srm_settings(c, base, n_episodes);
        std::optional<double> largest_rad;
        for (std::size_t i = 0; i < algos.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            LearnOutcome o;
            if (algos[i] == Algorithm::srm) {
                o = learn_srm(st, ctx, conf, s);
                largest_rad = o.reports.back().rademacher_normalized;
            } else {
                o = learn_mr(st, ctx, conf, s, largest_rad);
            }
            const BoundReport rep = selected_report(o);
            const auto mc = true_return_mc(d, PolicyView(st[o.selected_k - 1], o.candidate.params), c.eval_rollouts,
                                           role_seed(base, n_episodes, SeedRole::rollouts));
            SweepRow& r = rows[i];
            r.selected_k = o.selected_k;
            r.true_return_mean = mc.mean;
            r.true_return_stderr = mc.stderr_;
            r.lower_bound = rep.lower_bound;
            r.v_mfmc = rep.v_mfmc;
            r.discrepancy_d = rep.discrepancy_d;
            r.omega = rep.omega;
            if (c.record_wall_time)
                r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        for (auto& r : rows)
            if (r.selected_k == 0) r.error = msg;
    }
    return rows;
}

struct SweepResult {
    std::vector<SweepRow> rows; // ordered by algorithm, then N, then seed
    std::string csv_path;
    std::string summary_path;
};

// Mean and 95% confidence half-width of the mean (Student t).
inline std::pair<double, double> mean_ci95(const std::vector<double>& x) {
    if (x.empty()) return {std::nan(""), std::nan("")};
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    if (x.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double n = static_cast<double>(x.size());
    const double se = std::sqrt(ss / (n - 1.0) / n);
    const boost::math::students_t dist(n - 1.0);
    return {m, boost::math::quantile(boost::math::complement(dist, 0.025)) * se};
}

inline double median(std::vector<double> x) {
    if (x.empty()) return std::nan("");
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

inline const char* kSummaryHeader =
    "algorithm,n_episodes,count,errors,true_return_mean,true_return_ci95,selected_k_mean,selected_k_ci95,"
    "selected_k_median,lower_bound_mean,lower_bound_ci95,v_mfmc_mean,v_mfmc_ci95,discrepancy_d_mean,"
    "discrepancy_d_ci95,omega_mean,omega_ci95";

inline void write_summary(std::ostream& out, const ExperimentConfig& c, const std::vector<SweepRow>& rows) {
    out << kSummaryHeader << "\n";
    for (const auto& an : c.algorithms) {
        const Algorithm a = parse_algorithm(an);
        for (std::size_t n : c.sweep_episodes) {
            std::vector<double> tr, k, lb, v, d, om;
            std::size_t errors = 0;
            for (const auto& r : rows) {
                if (r.algorithm != a || r.n_episodes != n) continue;
                if (!r.error.empty()) {
                    ++errors;
                    continue;
                }
                tr.push_back(r.true_return_mean);
                k.push_back(static_cast<double>(r.selected_k));
                lb.push_back(r.lower_bound);
                v.push_back(r.v_mfmc);
                d.push_back(r.discrepancy_d);
                om.push_back(r.omega);
            }
            out << an << ',' << n << ',' << tr.size() << ',' << errors;
            auto emit = [&](const std::vector<double>& x) {
                const auto [m, h] = mean_ci95(x);
                out << ',' << csv_number(m) << ',' << csv_number(h);
            };
            emit(tr);
            emit(k);
            out << ',' << csv_number(median(k));
            emit(lb);
            emit(v);
            emit(d);
            emit(om);
            out << "\n";
        }
    }
}

inline SweepResult run_sweep(const ExperimentConfig& c, std::size_t workers, std::ostream& log) {
    if (workers < 1) throw ValidationError("--workers must be >= 1");
    const DomainSpec d = make_domain(c);
    const PolicyStructure st = make_structure(c, d);
    struct Cell {
        std::size_t n, seed;
    };
    std::vector<Cell> cells;
    for (std::size_t n : c.sweep_episodes)
        for (std::size_t s = 0; s < c.sweep_seeds; ++s) cells.push_back({n, s});
    std::vector<std::vector<SweepRow>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::size_t done = 0;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            results[i] = run_sweep_cell(c, d, st, cells[i].n, cells[i].seed);
            std::lock_guard lock(log_mutex);
            ++done;
            if (done % 10 == 0 || done == cells.size())
                log << "sweep: " << done << "/" << cells.size() << " cells\n" << std::flush;
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, cells.size()); ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SweepResult out;
    for (const auto& an : c.algorithms) {
        const Algorithm a = parse_algorithm(an);
        for (const auto& cell_rows : results)
            for (const auto& r : cell_rows)
                if (r.algorithm == a) out.rows.push_back(r);
    }
    const auto dir = ensure_dir(c.out);
    out.csv_path = (dir / "sweep.csv").string();
    out.summary_path = (dir / "sweep_summary.csv").string();
    {
        auto f = detail::open_out(out.csv_path);
        f << kSweepHeader << "\n";
        for (const auto& r : out.rows) write_sweep_row(f, r);
    }
    {
        auto f = detail::open_out(out.summary_path);
        write_summary(f, c, out.rows);
    }
    return out;
}

// ---- Rademacher check -------------------------------------------------------------

struct RademacherCheckRow {
    std::size_t seed = 0;
    std::size_t sigma_draws = 0;
    std::size_t n_tilde = 0;
    double exact = 0.0;
    double monte_carlo = 0.0;
    double gap = 0.0;
};

// Exact enumeration against Monte Carlo sign sampling on the configured class
// (direct estimator). Sup values are cached per sign vector, which is exact
// because the search seed is a function of the vector.
inline std::vector<RademacherCheckRow> run_rademacher_check(const ExperimentConfig& c, std::ostream& log) {
    const DomainSpec d = make_domain(c);
    const PolicyStructure st = make_structure(c, d);
    const std::size_t k = c.rademacher_check_class ? c.rademacher_check_class : st.size();
    if (k > st.size()) throw ValidationError("rademacher_check_class is outside the structure");
    const PolicyClass& cls = st[k - 1];
    const TransitionDataset data = collect(d, c.n_episodes, c.seed);
    const EvaluationContext ctx(d, data, make_eval_settings(c, d));
    const std::size_t n = ctx.n_tilde();
    if (n > c.enumerate_max_n)
        throw CapacityError("exact enumeration needs n_tilde <= enumerate_max_n; lower n_tilde", n, c.enumerate_max_n);
    const SrmSettings s = make_srm_settings(c, c.seed, c.n_episodes);
    const SupCallback inner = rademacher_sup_callback(s.sup_search.with_seed(derive_seed(s.sup_search.master_seed, {k})));
    std::map<std::vector<signed char>, double> cache;
    const SupCallback cached = [&](const PolicyClass& pc, const SignVector& sigma, const ReturnsFn& g) {
        auto key = detail::canonical_key(sigma);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        const double v = inner(pc, sigma, g);
        cache.emplace(std::move(key), v);
        return v;
    };
    ConfidenceParams conf = make_confidence(c);
    conf.estimator = RademacherEstimator::direct;
    conf.enumeration = SignEnumeration::exact;
    const double exact = rademacher_estimate_rl(cls, ctx, conf, cached, 0);
    conf.enumeration = SignEnumeration::sampled;
    std::vector<RademacherCheckRow> rows;
    for (std::size_t seed = 0; seed < c.rademacher_check_seeds; ++seed)
        for (std::size_t draws : c.rademacher_check_draws) {
            conf.sigma_draws = draws;
            const double mc = rademacher_estimate_rl(cls, ctx, conf, cached, derive_seed(c.seed, {seed, draws}));
            rows.push_back({seed, draws, n, exact, mc, std::abs(mc - exact)});
        }
    auto out = detail::open_out((ensure_dir(c.out) / "rademacher_check.csv").string());
    out << "seed,sigma_draws,n_tilde,exact,monte_carlo,gap\n";
    for (const auto& r : rows)
        out << r.seed << ',' << r.sigma_draws << ',' << r.n_tilde << ',' << csv_number(r.exact) << ','
            << csv_number(r.monte_carlo) << ',' << csv_number(r.gap) << "\n";
    log << "class k=" << k << " n_tilde=" << n << " exact=" << csv_number(exact) << "\n";
    return rows;
}

} // namespace srm
