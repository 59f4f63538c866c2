// srmrl: collect data, learn with SRM or MR, evaluate policies, run sweeps.
//
// Exit codes: 0 success, 2 invalid input (config, files, arguments), 3 runtime failure.

#include <srm/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

struct Options {
    std::string config;
    std::string algo = "srm";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::size_t workers = 1;
    std::string data;
    std::string policy;
};

srm::ExperimentConfig resolve(const Options& o) {
    srm::ExperimentConfig c = o.config.empty() ? srm::ExperimentConfig{} : srm::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out = *o.out;
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural return maximization for batch reinforcement learning"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
        sub->add_option("--out", o.out, "Output directory (overrides the config)");
    };

    auto* collect = app.add_subcommand("collect", "Collect a random-policy dataset");
    common(collect);
    auto* learn = app.add_subcommand("learn", "Select a policy with SRM or MR");
    common(learn);
    learn->add_option("--algo", o.algo, "srm or mr")->check(CLI::IsMember({"srm", "mr"}));
    learn->add_option("--data", o.data, "Dataset file from `collect`")->required();
    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo return of a policy file");
    common(evaluate);
    evaluate->add_option("--policy", o.policy, "Policy file from `learn`")->required();
    auto* sweep = app.add_subcommand("sweep", "Learning-curve sweep over dataset sizes and seeds");
    common(sweep);
    sweep->add_option("--workers", o.workers, "Parallel cells")->check(CLI::PositiveNumber);
    auto* check = app.add_subcommand("rademacher-check", "Exact vs Monte Carlo Rademacher estimates");
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidationExit;
    }

    try {
        const srm::ExperimentConfig c = resolve(o);
        if (collect->parsed()) {
            std::cout << srm::run_collect(c, std::cout) << "\n";
        } else if (learn->parsed()) {
            srm::run_learn(c, o.data, srm::parse_algorithm(o.algo), std::cout);
        } else if (evaluate->parsed()) {
            srm::run_evaluate(c, o.policy, std::cout);
        } else if (sweep->parsed()) {
            const auto r = srm::run_sweep(c, o.workers, std::cerr);
            std::cout << r.csv_path << "\n" << r.summary_path << "\n";
        } else if (check->parsed()) {
            srm::run_rademacher_check(c, std::cout);
        }
    } catch (const srm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationExit;
    } catch (const srm::StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationExit;
    } catch (const srm::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeExit;
    }
    return 0;
}
