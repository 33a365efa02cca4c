#include <CLI11.hpp>
#include <iostream>

#include "sade/report.hpp"

using namespace sade;

namespace {

struct RunArgs {
    std::string config;
    std::string output;
    std::size_t workers = 0;
    bool skip_existing = false;
    bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("-c,--config", a.config, "experiment INI file")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", a.output, "result store directory (overrides the config)");
    cmd->add_option("-w,--workers", a.workers, "threads per generation batch (overrides the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--skip-existing", a.skip_existing, "reuse completed runs already in the store");
    cmd->add_flag("-q,--quiet", a.quiet, "no per-run progress lines");
}

ExperimentConfig load(const RunArgs& a) {
    auto cfg = load_config(a.config);
    if (!a.output.empty()) cfg.output = a.output;
    if (a.workers) cfg.workers = a.workers;
    return cfg;
}

int finish(const ExperimentConfig& cfg, const ExperimentOutcome& o) {
    std::cout << "store " << cfg.output << ": " << o.computed << " computed, " << o.skipped << " skipped, " << o.failed
              << " failed\n";
    return o.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-assisted differential evolution experiments"};
    app.require_subcommand(1);

    RunArgs run_args, shadow_args, kriging_args;
    auto* run = app.add_subcommand("run", "execute the experiment matrix");
    add_run_flags(run, run_args);

    auto* shadow = app.add_subcommand("shadow", "execute the matrix with every challenger truly evaluated");
    add_run_flags(shadow, shadow_args);

    std::int64_t allowance = 60000;
    std::string kriging_label = "Kriging/offline";
    auto* kriging = app.add_subcommand("kriging-offline", "offline Kriging baseline on the experiment's problems");
    add_run_flags(kriging, kriging_args);
    kriging->add_option("--allowance", allowance, "surrogate evaluations for the inner search")
        ->check(CLI::PositiveNumber);
    kriging->add_option("--label", kriging_label, "configuration label in the store");

    std::string store_dir, kind_name = "all";
    ReportOptions ropts;
    auto* report = app.add_subcommand("report", "derive tables from a result store");
    report->add_option("-s,--store", store_dir, "result store directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("-k,--kind", kind_name, "ranking|stats|delta_e|confusion|zeta|heatmap|all");
    report->add_option("--baseline", ropts.baseline, "delta_e reference configuration label");
    report->add_option("--window", ropts.zeta_window, "zeta window in generations")->check(CLI::PositiveNumber);
    report->add_option("--alpha", ropts.alpha, "significance level")->check(CLI::Range(0.0, 1.0));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run || *shadow) {
            const auto& a = *run ? run_args : shadow_args;
            const auto cfg = load(a);
            RunOptions o;
            o.skip_existing = a.skip_existing;
            o.force_shadow = bool(*shadow);
            o.progress = a.quiet ? nullptr : &std::cerr;
            return finish(cfg, run_experiment(cfg, o));
        }
        if (*kriging) {
            auto cfg = load(kriging_args);
            ConfigEntry e;
            e.label = kriging_label;
            e.method = Method::kriging_offline;
            e.kriging_allowance = allowance;
            auto s = SurrogateConfig::make(Approach::surface, LearnerKind::gpr);
            s.learner.hyper = {{"optimize_length_scale", 1.0}};
            e.surrogate = s;
            cfg.configs = {e};
            RunOptions o;
            o.skip_existing = kriging_args.skip_existing;
            o.progress = kriging_args.quiet ? nullptr : &std::cerr;
            return finish(cfg, run_experiment(cfg, o));
        }
        const auto view = StoreView::open(store_dir);
        std::vector<ReportKind> kinds;
        if (kind_name == "all") {
            kinds.assign(std::begin(kAllReports), std::end(kAllReports));
            bool shadow_runs = false;
            for (const auto& c : view.configs) shadow_runs |= c.shadow;
            if (!shadow_runs) std::erase(kinds, ReportKind::confusion);
        } else {
            kinds.push_back(parse_report_kind(kind_name));
        }
        int status = 0;
        for (auto k : kinds) {
            try {
                for (const auto& p : write_report(view, k, ropts)) std::cout << p.string() << "\n";
            } catch (const std::exception& ex) {
                std::cerr << "report " << to_string(k) << ": " << ex.what() << "\n";
                status = 1;
            }
        }
        return status;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
