#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "sade/experiment.hpp"
#include "sade/table.hpp"

namespace sade {

namespace fs = std::filesystem;

std::vector<NamedProblem> resolve_problems(const ExperimentConfig& cfg) {
    std::vector<NamedProblem> out;
    if (cfg.include_suite) {
        const auto suite = make_suite(cfg.dimension, cfg.suite_seed);
        if (cfg.functions.empty()) {
            for (const auto& f : suite) out.push_back({f.id, make_problem(f, cfg.workers)});
        } else {
            for (const auto& id : cfg.functions) out.push_back({id, make_problem(find_function(suite, id), cfg.workers)});
        }
    }
    for (const auto& b : cfg.blackboxes) out.push_back({b.id, make_problem(b.spec, b.bounds)});
    return out;
}

RunRecord run_kriging_offline(const DEConfig& cfg, const Problem& problem, RngStreams& streams,
                              const LearnerSpec& learner, std::int64_t allowance) {
    cfg.validate();
    if (cfg.budget < 2) throw std::invalid_argument("kriging_offline: budget must be at least 2");
    if (allowance < static_cast<std::int64_t>(cfg.pop_size))
        throw std::invalid_argument("kriging_offline: allowance smaller than the population");

    EvaluationLedger ledger(cfg.budget);
    const auto n = static_cast<std::size_t>(cfg.budget - 1);
    auto xs = latin_hypercube_sample(n, problem.bounds, streams.population_init);
    const auto ys = problem.evaluate(xs);
    if (ys.size() != xs.size()) throw std::runtime_error("objective returned the wrong number of values");
    Dataset data(problem.bounds.dim());
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ledger.record(ys[i]);
        data.add(xs[i], ys[i]);
    }
    const double sample_best = ledger.best();

    const ModelPtr model = fit(learner, data, streams.learner_training);
    Problem inner{problem.bounds, [model](std::span<const Vector> batch) {
                      std::vector<double> out;
                      out.reserve(batch.size());
                      for (const auto& x : batch) out.push_back(model->predict_value(x));
                      return out;
                  }};
    DEConfig inner_cfg = cfg;
    inner_cfg.budget = allowance;
    inner_cfg.shadow_mode = false;
    AcceptAllFilter accept;
    const auto search = run_optimization(inner_cfg, inner, accept, streams);

    const std::vector<Vector> final_x{search.best_x};
    const double final_q = problem.evaluate(final_x).at(0);
    ledger.record(final_q);

    RunRecord r;
    r.curve = ledger.curve();
    r.init_evaluations = static_cast<std::int64_t>(n);
    r.init_best = sample_best;
    GenerationLog g;
    g.evaluations = ledger.used();
    g.best = ledger.best();
    g.accepted = 1;
    g.evaluated = 1;
    r.generations.push_back(g);
    r.termination = Termination::budget;
    r.evaluations = ledger.used();
    r.best_fitness = final_q;
    r.best_x = search.best_x;
    r.surrogate_fits = 1;
    return r;
}

// ---------------------------------------------------------------------------

ResultStore::ResultStore(fs::path root) : root_(std::move(root)) {}

fs::path ResultStore::run_base(const std::string& function, const std::string& slug, std::size_t run) const {
    return root_ / "runs" / function / slug / ("run_" + std::to_string(run));
}

bool ResultStore::has_run(const std::string& function, const std::string& slug, std::size_t run) const {
    return fs::exists(fs::path(run_base(function, slug, run).string() + ".info.csv"));
}

void ResultStore::save_run(const std::string& function, const std::string& slug, std::size_t run,
                           const RunRecord& r) const {
    const auto base = run_base(function, slug, run).string();
    fs::create_directories(fs::path(base).parent_path());

    Table curve({"eval_index", "fitness", "best"});
    for (const auto& p : r.curve) curve.add({std::to_string(p.eval_index), format_real(p.fitness), format_real(p.best)});
    curve.save(base + ".curve.csv");

    Table gens({"generation", "evaluations", "best", "accepted", "discarded", "evaluated", "warmup", "tp", "fp", "tn",
                "fn"});
    for (const auto& g : r.generations)
        gens.add({std::to_string(g.generation), std::to_string(g.evaluations), format_real(g.best),
                  std::to_string(g.accepted), std::to_string(g.discarded), std::to_string(g.evaluated),
                  g.warmup ? "1" : "0", std::to_string(g.confusion.tp), std::to_string(g.confusion.fp),
                  std::to_string(g.confusion.tn), std::to_string(g.confusion.fn)});
    gens.save(base + ".gens.csv");

    std::string x;
    for (std::size_t i = 0; i < r.best_x.size(); ++i) x += (i ? " " : "") + format_real(r.best_x[i]);
    Table info({"key", "value"});
    info.add({"termination", std::string(to_string(r.termination))});
    info.add({"evaluations", std::to_string(r.evaluations)});
    info.add({"best_fitness", format_real(r.best_fitness)});
    info.add({"init_evaluations", std::to_string(r.init_evaluations)});
    info.add({"init_best", format_real(r.init_best)});
    info.add({"surrogate_fits", std::to_string(r.surrogate_fits)});
    info.add({"shadow", r.shadow ? "1" : "0"});
    info.add({"tp", std::to_string(r.confusion.tp)});
    info.add({"fp", std::to_string(r.confusion.fp)});
    info.add({"tn", std::to_string(r.confusion.tn)});
    info.add({"fn", std::to_string(r.confusion.fn)});
    info.add({"best_x", x});
    // written last: its presence marks a complete run
    info.save(base + ".info.csv");
}

RunRecord ResultStore::load_run(const std::string& function, const std::string& slug, std::size_t run) const {
    const auto base = run_base(function, slug, run).string();
    RunRecord r;
    const auto curve = Table::load(base + ".curve.csv");
    for (std::size_t i = 0; i < curve.rows(); ++i)
        r.curve.push_back({parse_int(curve.at(i, "eval_index")), parse_real(curve.at(i, "fitness")),
                           parse_real(curve.at(i, "best"))});
    const auto gens = Table::load(base + ".gens.csv");
    for (std::size_t i = 0; i < gens.rows(); ++i) {
        GenerationLog g;
        g.generation = static_cast<int>(parse_int(gens.at(i, "generation")));
        g.evaluations = parse_int(gens.at(i, "evaluations"));
        g.best = parse_real(gens.at(i, "best"));
        g.accepted = static_cast<std::size_t>(parse_int(gens.at(i, "accepted")));
        g.discarded = static_cast<std::size_t>(parse_int(gens.at(i, "discarded")));
        g.evaluated = static_cast<std::size_t>(parse_int(gens.at(i, "evaluated")));
        g.warmup = gens.at(i, "warmup") == "1";
        g.confusion = {parse_int(gens.at(i, "tp")), parse_int(gens.at(i, "fp")), parse_int(gens.at(i, "tn")),
                       parse_int(gens.at(i, "fn"))};
        r.generations.push_back(g);
    }
    const auto info = Table::load(base + ".info.csv");
    std::map<std::string, std::string> kv;
    for (std::size_t i = 0; i < info.rows(); ++i) kv[info.at(i, "key")] = info.at(i, "value");
    auto get = [&](const char* k) -> const std::string& {
        const auto it = kv.find(k);
        if (it == kv.end()) throw std::runtime_error(base + ".info.csv: missing '" + k + "'");
        return it->second;
    };
    r.termination = get("termination") == "budget" ? Termination::budget : Termination::no_improvement;
    r.evaluations = parse_int(get("evaluations"));
    r.best_fitness = parse_real(get("best_fitness"));
    r.init_evaluations = parse_int(get("init_evaluations"));
    r.init_best = parse_real(get("init_best"));
    r.surrogate_fits = static_cast<std::size_t>(parse_int(get("surrogate_fits")));
    r.shadow = get("shadow") == "1";
    r.confusion = {parse_int(get("tp")), parse_int(get("fp")), parse_int(get("tn")), parse_int(get("fn"))};
    std::istringstream xs(get("best_x"));
    for (std::string t; xs >> t;) r.best_x.push_back(parse_real(t));
    return r;
}

void ResultStore::write_manifest(const std::vector<ManifestRow>& rows) const {
    Table t({"function", "config", "run", "status", "best", "evaluations", "generations", "termination", "message"});
    for (const auto& r : rows)
        t.add({r.function, r.config, std::to_string(r.run), r.ok ? "done" : "failed", r.ok ? format_real(r.best) : "",
               r.ok ? std::to_string(r.evaluations) : "", r.ok ? std::to_string(r.generations) : "", r.termination,
               r.message});
    fs::create_directories(root_);
    t.save(root_ / "manifest.csv");
}

std::vector<ManifestRow> ResultStore::read_manifest() const {
    const auto t = Table::load(root_ / "manifest.csv");
    std::vector<ManifestRow> out;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        ManifestRow r;
        r.function = t.at(i, "function");
        r.config = t.at(i, "config");
        r.run = static_cast<std::size_t>(parse_int(t.at(i, "run")));
        r.ok = t.at(i, "status") == "done";
        if (r.ok) {
            r.best = parse_real(t.at(i, "best"));
            r.evaluations = parse_int(t.at(i, "evaluations"));
            r.generations = static_cast<std::size_t>(parse_int(t.at(i, "generations")));
        }
        r.termination = t.at(i, "termination");
        r.message = t.at(i, "message");
        out.push_back(std::move(r));
    }
    return out;
}

void ResultStore::write_configs(const std::vector<ConfigRow>& rows) const {
    Table t({"label", "slug", "method", "learner", "strategy", "shadow"});
    for (const auto& r : rows) t.add({r.label, r.slug, r.method, r.learner, r.strategy, r.shadow ? "1" : "0"});
    fs::create_directories(root_);
    t.save(root_ / "configs.csv");
}

std::vector<ConfigRow> ResultStore::read_configs() const {
    const auto t = Table::load(root_ / "configs.csv");
    std::vector<ConfigRow> out;
    for (std::size_t i = 0; i < t.rows(); ++i)
        out.push_back({t.at(i, "label"), t.at(i, "slug"), t.at(i, "method"), t.at(i, "learner"), t.at(i, "strategy"),
                       t.at(i, "shadow") == "1"});
    return out;
}

void ResultStore::write_summary(const std::vector<ManifestRow>& rows, const std::vector<ConfigRow>& configs) const {
    Table t({"function", "config", "runs", "failed", "median", "mean", "min", "max"});
    std::vector<std::string> functions;
    for (const auto& r : rows)
        if (std::find(functions.begin(), functions.end(), r.function) == functions.end())
            functions.push_back(r.function);
    for (const auto& f : functions) {
        for (const auto& c : configs) {
            std::vector<double> v;
            std::size_t failed = 0;
            for (const auto& r : rows) {
                if (r.function != f || r.config != c.label) continue;
                if (r.ok)
                    v.push_back(r.best);
                else
                    ++failed;
            }
            if (v.empty()) {
                t.add({f, c.label, "0", std::to_string(failed), "", "", "", ""});
                continue;
            }
            double sum = 0.0;
            for (double x : v) sum += x;
            t.add({f, c.label, std::to_string(v.size()), std::to_string(failed), format_real(median(v)),
                   format_real(sum / static_cast<double>(v.size())), format_real(*std::min_element(v.begin(), v.end())),
                   format_real(*std::max_element(v.begin(), v.end()))});
        }
    }
    t.save(root_ / "summary.csv");
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_experiment(const ExperimentConfig& cfg_in, const RunOptions& options) {
    ExperimentConfig cfg = cfg_in;
    if (options.force_shadow)
        for (auto& c : cfg.configs) {
            if (c.method != Method::de) throw ConfigError("shadow mode needs DE configurations");
            c.shadow = true;
        }
    cfg.validate();

    const ResultStore store(cfg.output);
    const auto problems = resolve_problems(cfg);

    std::vector<ConfigRow> config_rows;
    for (const auto& c : cfg.configs)
        config_rows.push_back({c.label, c.slug(), std::string(to_string(c.method)), c.learner_label(),
                               c.method == Method::de ? c.flags.label() : "-", c.shadow});
    store.write_configs(config_rows);

    ExperimentOutcome outcome;
    std::vector<ManifestRow> manifest;
    for (const auto& p : problems) {
        for (const auto& c : cfg.configs) {
            const DEConfig de = cfg.de_config(c);
            for (std::size_t k = 0; k < cfg.repetitions; ++k) {
                ManifestRow row;
                row.function = p.id;
                row.config = c.label;
                row.run = k;
                try {
                    RunRecord r;
                    if (options.skip_existing && store.has_run(p.id, c.slug(), k)) {
                        r = store.load_run(p.id, c.slug(), k);
                        ++outcome.skipped;
                    } else {
                        auto streams = RngStreams::for_run(cfg.base_seed, k);
                        if (c.method == Method::kriging_offline) {
                            r = run_kriging_offline(de, p.problem, streams, c.surrogate->learner, c.kriging_allowance);
                        } else {
                            auto filter = make_filter(c.surrogate, c.flags, cfg.dimension);
                            r = run_optimization(de, p.problem, *filter, streams);
                        }
                        store.save_run(p.id, c.slug(), k, r);
                        ++outcome.computed;
                    }
                    row.ok = true;
                    row.best = r.best_fitness;
                    row.evaluations = r.evaluations;
                    row.generations = r.generations.size();
                    row.termination = std::string(to_string(r.termination));
                } catch (const std::exception& ex) {
                    row.ok = false;
                    row.message = ex.what();
                    ++outcome.failed;
                }
                if (options.progress) {
                    *options.progress << p.id << " " << c.label << " run " << k << ": "
                                      << (row.ok ? format_real(row.best) : "FAILED " + row.message) << "\n";
                    options.progress->flush();
                }
                manifest.push_back(std::move(row));
            }
        }
    }
    store.write_manifest(manifest);
    store.write_summary(manifest, config_rows);
    return outcome;
}

}  // namespace sade
