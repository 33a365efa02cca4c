#include "sade/report.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "sade/metrics.hpp"

namespace sade {

namespace fs = std::filesystem;

std::string_view to_string(ReportKind k) {
    switch (k) {
        case ReportKind::ranking: return "ranking";
        case ReportKind::stats: return "stats";
        case ReportKind::delta_e: return "delta_e";
        case ReportKind::confusion: return "confusion";
        case ReportKind::zeta: return "zeta";
        case ReportKind::heatmap: return "heatmap";
    }
    return "?";
}

ReportKind parse_report_kind(std::string_view name) {
    for (auto k : kAllReports)
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown report '" + std::string(name) + "'");
}

StoreView StoreView::open(const fs::path& root) {
    StoreView v{ResultStore(root), {}, {}, {}};
    if (!fs::exists(root / "manifest.csv")) throw std::runtime_error("no manifest in '" + root.string() + "'");
    v.manifest = v.store.read_manifest();
    v.configs = v.store.read_configs();
    if (v.manifest.empty()) throw std::runtime_error("result store '" + root.string() + "' is empty");
    for (const auto& r : v.manifest)
        if (std::find(v.functions.begin(), v.functions.end(), r.function) == v.functions.end())
            v.functions.push_back(r.function);
    return v;
}

const ConfigRow& StoreView::config(const std::string& label) const {
    for (const auto& c : configs)
        if (c.label == label) return c;
    throw std::invalid_argument("no configuration '" + label + "' in the store");
}

std::vector<double> StoreView::finals(const std::string& function, const std::string& label) const {
    std::vector<double> out;
    for (const auto& r : manifest)
        if (r.ok && r.function == function && r.config == label) out.push_back(r.best);
    return out;
}

std::vector<std::size_t> StoreView::runs(const std::string& function, const std::string& label) const {
    std::vector<std::size_t> out;
    for (const auto& r : manifest)
        if (r.ok && r.function == function && r.config == label) out.push_back(r.run);
    return out;
}

std::vector<std::string> labels_of(const StoreView& view) {
    std::vector<std::string> out;
    for (const auto& c : view.configs) out.push_back(c.label);
    return out;
}

ResultMatrix median_matrix(const StoreView& view, const std::vector<std::string>& labels) {
    ResultMatrix m;
    for (const auto& f : view.functions) {
        std::vector<double> row;
        for (const auto& l : labels) {
            const auto v = view.finals(f, l);
            if (v.empty()) throw std::runtime_error("no completed run for " + f + " / " + l);
            row.push_back(median(v));
        }
        m.push_back(std::move(row));
    }
    return m;
}

Table ranking_table(const StoreView& view) {
    const auto labels = labels_of(view);
    const auto ranks = average_ranking(median_matrix(view, labels));
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ranks[a] < ranks[b]; });
    Table t({"position", "config", "mean_rank"});
    for (std::size_t i = 0; i < order.size(); ++i)
        t.add({std::to_string(i + 1), labels[order[i]], format_fixed(ranks[order[i]], 4)});
    return t;
}

Table stats_table(const StoreView& view, const ReportOptions& opts) {
    const auto labels = labels_of(view);
    const auto m = median_matrix(view, labels);
    const auto ranks = average_ranking(m);
    Table t({"test", "config_a", "config_b", "statistic", "p_value", "p_holm", "significant"});
    const auto fr = friedman_test(m);
    t.add({"friedman", "all", "", format_fixed(fr.statistic, 6), format_real(fr.p_value), "",
           fr.p_value < opts.alpha ? "*" : ""});

    const auto control = static_cast<std::size_t>(std::min_element(ranks.begin(), ranks.end()) - ranks.begin());
    struct Pair {
        std::size_t other;
        std::optional<WilcoxonResult> w;
        std::string note;
    };
    std::vector<Pair> pairs;
    std::vector<double> ps;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j == control) continue;
        std::vector<double> a, b;
        for (const auto& row : m) {
            a.push_back(row[control]);
            b.push_back(row[j]);
        }
        Pair p{j, std::nullopt, ""};
        try {
            p.w = wilcoxon_signed_rank(a, b);
            ps.push_back(p.w->p_value);
        } catch (const std::invalid_argument& ex) {
            p.note = ex.what();
        }
        pairs.push_back(std::move(p));
    }
    const auto adjusted = holm_correction(ps);
    std::size_t k = 0;
    for (const auto& p : pairs) {
        if (!p.w) {
            t.add({"wilcoxon", labels[control], labels[p.other], "", "", "", "n/a"});
            continue;
        }
        const double adj = adjusted[k++];
        t.add({"wilcoxon", labels[control], labels[p.other], format_fixed(p.w->w, 1), format_real(p.w->p_value),
               format_real(adj), adj < opts.alpha ? "*" : ""});
    }
    return t;
}

namespace {

std::string pick_baseline(const StoreView& view, const ReportOptions& opts) {
    if (!opts.baseline.empty()) {
        view.config(opts.baseline);
        return opts.baseline;
    }
    for (const auto& c : view.configs)
        if (c.method == "de" && c.learner == "DE" && !c.shadow) return c.label;
    throw std::runtime_error("delta_e needs a plain DE configuration as baseline");
}

}  // namespace

Table delta_e_table(const StoreView& view, const ReportOptions& opts) {
    const auto baseline = pick_baseline(view, opts);
    Table t({"function", "config", "run", "n", "n_first", "m", "delta_e", "ratio", "censored"});
    for (const auto& f : view.functions) {
        const auto base_runs = view.runs(f, baseline);
        for (const auto& c : view.configs) {
            if (c.label == baseline) continue;
            for (auto k : view.runs(f, c.label)) {
                if (std::find(base_runs.begin(), base_runs.end(), k) == base_runs.end()) continue;
                const auto s = best_curve(view.store.load_run(f, c.slug, k));
                const auto b = best_curve(view.store.load_run(f, view.config(baseline).slug, k));
                const auto n = s.back().evaluations;
                const auto d = delta_e(s, b, n);
                t.add({f, c.label, std::to_string(k), std::to_string(n), std::to_string(d.n_first),
                       std::to_string(d.m), std::to_string(d.value), format_real(delta_e_ratio(d.n_first, d.m)),
                       d.censored ? "1" : "0"});
            }
        }
    }
    return t;
}

Table delta_e_summary(const Table& per_run) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> ratios;
    std::map<std::string, std::size_t> censored;
    for (std::size_t i = 0; i < per_run.rows(); ++i) {
        const auto& c = per_run.at(i, "config");
        if (!ratios.contains(c)) order.push_back(c);
        ratios[c].push_back(parse_real(per_run.at(i, "ratio")));
        censored[c] += per_run.at(i, "censored") == "1";
    }
    Table t({"config", "runs", "mean_ratio", "median_ratio", "censored"});
    for (const auto& c : order) {
        const auto& v = ratios[c];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        t.add({c, std::to_string(v.size()), format_fixed(mean, 6), format_fixed(median(v), 6),
               std::to_string(censored[c])});
    }
    return t;
}

Table confusion_table(const StoreView& view) {
    Table t({"config", "generation", "tp", "fp", "tn", "fn", "accuracy", "sensitivity", "specificity"});
    bool any = false;
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v, 6) : std::string(); };
    for (const auto& c : view.configs) {
        if (!c.shadow) continue;
        any = true;
        std::vector<Confusion> per_gen;
        for (const auto& f : view.functions)
            for (auto k : view.runs(f, c.label)) {
                const auto r = view.store.load_run(f, c.slug, k);
                if (per_gen.size() < r.generations.size()) per_gen.resize(r.generations.size());
                for (std::size_t g = 0; g < r.generations.size(); ++g) per_gen[g] += r.generations[g].confusion;
            }
        for (std::size_t g = 0; g < per_gen.size(); ++g) {
            const auto& x = per_gen[g];
            const auto rates = confusion_rates(x);
            t.add({c.label, std::to_string(g), std::to_string(x.tp), std::to_string(x.fp), std::to_string(x.tn),
                   std::to_string(x.fn), opt(rates.accuracy), opt(rates.sensitivity), opt(rates.specificity)});
        }
    }
    if (!any) throw std::runtime_error("confusion report needs shadow runs; run the 'shadow' command first");
    return t;
}

Table zeta_table(const StoreView& view, const ReportOptions& opts) {
    Table t({"config", "function", "run", "generation", "zeta"});
    for (const auto& c : view.configs)
        for (const auto& f : view.functions)
            for (auto k : view.runs(f, c.label)) {
                const auto r = view.store.load_run(f, c.slug, k);
                for (int i = 1; i <= static_cast<int>(r.generations.size()); ++i)
                    if (const auto z = zeta(r, opts.zeta_window, i))
                        t.add({c.label, f, std::to_string(k), std::to_string(i), format_real(*z)});
            }
    return t;
}

Table heatmap_table(const StoreView& view) {
    const auto labels = labels_of(view);
    const auto ranks = average_ranking(median_matrix(view, labels));
    std::vector<std::string> learners, strategies;
    auto note = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& c : view.configs) {
        note(learners, c.learner);
        note(strategies, c.strategy);
    }
    std::vector<std::string> header{"learner"};
    header.insert(header.end(), strategies.begin(), strategies.end());
    Table t(header);
    for (const auto& l : learners) {
        std::vector<std::string> row{l};
        for (const auto& s : strategies) {
            // several configurations may share a cell (e.g. different warm-ups): average them
            double sum = 0.0;
            int n = 0;
            for (std::size_t j = 0; j < view.configs.size(); ++j)
                if (view.configs[j].learner == l && view.configs[j].strategy == s) {
                    sum += ranks[j];
                    ++n;
                }
            row.push_back(n ? format_fixed(sum / n, 4) : "");
        }
        t.add(std::move(row));
    }
    return t;
}

std::vector<fs::path> write_report(const StoreView& view, ReportKind kind, const ReportOptions& opts) {
    const auto dir = view.store.root() / "reports";
    fs::create_directories(dir);
    const auto path = dir / (std::string(to_string(kind)) + ".csv");
    switch (kind) {
        case ReportKind::ranking: ranking_table(view).save(path); break;
        case ReportKind::stats: stats_table(view, opts).save(path); break;
        case ReportKind::delta_e: {
            const auto t = delta_e_table(view, opts);
            t.save(path);
            const auto summary = dir / "delta_e_summary.csv";
            delta_e_summary(t).save(summary);
            return {path, summary};
        }
        case ReportKind::confusion: confusion_table(view).save(path); break;
        case ReportKind::zeta: zeta_table(view, opts).save(path); break;
        case ReportKind::heatmap: heatmap_table(view).save(path); break;
    }
    return {path};
}

}  // namespace sade
