#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sade/experiment.hpp"

namespace sade {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(sep, start);
        auto item = trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double to_double(const std::string& section, const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto t = trim(text);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ConfigError(where(section, key) + ": expected a number, got '" + text + "'");
    return v;
}

std::int64_t to_int(const std::string& section, const std::string& key, const std::string& text, std::int64_t lo) {
    std::int64_t v = 0;
    const auto t = trim(text);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ConfigError(where(section, key) + ": expected an integer, got '" + text + "'");
    if (v < lo) throw ConfigError(where(section, key) + ": must be at least " + std::to_string(lo));
    return v;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(where(section, key) + ": expected true or false, got '" + text + "'");
}

void parse_experiment(const std::string& name, const pt::ptree& sec, ExperimentConfig& cfg, bool& saw_schema) {
    for (const auto& [key, node] : sec) {
        const auto& v = node.data();
        if (key == "schema") {
            if (to_int(name, key, v, 0) != kConfigSchema)
                throw ConfigError("unsupported config schema " + trim(v) + " (expected " +
                                  std::to_string(kConfigSchema) + ")");
            saw_schema = true;
        } else if (key == "dimension") {
            cfg.dimension = static_cast<std::size_t>(to_int(name, key, v, 1));
        } else if (key == "suite_seed") {
            cfg.suite_seed = static_cast<std::uint64_t>(to_int(name, key, v, 0));
        } else if (key == "functions") {
            const auto t = trim(v);
            cfg.include_suite = t != "none";
            cfg.functions = t == "all" || t == "none" ? std::vector<std::string>{} : split(v, ',');
        } else if (key == "repetitions") {
            cfg.repetitions = static_cast<std::size_t>(to_int(name, key, v, 1));
        } else if (key == "base_seed") {
            cfg.base_seed = static_cast<std::uint64_t>(to_int(name, key, v, 0));
        } else if (key == "budget_multiplier") {
            cfg.budget_multiplier = to_int(name, key, v, 1);
        } else if (key == "no_improvement_limit") {
            cfg.no_improvement_limit = static_cast<int>(to_int(name, key, v, 0));
        } else if (key == "pop_size") {
            cfg.pop_size = static_cast<std::size_t>(to_int(name, key, v, 4));
        } else if (key == "F") {
            cfg.F = to_double(name, key, v);
        } else if (key == "CR") {
            cfg.CR = to_double(name, key, v);
        } else if (key == "output") {
            cfg.output = trim(v);
        } else if (key == "workers") {
            cfg.workers = static_cast<std::size_t>(to_int(name, key, v, 1));
        } else {
            throw ConfigError("unknown key " + where(name, key));
        }
    }
}

ConfigEntry parse_entry(const std::string& name, const std::string& label, const pt::ptree& sec) {
    ConfigEntry e;
    e.label = label;
    std::optional<Approach> approach;
    std::optional<LearnerKind> learner;
    std::optional<int> warmup;
    std::optional<std::size_t> trail;
    std::optional<Mapping> mapping;
    std::map<std::string, double> hyper;
    bool saw_allowance = false;

    for (const auto& [key, node] : sec) {
        const auto& v = node.data();
        try {
            if (key == "method") {
                const auto t = trim(v);
                if (t == "de")
                    e.method = Method::de;
                else if (t == "kriging_offline")
                    e.method = Method::kriging_offline;
                else
                    throw ConfigError(where(name, key) + ": unknown method '" + t + "'");
            } else if (key == "surrogate") {
                const auto t = trim(v);
                if (t != "none") approach = parse_approach(t);
            } else if (key == "learner") {
                learner = parse_learner_kind(trim(v));
            } else if (key == "warmup") {
                warmup = static_cast<int>(to_int(name, key, v, 1));
            } else if (key == "trail") {
                trail = static_cast<std::size_t>(to_int(name, key, v, 1));
            } else if (key == "mapping") {
                mapping = parse_mapping(trim(v));
            } else if (key == "strategies") {
                const double p = e.flags.p_base;
                e.flags = StrategyFlags::parse(trim(v));
                e.flags.p_base = p;
            } else if (key == "p_base") {
                e.flags.p_base = to_double(name, key, v);
            } else if (key == "shadow") {
                e.shadow = to_bool(name, key, v);
            } else if (key == "budget_multiplier") {
                e.budget_multiplier = to_int(name, key, v, 1);
            } else if (key == "no_improvement_limit") {
                e.no_improvement_limit = static_cast<int>(to_int(name, key, v, 0));
            } else if (key == "allowance") {
                e.kriging_allowance = to_int(name, key, v, 1);
                saw_allowance = true;
            } else if (key.rfind("hyper.", 0) == 0) {
                hyper[key.substr(6)] = to_double(name, key, v);
            } else {
                throw ConfigError("unknown key " + where(name, key));
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ConfigError(where(name, key) + ": " + ex.what());
        }
    }

    auto fail = [&](const std::string& msg) { throw ConfigError("[" + name + "]: " + msg); };
    if (e.method == Method::kriging_offline) {
        if (approach || e.flags.any() || e.shadow || warmup || trail || mapping)
            fail("kriging_offline takes only learner, allowance, budget and hyper.* keys");
        if (learner && *learner != LearnerKind::gpr) fail("kriging_offline needs the gpr learner");
        auto s = SurrogateConfig::make(Approach::surface, LearnerKind::gpr);
        s.learner.hyper = {{"optimize_length_scale", 1.0}};
        for (const auto& [k, val] : hyper) s.learner.hyper[k] = val;
        e.surrogate = s;
    } else {
        if (saw_allowance) fail("allowance applies to kriging_offline only");
        if (approach) {
            if (!learner) fail("a surrogate needs a learner");
            auto s = SurrogateConfig::make(*approach, *learner);
            if (warmup) s.warmup_generations = *warmup;
            if (trail) s.trail_size = *trail;
            if (mapping) s.mapping = *mapping;
            s.learner.hyper = hyper;
            e.surrogate = s;
        } else if (learner || warmup || trail || mapping || !hyper.empty()) {
            fail("learner settings given without a surrogate");
        }
    }
    try {
        if (e.surrogate) e.surrogate->validate();
        e.flags.validate();
        if (e.flags.any() && !e.surrogate) fail("strategies need a surrogate");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        fail(ex.what());
    }
    return e;
}

BlackBoxEntry parse_blackbox(const std::string& name, const std::string& id, const pt::ptree& sec) {
    BlackBoxEntry b;
    b.id = id;
    std::optional<double> lo, hi;
    for (const auto& [key, node] : sec) {
        const auto& v = node.data();
        if (key == "command")
            b.spec.command = split(v, ' ');
        else if (key == "dimension")
            b.spec.dim = static_cast<std::size_t>(to_int(name, key, v, 1));
        else if (key == "lower")
            lo = to_double(name, key, v);
        else if (key == "upper")
            hi = to_double(name, key, v);
        else if (key == "timeout_ms")
            b.spec.timeout = std::chrono::milliseconds(to_int(name, key, v, 1));
        else if (key == "workers")
            b.spec.parallel_workers = static_cast<std::size_t>(to_int(name, key, v, 1));
        else
            throw ConfigError("unknown key " + where(name, key));
    }
    if (!lo || !hi) throw ConfigError("[" + name + "]: lower and upper are required");
    try {
        b.bounds = Bounds::uniform(b.spec.dim, *lo, *hi);
        b.bounds.validate();
        b.spec.validate();
    } catch (const std::exception& ex) {
        throw ConfigError("[" + name + "]: " + ex.what());
    }
    return b;
}

}  // namespace

std::string_view to_string(Method m) { return m == Method::de ? "de" : "kriging_offline"; }

std::string ConfigEntry::slug() const {
    std::string s;
    for (char c : label) s += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return s;
}

std::string ConfigEntry::learner_label() const {
    if (method == Method::kriging_offline) return "Kriging/offline";
    return surrogate ? surrogate->learner.label() : "DE";
}

void ExperimentConfig::validate() const {
    if (configs.empty()) throw ConfigError("no [config ...] sections");
    std::set<std::string> labels, slugs;
    for (const auto& c : configs) {
        if (!labels.insert(c.label).second) throw ConfigError("duplicate configuration label '" + c.label + "'");
        if (!slugs.insert(c.slug()).second)
            throw ConfigError("configuration labels '" + c.label + "' collide on disk as '" + c.slug() + "'");
        try {
            de_config(c).validate();
        } catch (const std::exception& ex) {
            throw ConfigError("[config " + c.label + "]: " + ex.what());
        }
    }
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    std::set<std::string> ids(functions.begin(), functions.end());
    if (ids.size() != functions.size()) throw ConfigError("duplicate function id");
    if (!functions.empty()) {
        const auto suite = make_suite(dimension, suite_seed);
        for (const auto& id : functions) {
            try {
                find_function(suite, id);
            } catch (const std::exception& ex) {
                throw ConfigError(ex.what());
            }
        }
    }
    if (!include_suite && blackboxes.empty()) throw ConfigError("no problems selected");
    for (const auto& b : blackboxes) {
        if (!ids.insert(b.id).second) throw ConfigError("duplicate problem id '" + b.id + "'");
        if (b.spec.dim != dimension)
            throw ConfigError("[blackbox " + b.id + "]: dimension differs from the experiment dimension");
    }
}

DEConfig ExperimentConfig::de_config(const ConfigEntry& entry) const {
    DEConfig d = DEConfig::for_dimension(dimension, entry.budget_multiplier.value_or(budget_multiplier));
    d.pop_size = pop_size;
    d.F = F;
    d.CR = CR;
    d.no_improvement_limit = entry.no_improvement_limit.value_or(no_improvement_limit);
    d.shadow_mode = entry.shadow;
    d.workers = workers;
    return d;
}

ExperimentConfig parse_config(std::istream& in) {
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string text = raw.str();
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& ex) {
        throw ConfigError(std::string("config syntax: ") + ex.what());
    }
    for (const auto& [name, node] : tree)
        if (node.empty() && !node.data().empty()) throw ConfigError("key '" + name + "' outside any section");

    // the ini reader drops empty sections, so walk the headers ourselves
    std::vector<std::string> sections;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const auto t = trim(line);
        if (t.size() >= 2 && t.front() == '[' && t.back() == ']') sections.push_back(trim(t.substr(1, t.size() - 2)));
    }

    ExperimentConfig cfg;
    bool saw_experiment = false, saw_schema = false;
    const pt::ptree empty;
    for (const auto& name : sections) {
        const auto it = tree.find(name);
        const pt::ptree& sec = it == tree.not_found() ? empty : it->second;
        if (name == "experiment") {
            parse_experiment(name, sec, cfg, saw_schema);
            saw_experiment = true;
        } else if (name.rfind("config ", 0) == 0) {
            const auto label = trim(name.substr(7));
            if (label.empty()) throw ConfigError("[config] section without a label");
            cfg.configs.push_back(parse_entry(name, label, sec));
        } else if (name.rfind("blackbox ", 0) == 0) {
            const auto id = trim(name.substr(9));
            if (id.empty()) throw ConfigError("[blackbox] section without an id");
            cfg.blackboxes.push_back(parse_blackbox(name, id, sec));
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    if (!saw_experiment) throw ConfigError("missing [experiment] section");
    if (!saw_schema) throw ConfigError("[experiment] schema is required");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

}  // namespace sade
