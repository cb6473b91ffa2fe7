#include "beliefsim/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "beliefsim/errors.hpp"

namespace beliefsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw validation_error(path + ": " + msg);
}

void expect_object(const json& v, const std::string& path,
                   const std::set<std::string>& allowed) {
    if (!v.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : v.items())
        if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
}

const json* find(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return nullptr;
    return &*it;
}

const json& need(const json& doc, const char* key, const std::string& path) {
    const json* v = find(doc, key);
    if (!v) fail(path + "." + key, "missing");
    return *v;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Dist as_dist(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Dist out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) fail(path + "[0]", "expected a non-empty row");
    Matrix m(static_cast<int>(v.size()), static_cast<int>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!v[r].is_array()) fail(rp, "expected a row array");
        if (v[r].size() != cols) fail(rp, "rows must all have the same length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(r), static_cast<int>(c)) =
                as_number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

Network parse_network(const json& v) {
    if (!v.is_array() || v.empty()) fail("network", "expected a non-empty array of neighbor lists");
    std::vector<std::vector<int>> nbrs(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = "network[" + std::to_string(i) + "]";
        if (!v[i].is_array()) fail(path, "expected an array of agent indices");
        for (std::size_t j = 0; j < v[i].size(); ++j)
            nbrs[i].push_back(static_cast<int>(
                as_integer(v[i][j], path + "[" + std::to_string(j) + "]")));
    }
    return Network::from_neighborhoods(std::move(nbrs));
}

StateSpace parse_states(const json& v) {
    expect_object(v, "states", {"labels", "nature_prior"});
    StateSpace sp;
    const json& labels = need(v, "labels", "states");
    if (!labels.is_array() || labels.size() < 2)
        fail("states.labels", "expected at least two state labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        sp.states.push_back(as_string(labels[i], "states.labels[" + std::to_string(i) + "]"));
    if (const json* np = find(v, "nature_prior"))
        sp.nature_prior = as_dist(*np, "states.nature_prior");
    return sp;
}

SignalModel parse_signal_model(const json& v, int n_agents) {
    expect_object(v, "signal_model", {"tables", "allow_zero_likelihoods"});
    SignalModel sig;
    const json& tables = need(v, "tables", "signal_model");
    if (!tables.is_array() || static_cast<int>(tables.size()) != n_agents)
        fail("signal_model.tables", "expected one likelihood table per agent");
    for (std::size_t i = 0; i < tables.size(); ++i)
        sig.tables.push_back(as_matrix(tables[i], "signal_model.tables[" + std::to_string(i) + "]"));
    if (const json* az = find(v, "allow_zero_likelihoods"))
        sig.allow_zero_likelihoods = as_bool(*az, "signal_model.allow_zero_likelihoods");
    return sig;
}

InitialPriors parse_priors(const json* v, int n_agents, int n_states) {
    if (!v || (v->is_string() && v->get<std::string>() == "uniform"))
        return InitialPriors::uniform(n_agents, n_states);
    if (v->is_string()) fail("priors", "expected \"uniform\" or one distribution per agent");
    if (!v->is_array() || static_cast<int>(v->size()) != n_agents)
        fail("priors", "expected one distribution per agent");
    InitialPriors pr;
    for (std::size_t i = 0; i < v->size(); ++i)
        pr.per_agent.push_back(as_dist((*v)[i], "priors[" + std::to_string(i) + "]"));
    return pr;
}

WeightSchedule parse_schedule(const json& v) {
    expect_object(v, "rule.params.x_schedule", {"kind", "c", "p"});
    WeightSchedule ws;
    const std::string kind = as_string(need(v, "kind", "rule.params.x_schedule"),
                                       "rule.params.x_schedule.kind");
    if (kind == "power") ws.kind = WeightSchedule::Kind::power;
    else if (kind == "log_power") ws.kind = WeightSchedule::Kind::log_power;
    else if (kind == "geometric") ws.kind = WeightSchedule::Kind::geometric;
    else if (kind == "constant") ws.kind = WeightSchedule::Kind::constant;
    else fail("rule.params.x_schedule.kind", "unknown kind '" + kind + "'");
    if (const json* c = find(v, "c")) ws.c = as_number(*c, "rule.params.x_schedule.c");
    if (const json* p = find(v, "p")) ws.p = as_number(*p, "rule.params.x_schedule.p");
    ws.validate();
    return ws;
}

UpdateRule parse_rule(const json& v) {
    expect_object(v, "rule", {"name", "params"});
    const std::string name = as_string(need(v, "name", "rule"), "rule.name");
    json params = json::object();
    if (const json* p = find(v, "params")) {
        if (!p->is_object()) fail("rule.params", "expected an object");
        params = *p;
    }
    const auto only = [&](std::set<std::string> keys) {
        expect_object(params, "rule.params", keys);
    };
    if (name == "common_prior") {
        only({"prior"});
        CommonFixedPrior r;
        if (const json* pr = find(params, "prior")) r.prior = as_dist(*pr, "rule.params.prior");
        return r;
    }
    if (name == "random_walk") {
        only({"P"});
        RandomWalkNeighbor r;
        if (const json* p = find(params, "P")) r.choice_probs = as_matrix(*p, "rule.params.P");
        return r;
    }
    if (name == "geometric") {
        only({});
        return GeometricAveragePrior{};
    }
    if (name == "time_varying") {
        only({"x_schedule"});
        TimeVaryingLogLinear r;
        r.schedule = parse_schedule(need(params, "x_schedule", "rule.params"));
        return r;
    }
    if (name == "weighted_self") {
        only({"eta"});
        WeightedSelfBelief r;
        if (const json* e = find(params, "eta")) r.eta = as_number(*e, "rule.params.eta");
        return r;
    }
    fail("rule.name", "unknown rule '" + name + "'");
}

json schedule_to_json(const WeightSchedule& ws) {
    return json{{"kind", ws.kind_name()}, {"c", ws.c}, {"p", ws.p}};
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json rule_to_json(const UpdateRule& rule, const Network& net) {
    json params = json::object();
    if (const auto* cp = std::get_if<CommonFixedPrior>(&rule)) {
        params["prior"] = cp->prior;  // empty array means uniform
    } else if (const auto* rw = std::get_if<RandomWalkNeighbor>(&rule)) {
        params["P"] = rw->choice_probs.rows > 0 ? matrix_to_json(rw->choice_probs)
                                                : matrix_to_json(normalized_adjacency(net));
    } else if (const auto* tv = std::get_if<TimeVaryingLogLinear>(&rule)) {
        params["x_schedule"] = schedule_to_json(tv->schedule);
    } else if (const auto* ws = std::get_if<WeightedSelfBelief>(&rule)) {
        params["eta"] = ws->eta;
    }
    return json{{"name", rule_name(rule)}, {"params", params}};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    expect_object(doc, "config",
                  {"network", "states", "signal_model", "priors", "rule", "horizon", "seed",
                   "truth", "n_seeds", "threads", "record", "check_identity", "output_dir"});

    ExperimentConfig cfg;
    RunConfig& run = cfg.run;
    run.net = parse_network(need(doc, "network", "config"));
    run.states = parse_states(need(doc, "states", "config"));
    run.states.validate();
    const int k_states = run.states.n_states();

    run.sig = parse_signal_model(need(doc, "signal_model", "config"), run.net.n);
    run.sig.validate(k_states);
    run.priors = parse_priors(find(doc, "priors"), run.net.n, k_states);
    run.priors.validate(run.net.n, k_states);
    run.rule = parse_rule(need(doc, "rule", "config"));
    validate_rule(run.rule, run.net, k_states);

    run.horizon = as_integer(need(doc, "horizon", "config"), "horizon");
    if (run.horizon < 0) fail("horizon", "must be >= 0");
    if (const json* s = find(doc, "seed")) {
        if (!s->is_number_integer()) fail("seed", "expected an integer");
        run.seed = s->get<std::uint64_t>();
    }
    if (const json* t = find(doc, "truth")) {
        const std::string label = as_string(*t, "truth");
        const int idx = run.states.index_of(label);
        if (idx < 0) fail("truth", "unknown state label '" + label + "'");
        run.truth = idx;
        run.states.truth = idx;
    } else {
        run.truth = -1;
    }
    if (const json* v = find(doc, "n_seeds")) {
        cfg.n_seeds = static_cast<int>(as_integer(*v, "n_seeds"));
        if (cfg.n_seeds < 1) fail("n_seeds", "must be >= 1");
    }
    if (const json* v = find(doc, "threads")) {
        cfg.threads = static_cast<int>(as_integer(*v, "threads"));
        if (cfg.threads < 1) fail("threads", "must be >= 1");
    }
    if (const json* v = find(doc, "check_identity"))
        cfg.check_identity = as_bool(*v, "check_identity");
    if (const json* v = find(doc, "record")) {
        expect_object(*v, "record", {"belief_every", "signals", "choices"});
        if (const json* e = find(*v, "belief_every")) {
            run.record.belief_every = as_integer(*e, "record.belief_every");
            if (run.record.belief_every < 0) fail("record.belief_every", "must be >= 0");
        }
        if (const json* e = find(*v, "signals"))
            run.record.signals = as_bool(*e, "record.signals");
        if (const json* e = find(*v, "choices"))
            run.record.choices = as_bool(*e, "record.choices");
    }
    if (const json* v = find(doc, "output_dir")) cfg.output_dir = as_string(*v, "output_dir");

    cfg.canonical = to_json(cfg);
    json hashed = cfg.canonical;
    hashed.erase("output_dir");
    hashed.erase("threads");
    cfg.config_hash = hash_json(hashed);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error("config: invalid JSON in '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    const RunConfig& run = cfg.run;
    json net = json::array();
    for (const auto& nbrs : run.net.neighbors) net.push_back(nbrs);

    json tables = json::array();
    for (const Matrix& m : run.sig.tables) tables.push_back(matrix_to_json(m));

    json priors = json::array();
    for (const Dist& d : run.priors.per_agent) priors.push_back(d);

    Dist nature = run.states.nature_prior;
    if (nature.empty()) nature = uniform_dist(run.states.n_states());

    json doc;
    doc["network"] = std::move(net);
    doc["states"] = json{{"labels", run.states.states}, {"nature_prior", nature}};
    doc["signal_model"] = json{{"tables", std::move(tables)},
                               {"allow_zero_likelihoods", run.sig.allow_zero_likelihoods}};
    doc["priors"] = std::move(priors);
    doc["rule"] = rule_to_json(run.rule, run.net);
    doc["horizon"] = run.horizon;
    doc["seed"] = run.seed;
    doc["truth"] = run.truth >= 0 ? json(run.states.states[static_cast<std::size_t>(run.truth)])
                                  : json(nullptr);
    doc["n_seeds"] = cfg.n_seeds;
    doc["threads"] = cfg.threads;
    doc["check_identity"] = cfg.check_identity;
    doc["record"] = json{{"belief_every", run.record.belief_every},
                         {"signals", run.record.signals},
                         {"choices", run.record.choices}};
    doc["output_dir"] = cfg.output_dir.empty() ? json(nullptr) : json(cfg.output_dir);
    return doc;
}

std::string hash_json(const nlohmann::json& doc) {
    const std::string dump = doc.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace beliefsim
