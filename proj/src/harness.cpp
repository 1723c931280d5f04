#include "nia/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nia/baselines.hpp"

namespace nia {

using nlohmann::json;

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::single_target: return "single_target";
        case ScenarioKind::multi_target: return "multi_target";
        case ScenarioKind::black_box: return "black_box";
    }
    return "single_target";
}

ScenarioKind scenario_from(const std::string& s) {
    if (s == "single_target") return ScenarioKind::single_target;
    if (s == "multi_target") return ScenarioKind::multi_target;
    if (s == "black_box") return ScenarioKind::black_box;
    throw std::invalid_argument("harness: unknown scenario '" + s + "'");
}

double misclassification_rate(const std::vector<AttackRecord>& records) {
    if (records.empty()) throw std::invalid_argument("harness: no records");
    std::size_t wins = 0;
    for (const auto& r : records) wins += r.success;
    return static_cast<double>(wins) / static_cast<double>(records.size());
}

namespace {

// pairwise hop distance at most 2: equal, adjacent, or sharing a neighbor
bool within_two_hops(const Graph& g, std::size_t a, std::size_t b) {
    if (a == b) return true;
    const auto ra = g.adjacency.pattern->row(a);
    const auto rb = g.adjacency.pattern->row(b);
    if (std::binary_search(ra.begin(), ra.end(), b)) return true;
    std::size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
        if (ra[i] == rb[j]) return true;
        ra[i] < rb[j] ? ++i : ++j;
    }
    return false;
}

}  // namespace

std::vector<std::vector<std::size_t>> build_target_groups(const Graph& g,
                                                          const std::vector<std::size_t>& pool,
                                                          std::uint64_t /*seed*/) {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<bool> used(g.n(), false);
    std::vector<std::size_t> sorted = pool;
    std::sort(sorted.begin(), sorted.end());

    for (std::size_t ui = 0; ui < sorted.size(); ++ui) {
        const std::size_t u = sorted[ui];
        if (used[u]) continue;
        bool placed = false;
        for (std::size_t vi = ui + 1; vi < sorted.size() && !placed; ++vi) {
            const std::size_t v = sorted[vi];
            if (used[v] || !within_two_hops(g, u, v)) continue;
            for (std::size_t wi = vi + 1; wi < sorted.size(); ++wi) {
                const std::size_t w = sorted[wi];
                if (used[w] || !within_two_hops(g, u, w) || !within_two_hops(g, v, w)) continue;
                groups.push_back({u, v, w});
                used[u] = used[v] = used[w] = true;
                placed = true;
                break;
            }
        }
    }
    return groups;
}

std::size_t multi_target_delta(double avg_degree, std::size_t group_size,
                               std::size_t candidate_count) {
    const double cap = std::min(static_cast<double>(group_size) * avg_degree,
                                0.5 * static_cast<double>(candidate_count));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cap)));
}

std::vector<AttackInstance> single_instances(const std::vector<std::size_t>& nodes,
                                             std::size_t delta) {
    std::vector<AttackInstance> out;
    out.reserve(nodes.size());
    for (std::size_t t : nodes) out.push_back({{t}, delta});
    return out;
}

std::vector<AttackInstance> group_instances(const Graph& g,
                                            const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<AttackInstance> out;
    out.reserve(groups.size());
    const double d_avg = g.avg_degree();
    for (const auto& grp : groups) {
        const std::size_t m = candidate_set(g, grp).size();
        out.push_back({grp, multi_target_delta(d_avg, grp.size(), m)});
    }
    return out;
}

std::uint64_t plan_digest(const InjectionPlan& plan) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    auto mix_f64 = [&mix](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        mix(bits);
    };
    mix(plan.delta);
    mix(plan.hardened ? 1 : 0);
    mix(plan.candidates.size());
    for (std::size_t c : plan.candidates) mix(c);
    for (double w : plan.edge_weights) mix_f64(w);
    for (double a : plan.attrs) mix_f64(a);
    return h;
}

std::pair<std::vector<AttackRecord>, RunManifest> run_scenario(const Graph& g,
                                                               const SurrogateModel& surrogate,
                                                               const SurrogateModel& victim,
                                                               const ScenarioSpec& spec,
                                                               const MethodConfigs& cfgs) {
    const std::uint64_t checksum_before = graph_checksum(g);
    const AttributeBounds bounds = attribute_bounds(g);
    const auto test_nodes = g.nodes_with(SplitTag::test);
    if (test_nodes.empty()) throw std::invalid_argument("harness: graph has no test split");

    std::vector<AttackInstance> instances =
        spec.kind == ScenarioKind::multi_target
            ? group_instances(g, build_target_groups(g, test_nodes, spec.seed))
            : single_instances(test_nodes, spec.delta);
    if (spec.max_attacks > 0 && instances.size() > spec.max_attacks)
        instances.resize(spec.max_attacks);
    if (instances.empty()) throw std::runtime_error("harness: no attack instances available");

    if (spec.method == "gnia" && cfgs.gnia == nullptr)
        throw std::invalid_argument("harness: gnia method requires trained parameters");

    // clean baseline on the victim, all-or-nothing per instance
    const ad::Tensor clean_victim = model_forward(victim, g);
    std::size_t clean_wins = 0;
    for (const auto& inst : instances) {
        const auto flags = misclassified_flags(clean_victim, inst.targets, g.labels);
        clean_wins += std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
    }

    // crafting phase: surrogate only
    ad::Tensor hidden_rows, surrogate_probs;
    if (spec.method == "gnia" || spec.method == "mostattr") {
        hidden_rows = hidden_representation(surrogate, g);
        surrogate_probs = model_forward(surrogate, g);
    }
    const bool distinct_victim = surrogate.forward_calls != victim.forward_calls;
    const std::uint64_t victim_calls_before = forward_count(victim);

    std::vector<InjectionPlan> plans(instances.size());
    std::vector<double> craft_time(instances.size(), 0.0);
    std::vector<std::size_t> fallbacks(instances.size(), 0);
    std::vector<std::exception_ptr> errors(instances.size());

    const long long count = static_cast<long long>(instances.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long ii = 0; ii < count; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        try {
            const AttackInstance& inst = instances[i];
            std::mt19937_64 rng(spec.seed + 7919 * (i + 1));
            using clock = std::chrono::steady_clock;
            if (spec.method == "opti") {
                OptiConfig cfg = cfgs.opti;
                cfg.seed = spec.seed + 7919 * (i + 1);
                AttackOutcome out = opti_attack(surrogate, g, inst.targets, bounds, inst.delta, cfg);
                plans[i] = std::move(out.plan);
                craft_time[i] = out.wall_time;
            } else if (spec.method == "gnia") {
                AttackOutcome out = gnia_infer(*cfgs.gnia, surrogate, g, hidden_rows,
                                               surrogate_probs, inst, bounds, cfgs.gnia_tau,
                                               cfgs.ablation, rng);
                plans[i] = std::move(out.plan);
                craft_time[i] = out.wall_time;
            } else if (spec.method == "random") {
                const auto t0 = clock::now();
                plans[i] = random_attack(g, inst.targets, inst.delta, rng);
                craft_time[i] = std::chrono::duration<double>(clock::now() - t0).count();
            } else if (spec.method == "mostattr") {
                const auto t0 = clock::now();
                bool fell = false;
                plans[i] = most_attr_attack(g, surrogate, inst.targets, inst.delta, rng, &fell);
                craft_time[i] = std::chrono::duration<double>(clock::now() - t0).count();
                fallbacks[i] = fell;
            } else if (spec.method == "prefedge") {
                const auto t0 = clock::now();
                plans[i] = pref_edge_attack(g, inst.targets, inst.delta, rng);
                craft_time[i] = std::chrono::duration<double>(clock::now() - t0).count();
            } else {
                throw std::invalid_argument("harness: unknown method '" + spec.method + "'");
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    if (distinct_victim && forward_count(victim) != victim_calls_before)
        throw std::logic_error("harness: victim model was queried while crafting attacks");

    // evaluation phase: victim only
    std::vector<AttackRecord> records(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        validate_plan(g, bounds, plans[i]);
        AttackRecord rec;
        rec.targets = instances[i].targets;
        rec.method = spec.method;
        rec.delta = instances[i].delta;
        rec.wall_time = craft_time[i];
        rec.plan_digest = plan_digest(plans[i]);
        PerturbedView view = inject_node(g, std::move(plans[i]));
        const ad::Tensor probs = model_forward(victim, view);
        rec.loss = attack_loss(probs, rec.targets, g.labels);
        const auto flags = misclassified_flags(probs, rec.targets, g.labels);
        rec.flags.assign(flags.begin(), flags.end());
        rec.success = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
        records[i] = std::move(rec);
    }

    if (graph_checksum(g) != checksum_before)
        throw std::logic_error("harness: base graph changed during the run");

    RunManifest man;
    man.scenario = to_string(spec.kind);
    man.method = spec.method;
    man.surrogate_kind = to_string(surrogate.kind);
    man.victim_kind = to_string(victim.kind);
    man.graph_digest = checksum_before;
    man.seed = spec.seed;
    man.attacks = records.size();
    man.rate = misclassification_rate(records);
    man.clean_rate = static_cast<double>(clean_wins) / static_cast<double>(instances.size());
    double wall = 0.0;
    for (const auto& r : records) wall += r.wall_time;
    man.mean_wall_time = wall / static_cast<double>(records.size());
    for (std::size_t f : fallbacks) man.fallback_count += f;
    return {std::move(records), std::move(man)};
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t from_hex64(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

json to_json(const AttackRecord& r) {
    return json{{"schema_version", record_schema_version},
                {"targets", r.targets},
                {"method", r.method},
                {"success", r.success},
                {"flags", r.flags},
                {"loss", r.loss},
                {"wall_time", r.wall_time},
                {"delta", r.delta},
                {"plan_digest", hex64(r.plan_digest)}};
}

AttackRecord record_from(const json& j) {
    if (j.at("schema_version").get<int>() != record_schema_version)
        throw std::runtime_error("harness: unsupported record schema version");
    AttackRecord r;
    r.targets = j.at("targets").get<std::vector<std::size_t>>();
    r.method = j.at("method").get<std::string>();
    r.success = j.at("success").get<bool>();
    r.flags = j.at("flags").get<std::vector<bool>>();
    r.loss = j.at("loss").get<double>();
    r.wall_time = j.at("wall_time").get<double>();
    r.delta = j.at("delta").get<std::size_t>();
    r.plan_digest = from_hex64(j.at("plan_digest").get<std::string>());
    return r;
}

}  // namespace

void write_records(const std::string& path, const std::vector<AttackRecord>& records) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("harness: cannot write " + path);
    for (const auto& r : records) os << to_json(r).dump() << '\n';
}

std::vector<AttackRecord> read_records(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("harness: cannot open " + path);
    std::vector<AttackRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(record_from(json::parse(line)));
    }
    return out;
}

void write_manifest(const std::string& path, const RunManifest& m) {
    json j{{"schema_version", record_schema_version},
           {"scenario", m.scenario},
           {"method", m.method},
           {"surrogate", m.surrogate_kind},
           {"victim", m.victim_kind},
           {"graph_digest", hex64(m.graph_digest)},
           {"seed", m.seed},
           {"attacks", m.attacks},
           {"rate", m.rate},
           {"clean_rate", m.clean_rate},
           {"mean_wall_time", m.mean_wall_time},
           {"fallback_count", m.fallback_count}};
    std::ofstream os(path);
    if (!os) throw std::runtime_error("harness: cannot write " + path);
    os << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("harness: cannot open " + path);
    json j = json::parse(is);
    if (j.at("schema_version").get<int>() != record_schema_version)
        throw std::runtime_error("harness: unsupported manifest schema version");
    RunManifest m;
    m.scenario = j.at("scenario").get<std::string>();
    m.method = j.at("method").get<std::string>();
    m.surrogate_kind = j.at("surrogate").get<std::string>();
    m.victim_kind = j.at("victim").get<std::string>();
    m.graph_digest = from_hex64(j.at("graph_digest").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.attacks = j.at("attacks").get<std::size_t>();
    m.rate = j.at("rate").get<double>();
    m.clean_rate = j.at("clean_rate").get<double>();
    m.mean_wall_time = j.at("mean_wall_time").get<double>();
    m.fallback_count = j.at("fallback_count").get<std::size_t>();
    return m;
}

std::string report_markdown(const std::vector<RunManifest>& manifests) {
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"clean", "Clean"},     {"random", "Random"},   {"mostattr", "MostAttr"},
        {"prefedge", "PrefEdge"}, {"nipa", "NIPA"},     {"afgsm", "AFGSM"},
        {"opti", "OPTI"},       {"gnia", "G-NIA"}};
    std::vector<std::string> scenarios;
    for (const char* s : {"single_target", "multi_target", "black_box"})
        for (const auto& m : manifests)
            if (m.scenario == s && std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end())
                scenarios.push_back(s);

    std::ostringstream os;
    os << "| Method |";
    for (const auto& s : scenarios) os << ' ' << s << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < scenarios.size(); ++i) os << "---|";
    os << '\n';

    auto cell = [&](const std::string& method, const std::string& scenario) -> std::string {
        for (const auto& m : manifests) {
            if (m.scenario != scenario) continue;
            if (method == "clean") {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * m.clean_rate);
                return buf;
            }
            if (m.method == method) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * m.rate);
                return buf;
            }
        }
        return "";
    };

    for (const auto& [key, label] : rows) {
        os << "| " << label << " |";
        for (const auto& s : scenarios) os << ' ' << cell(key, s) << " |";
        os << '\n';
    }
    os << "\nMisclassification rates; higher is a stronger attack. NIPA and AFGSM are\n"
          "external methods and are not bundled here, so their columns stay blank.\n";
    return os.str();
}

}  // namespace nia
