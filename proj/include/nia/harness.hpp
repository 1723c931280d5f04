#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nia/attack.hpp"
#include "nia/gnia.hpp"
#include "nia/gnn.hpp"
#include "nia/graph.hpp"

namespace nia {

inline constexpr int record_schema_version = 1;

enum class ScenarioKind { single_target, multi_target, black_box };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_from(const std::string& s);

struct AttackRecord {
    std::vector<std::size_t> targets;
    std::string method;
    bool success = false;          // all targets flipped on the victim
    std::vector<bool> flags;       // per-target victim flags
    double loss = 0.0;             // victim margin sum under the plan
    double wall_time = 0.0;        // crafting time only
    std::size_t delta = 1;
    std::uint64_t plan_digest = 0;
};

struct RunManifest {
    std::string scenario;
    std::string method;
    std::string surrogate_kind;
    std::string victim_kind;
    std::uint64_t graph_digest = 0;
    std::uint64_t seed = 0;
    std::size_t attacks = 0;
    double rate = 0.0;        // mean of record success flags
    double clean_rate = 0.0;  // same metric with no injection
    double mean_wall_time = 0.0;
    std::size_t fallback_count = 0;  // most_attr attribute fallbacks
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::single_target;
    std::string method = "random";  // opti | gnia | random | mostattr | prefedge
    std::size_t delta = 1;          // single-target budget; groups derive their own
    std::size_t max_attacks = 0;    // 0 = every test target / group
    std::uint64_t seed = 0;
};

// Attacker-side knobs; gnia fields are required only when method == "gnia".
struct MethodConfigs {
    OptiConfig opti;
    const GniaParams* gnia = nullptr;
    double gnia_tau = 0.1;
    GniaAblation ablation = GniaAblation::none;
};

double misclassification_rate(const std::vector<AttackRecord>& records);

// Greedy packing of disjoint triples from `pool` (ascending ids) whose
// members are pairwise at most two hops apart.
std::vector<std::vector<std::size_t>> build_target_groups(const Graph& g,
                                                          const std::vector<std::size_t>& pool,
                                                          std::uint64_t seed);

// max(1, floor(min(group_size * avg_degree, candidate_count / 2)))
std::size_t multi_target_delta(double avg_degree, std::size_t group_size,
                               std::size_t candidate_count);

std::vector<AttackInstance> single_instances(const std::vector<std::size_t>& nodes,
                                             std::size_t delta);
std::vector<AttackInstance> group_instances(const Graph& g,
                                            const std::vector<std::vector<std::size_t>>& groups);

// Crafts every attack with the surrogate, audits that the victim was never
// queried while crafting, then evaluates each plan on the victim.
std::pair<std::vector<AttackRecord>, RunManifest> run_scenario(const Graph& g,
                                                               const SurrogateModel& surrogate,
                                                               const SurrogateModel& victim,
                                                               const ScenarioSpec& spec,
                                                               const MethodConfigs& cfgs);

std::uint64_t plan_digest(const InjectionPlan& plan);

void write_records(const std::string& path, const std::vector<AttackRecord>& records);
std::vector<AttackRecord> read_records(const std::string& path);
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// Markdown table of misclassification rates, one row per method. Methods
// without an implementation here (external baselines) stay blank.
std::string report_markdown(const std::vector<RunManifest>& manifests);

}  // namespace nia
