#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nia/attack.hpp"
#include "nia/baselines.hpp"
#include "nia/gnia.hpp"
#include "nia/gnn.hpp"
#include "nia/graph.hpp"
#include "nia/harness.hpp"
#include "nia/sbm.hpp"

namespace {

using nia::AttrKind;
using nia::Graph;

std::string resolve_prefix(const std::string& prefix) {
    namespace fs = std::filesystem;
    if (fs::path(prefix).is_absolute()) return prefix;
    if (const char* dir = std::getenv("NIA_DATA_DIR"); dir && *dir)
        return (fs::path(dir) / prefix).string();
    return prefix;
}

AttrKind peek_kind(const std::string& attr_path) {
    std::ifstream is(attr_path);
    if (!is) throw std::runtime_error("cannot open " + attr_path);
    std::size_t n, d;
    std::string kind;
    if (!(is >> n >> d >> kind)) throw std::runtime_error("bad header in " + attr_path);
    return nia::attr_kind_from(kind);
}

Graph load_prefixed(const std::string& raw_prefix, const std::string& kind_arg) {
    const std::string prefix = resolve_prefix(raw_prefix);
    const std::string attrs = prefix + ".attrs";
    const AttrKind kind = kind_arg.empty() ? peek_kind(attrs) : nia::attr_kind_from(kind_arg);
    return nia::load_graph(prefix + ".edges", attrs, prefix + ".labels", kind);
}

std::vector<nia::AttackInstance> parse_targets(const Graph& g, const std::string& spec,
                                               std::size_t delta, bool delta_given) {
    std::vector<nia::AttackInstance> out;
    std::stringstream groups(spec);
    std::string group;
    while (std::getline(groups, group, ';')) {
        if (group.empty()) continue;
        nia::AttackInstance inst;
        std::stringstream members(group);
        std::string tok;
        while (std::getline(members, tok, ',')) inst.targets.push_back(std::stoull(tok));
        std::sort(inst.targets.begin(), inst.targets.end());
        inst.delta = delta;
        if (inst.targets.size() > 1 && !delta_given) {
            const std::size_t m = nia::candidate_set(g, inst.targets).size();
            inst.delta = nia::multi_target_delta(g.avg_degree(), inst.targets.size(), m);
        }
        out.push_back(std::move(inst));
    }
    if (out.empty()) throw std::runtime_error("no targets parsed from '" + spec + "'");
    return out;
}

void write_graph_prefixed(const Graph& g, const std::string& raw_prefix) {
    const std::string prefix = resolve_prefix(raw_prefix);
    nia::write_graph(g, prefix + ".edges", prefix + ".attrs", prefix + ".labels");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-node injection attacks against GNN classifiers"};
    app.require_subcommand(1);
    std::ostringstream unused;

    try {
        // synth: generate an SBM graph triplet
        auto* synth = app.add_subcommand("synth", "generate a synthetic SBM graph");
        nia::SbmConfig sbm;
        std::string synth_out, synth_kind = "cont";
        synth->add_option("--out", synth_out, "output path prefix")->required();
        synth->add_option("--nodes", sbm.nodes);
        synth->add_option("--classes", sbm.classes);
        synth->add_option("--dim", sbm.dim);
        synth->add_option("--p-in", sbm.p_in);
        synth->add_option("--p-out", sbm.p_out);
        synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"cont", "disc"}));
        synth->add_option("--signal", sbm.signal);
        synth->add_option("--noise", sbm.noise);
        synth->add_option("--p-hi", sbm.p_hi);
        synth->add_option("--p-lo", sbm.p_lo);
        synth->add_option("--seed", sbm.seed);
        synth->callback([&] {
            sbm.kind = nia::attr_kind_from(synth_kind);
            const Graph g = nia::make_sbm(sbm);
            write_graph_prefixed(g, synth_out);
            std::cout << "wrote " << synth_out << ".{edges,attrs,labels}  n=" << g.n()
                      << " d=" << g.dim() << " K=" << g.num_classes << '\n';
        });

        // prep: load, reduce to the largest component, report
        auto* prep = app.add_subcommand("prep", "load a graph, keep its largest component");
        std::string prep_graph, prep_out, prep_kind;
        prep->add_option("--graph", prep_graph, "input path prefix")->required();
        prep->add_option("--out", prep_out, "output path prefix")->required();
        prep->add_option("--kind", prep_kind)->check(CLI::IsMember({"cont", "disc"}));
        prep->callback([&] {
            Graph g = nia::largest_connected_component(load_prefixed(prep_graph, prep_kind));
            write_graph_prefixed(g, prep_out);
            std::cout << "lcc n=" << g.n() << " d=" << g.dim() << " K=" << g.num_classes
                      << " checksum=0x" << std::hex << nia::graph_checksum(g) << std::dec << '\n';
        });

        // train-surrogate
        auto* trs = app.add_subcommand("train-surrogate", "fit a GCN or APPNP on a graph");
        std::string trs_graph, trs_kind, trs_model = "gcn", trs_out;
        std::uint64_t trs_split_seed = 0;
        nia::TrainConfig trs_cfg;
        trs->add_option("--graph", trs_graph)->required();
        trs->add_option("--kind", trs_kind)->check(CLI::IsMember({"cont", "disc"}));
        trs->add_option("--model-kind", trs_model)->check(CLI::IsMember({"gcn", "appnp"}));
        trs->add_option("--out", trs_out, "checkpoint path")->required();
        trs->add_option("--split-seed", trs_split_seed);
        trs->add_option("--lr", trs_cfg.lr);
        trs->add_option("--weight-decay", trs_cfg.weight_decay);
        trs->add_option("--epochs", trs_cfg.epochs);
        trs->add_option("--patience", trs_cfg.patience);
        trs->add_option("--hidden", trs_cfg.hidden);
        trs->add_option("--seed", trs_cfg.seed);
        trs->callback([&] {
            Graph g = nia::split_nodes(load_prefixed(trs_graph, trs_kind), trs_split_seed);
            const auto m = nia::train_surrogate(g, nia::gnn_kind_from(trs_model), trs_cfg);
            nia::save_model(m, trs_out);
            const auto probs = nia::model_forward(m, g);
            std::cout << "saved " << trs_out << "  train acc="
                      << nia::accuracy(probs, g.labels, g.nodes_with(nia::SplitTag::train))
                      << " val acc="
                      << nia::accuracy(probs, g.labels, g.nodes_with(nia::SplitTag::val))
                      << " test acc="
                      << nia::accuracy(probs, g.labels, g.nodes_with(nia::SplitTag::test)) << '\n';
        });

        // attack <method>
        auto* atk = app.add_subcommand("attack", "craft and evaluate injection attacks");
        std::string atk_method, atk_graph, atk_kind, atk_model, atk_victim, atk_gnia;
        std::string atk_scenario = "single_target", atk_out, atk_manifest, atk_targets;
        std::size_t atk_delta = 1, atk_max = 0;
        std::uint64_t atk_seed = 0, atk_split_seed = 0;
        nia::OptiConfig atk_opti;
        double atk_tau = 0.1;
        atk->add_option("method", atk_method, "opti|gnia|random|mostattr|prefedge")
            ->required()
            ->check(CLI::IsMember({"opti", "gnia", "random", "mostattr", "prefedge"}));
        atk->add_option("--graph", atk_graph)->required();
        atk->add_option("--kind", atk_kind)->check(CLI::IsMember({"cont", "disc"}));
        atk->add_option("--model", atk_model, "surrogate checkpoint")->required();
        atk->add_option("--victim", atk_victim, "victim checkpoint (defaults to the surrogate)");
        atk->add_option("--gnia", atk_gnia, "generator checkpoint for method gnia");
        atk->add_option("--scenario", atk_scenario)
            ->check(CLI::IsMember({"single_target", "multi_target", "black_box"}));
        auto* delta_opt = atk->add_option("--delta", atk_delta, "edge budget");
        atk->add_option("--seed", atk_seed);
        atk->add_option("--split-seed", atk_split_seed);
        atk->add_option("--max-attacks", atk_max);
        atk->add_option("--targets", atk_targets, "explicit targets, e.g. '4;7;1,2,3'");
        atk->add_option("--out", atk_out, "records path (JSON lines)");
        atk->add_option("--manifest", atk_manifest, "manifest path (JSON)");
        atk->add_option("--opti-lr", atk_opti.lr);
        atk->add_option("--opti-iters", atk_opti.max_iters);
        atk->add_option("--tau", atk_tau);
        atk->callback([&] {
            Graph g = nia::split_nodes(load_prefixed(atk_graph, atk_kind), atk_split_seed);
            const auto surrogate = nia::load_model(atk_model, g);
            const auto victim = atk_victim.empty() ? surrogate : nia::load_model(atk_victim, g);
            std::optional<nia::GniaParams> gnia;
            if (atk_method == "gnia") {
                if (atk_gnia.empty()) throw std::runtime_error("--gnia checkpoint required");
                gnia = nia::load_gnia(atk_gnia, g, surrogate);
            }

            nia::ScenarioSpec spec;
            spec.kind = nia::scenario_from(atk_scenario);
            spec.method = atk_method;
            spec.delta = atk_delta;
            spec.max_attacks = atk_max;
            spec.seed = atk_seed;
            nia::MethodConfigs cfgs;
            cfgs.opti = atk_opti;
            cfgs.opti.gumbel.tau = atk_tau;
            cfgs.gnia = gnia ? &*gnia : nullptr;
            cfgs.gnia_tau = atk_tau;

            if (!atk_targets.empty()) {
                // explicit instances bypass the scenario's target selection
                const auto bounds = nia::attribute_bounds(g);
                auto instances =
                    parse_targets(g, atk_targets, atk_delta, delta_opt->count() > 0);
                std::vector<nia::AttackRecord> records;
                const auto hidden = nia::hidden_representation(surrogate, g);
                const auto sprobs = nia::model_forward(surrogate, g);
                for (std::size_t i = 0; i < instances.size(); ++i) {
                    const auto& inst = instances[i];
                    std::mt19937_64 rng(atk_seed + 7919 * (i + 1));
                    nia::InjectionPlan plan;
                    double crafted = 0.0;
                    if (atk_method == "opti") {
                        nia::OptiConfig cfg = cfgs.opti;
                        cfg.seed = atk_seed + 7919 * (i + 1);
                        auto out = nia::opti_attack(surrogate, g, inst.targets, bounds,
                                                    inst.delta, cfg);
                        plan = std::move(out.plan);
                        crafted = out.wall_time;
                    } else if (atk_method == "gnia") {
                        auto out = nia::gnia_infer(*gnia, surrogate, g, hidden, sprobs, inst,
                                                   bounds, atk_tau, nia::GniaAblation::none, rng);
                        plan = std::move(out.plan);
                        crafted = out.wall_time;
                    } else if (atk_method == "random") {
                        plan = nia::random_attack(g, inst.targets, inst.delta, rng);
                    } else if (atk_method == "mostattr") {
                        plan = nia::most_attr_attack(g, surrogate, inst.targets, inst.delta, rng);
                    } else {
                        plan = nia::pref_edge_attack(g, inst.targets, inst.delta, rng);
                    }
                    nia::validate_plan(g, bounds, plan);
                    nia::AttackRecord rec;
                    rec.targets = inst.targets;
                    rec.method = atk_method;
                    rec.delta = inst.delta;
                    rec.wall_time = crafted;
                    rec.plan_digest = nia::plan_digest(plan);
                    auto view = nia::inject_node(g, std::move(plan));
                    const auto probs = nia::model_forward(victim, view);
                    rec.loss = nia::attack_loss(probs, rec.targets, g.labels);
                    const auto flags = nia::misclassified_flags(probs, rec.targets, g.labels);
                    rec.flags.assign(flags.begin(), flags.end());
                    rec.success = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
                    records.push_back(std::move(rec));
                }
                if (!atk_out.empty()) nia::write_records(atk_out, records);
                std::cout << "attacks=" << records.size()
                          << " rate=" << nia::misclassification_rate(records) << '\n';
                return;
            }

            auto [records, manifest] = nia::run_scenario(g, surrogate, victim, spec, cfgs);
            if (!atk_out.empty()) nia::write_records(atk_out, records);
            if (!atk_manifest.empty()) nia::write_manifest(atk_manifest, manifest);
            std::cout << "attacks=" << manifest.attacks << " rate=" << manifest.rate
                      << " clean=" << manifest.clean_rate
                      << " mean_wall=" << manifest.mean_wall_time << '\n';
        });

        // gnia train / gnia infer
        auto* gn = app.add_subcommand("gnia", "train or run the trainable attacker");
        gn->require_subcommand(1);
        auto* gt = gn->add_subcommand("train", "fit generator parameters");
        std::string gt_graph, gt_kind, gt_model, gt_out, gt_manifest, gt_scenario = "single_target";
        std::string gt_ablation = "none";
        std::uint64_t gt_split_seed = 0;
        nia::GniaTrainConfig gt_cfg;
        std::size_t gt_max_train = 0, gt_delta = 1;
        gt->add_option("--graph", gt_graph)->required();
        gt->add_option("--kind", gt_kind)->check(CLI::IsMember({"cont", "disc"}));
        gt->add_option("--model", gt_model, "surrogate checkpoint")->required();
        gt->add_option("--out", gt_out, "generator checkpoint path")->required();
        gt->add_option("--manifest", gt_manifest, "training manifest path");
        gt->add_option("--scenario", gt_scenario)
            ->check(CLI::IsMember({"single_target", "multi_target"}));
        gt->add_option("--split-seed", gt_split_seed);
        gt->add_option("--delta", gt_delta);
        gt->add_option("--lr", gt_cfg.lr);
        gt->add_option("--epochs", gt_cfg.max_epochs);
        gt->add_option("--patience", gt_cfg.patience);
        gt->add_option("--minibatch", gt_cfg.minibatch);
        gt->add_option("--hidden-attr", gt_cfg.hidden_attr);
        gt->add_option("--hidden-edge", gt_cfg.hidden_edge);
        gt->add_option("--tau", gt_cfg.gumbel.tau);
        gt->add_option("--eps", gt_cfg.gumbel.eps);
        gt->add_option("--decay", gt_cfg.gumbel.decay);
        gt->add_option("--seed", gt_cfg.seed);
        gt->add_option("--max-train", gt_max_train, "cap on training instances");
        gt->add_option("--ablation", gt_ablation)
            ->check(CLI::IsMember({"none", "no_attr", "no_edge", "no_joint"}));
        gt->callback([&] {
            Graph g = nia::split_nodes(load_prefixed(gt_graph, gt_kind), gt_split_seed);
            const auto m = nia::load_model(gt_model, g);
            gt_cfg.ablation = nia::ablation_from(gt_ablation);

            std::vector<nia::AttackInstance> train_set, val_set;
            if (gt_scenario == "multi_target") {
                train_set = nia::group_instances(
                    g, nia::build_target_groups(g, g.nodes_with(nia::SplitTag::train), gt_cfg.seed));
                val_set = nia::group_instances(
                    g, nia::build_target_groups(g, g.nodes_with(nia::SplitTag::val), gt_cfg.seed));
            } else {
                train_set = nia::single_instances(g.nodes_with(nia::SplitTag::train), gt_delta);
                val_set = nia::single_instances(g.nodes_with(nia::SplitTag::val), gt_delta);
            }
            if (gt_max_train > 0 && train_set.size() > gt_max_train)
                train_set.resize(gt_max_train);

            nia::GniaTrainStats stats;
            const auto params = nia::gnia_train(g, m, train_set, val_set, gt_cfg, &stats);
            nia::save_gnia(params, g.attr_kind, gt_out);
            if (!gt_manifest.empty()) {
                nlohmann::json j{{"schema_version", nia::record_schema_version},
                                 {"lr", gt_cfg.lr},
                                 {"max_epochs", gt_cfg.max_epochs},
                                 {"patience", gt_cfg.patience},
                                 {"minibatch", gt_cfg.minibatch},
                                 {"tau", gt_cfg.gumbel.tau},
                                 {"eps", gt_cfg.gumbel.eps},
                                 {"decay", gt_cfg.gumbel.decay},
                                 {"seed", gt_cfg.seed},
                                 {"ablation", gt_ablation},
                                 {"scenario", gt_scenario},
                                 {"epochs_run", stats.epochs_run},
                                 {"best_val_rate", stats.best_val_rate}};
                std::ofstream os(gt_manifest);
                os << j.dump(2) << '\n';
            }
            std::cout << "saved " << gt_out << "  epochs=" << stats.epochs_run
                      << " best_val_rate=" << stats.best_val_rate << '\n';
        });

        auto* gi = gn->add_subcommand("infer", "run a trained generator on explicit targets");
        std::string gi_graph, gi_kind, gi_model, gi_gnia, gi_targets, gi_out;
        std::uint64_t gi_split_seed = 0, gi_seed = 0;
        std::size_t gi_delta = 1;
        double gi_tau = 0.1;
        gi->add_option("--graph", gi_graph)->required();
        gi->add_option("--kind", gi_kind)->check(CLI::IsMember({"cont", "disc"}));
        gi->add_option("--model", gi_model)->required();
        gi->add_option("--gnia", gi_gnia)->required();
        gi->add_option("--targets", gi_targets, "e.g. '4;7;1,2,3'")->required();
        auto* gi_delta_opt = gi->add_option("--delta", gi_delta);
        gi->add_option("--split-seed", gi_split_seed);
        gi->add_option("--seed", gi_seed);
        gi->add_option("--tau", gi_tau);
        gi->add_option("--out", gi_out, "records path (JSON lines)");
        gi->callback([&] {
            Graph g = nia::split_nodes(load_prefixed(gi_graph, gi_kind), gi_split_seed);
            const auto m = nia::load_model(gi_model, g);
            const auto params = nia::load_gnia(gi_gnia, g, m);
            const auto bounds = nia::attribute_bounds(g);
            const auto hidden = nia::hidden_representation(m, g);
            const auto probs = nia::model_forward(m, g);
            const auto instances =
                parse_targets(g, gi_targets, gi_delta, gi_delta_opt->count() > 0);
            std::vector<nia::AttackRecord> records;
            std::mt19937_64 rng(gi_seed);
            for (const auto& inst : instances) {
                const auto out = nia::gnia_infer(params, m, g, hidden, probs, inst, bounds,
                                                 gi_tau, nia::GniaAblation::none, rng);
                nia::AttackRecord rec;
                rec.targets = inst.targets;
                rec.method = "gnia";
                rec.delta = inst.delta;
                rec.wall_time = out.wall_time;
                rec.plan_digest = nia::plan_digest(out.plan);
                rec.loss = out.loss_final;
                rec.flags.assign(out.success.begin(), out.success.end());
                rec.success = std::all_of(out.success.begin(), out.success.end(),
                                          [](bool b) { return b; });
                records.push_back(std::move(rec));
            }
            if (!gi_out.empty()) nia::write_records(gi_out, records);
            std::cout << "attacks=" << records.size()
                      << " rate=" << nia::misclassification_rate(records) << '\n';
        });

        // eval: recompute aggregates from records
        auto* ev = app.add_subcommand("eval", "recompute the rate from a records file");
        std::string ev_records, ev_manifest;
        ev->add_option("--records", ev_records)->required();
        ev->add_option("--manifest", ev_manifest, "cross-check against a manifest");
        ev->callback([&] {
            const auto records = nia::read_records(ev_records);
            const double rate = nia::misclassification_rate(records);
            std::cout << "attacks=" << records.size() << " rate=" << rate << '\n';
            if (!ev_manifest.empty()) {
                const auto man = nia::read_manifest(ev_manifest);
                if (std::abs(man.rate - rate) > 1e-12)
                    throw std::runtime_error("manifest rate disagrees with records");
                std::cout << "manifest agrees\n";
            }
        });

        // ablate: train each variant and compare on the test targets
        auto* ab = app.add_subcommand("ablate", "train and compare generator ablations");
        std::string ab_graph, ab_kind, ab_model;
        std::uint64_t ab_split_seed = 0;
        nia::GniaTrainConfig ab_cfg;
        std::size_t ab_max_train = 0;
        ab->add_option("--graph", ab_graph)->required();
        ab->add_option("--kind", ab_kind)->check(CLI::IsMember({"cont", "disc"}));
        ab->add_option("--model", ab_model)->required();
        ab->add_option("--split-seed", ab_split_seed);
        ab->add_option("--lr", ab_cfg.lr);
        ab->add_option("--epochs", ab_cfg.max_epochs);
        ab->add_option("--patience", ab_cfg.patience);
        ab->add_option("--tau", ab_cfg.gumbel.tau);
        ab->add_option("--hidden-attr", ab_cfg.hidden_attr);
        ab->add_option("--hidden-edge", ab_cfg.hidden_edge);
        ab->add_option("--seed", ab_cfg.seed);
        ab->add_option("--max-train", ab_max_train);
        ab->callback([&] {
            Graph g = nia::split_nodes(load_prefixed(ab_graph, ab_kind), ab_split_seed);
            const auto m = nia::load_model(ab_model, g);
            auto train_set = nia::single_instances(g.nodes_with(nia::SplitTag::train), 1);
            auto val_set = nia::single_instances(g.nodes_with(nia::SplitTag::val), 1);
            if (ab_max_train > 0 && train_set.size() > ab_max_train)
                train_set.resize(ab_max_train);

            std::cout << "| Variant | Rate |\n|---|---|\n";
            for (const auto abl : {nia::GniaAblation::none, nia::GniaAblation::no_joint,
                                   nia::GniaAblation::no_edge, nia::GniaAblation::no_attr}) {
                nia::GniaTrainConfig cfg = ab_cfg;
                cfg.ablation = abl;
                const auto params = nia::gnia_train(g, m, train_set, val_set, cfg);
                nia::ScenarioSpec spec;
                spec.method = "gnia";
                spec.seed = ab_cfg.seed;
                nia::MethodConfigs cfgs;
                cfgs.gnia = &params;
                cfgs.gnia_tau = ab_cfg.gumbel.tau;
                cfgs.ablation = abl;
                const auto [records, man] = nia::run_scenario(g, m, m, spec, cfgs);
                std::cout << "| " << nia::to_string(abl) << " | " << man.rate << " |\n";
            }
        });

        // report: markdown table across manifests
        auto* rp = app.add_subcommand("report", "markdown rate table from manifests");
        std::vector<std::string> rp_manifests;
        rp->add_option("--manifests", rp_manifests, "manifest files")->required();
        rp->callback([&] {
            std::vector<nia::RunManifest> all;
            for (const auto& path : rp_manifests) all.push_back(nia::read_manifest(path));
            std::cout << nia::report_markdown(all);
        });

        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
