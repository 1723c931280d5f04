#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nia/sparse.hpp"
#include "nia/tensor.hpp"

namespace nia {

enum class AttrKind { continuous, discrete };
enum class SplitTag { train, val, test };

const char* to_string(AttrKind k);
AttrKind attr_kind_from(const std::string& s);

// Undirected attributed graph. The adjacency stores both directions of every
// edge with value 1 and keeps a zero diagonal; it never changes after load.
struct Graph {
    CsrMatrix adjacency;
    ad::Tensor attributes;  // n x d
    std::vector<int> labels;
    int num_classes = 0;
    AttrKind attr_kind = AttrKind::continuous;
    std::vector<SplitTag> split;  // empty until split_nodes

    std::size_t n() const { return adjacency.rows(); }
    std::size_t dim() const { return attributes.cols(); }
    std::size_t degree(std::size_t i) const { return adjacency.pattern->row(i).size(); }
    double avg_degree() const;
    std::vector<std::size_t> nodes_with(SplitTag tag) const;
};

// Per-feature box constraints for injected attributes; l0_budget is the
// nonzero allowance for discrete graphs (0 when continuous).
struct AttributeBounds {
    std::vector<double> lo, hi;
    std::size_t l0_budget = 0;
};

// One injected node: its attribute row, the candidate endpoints it may wire
// to (ascending ids; edge_weights aligned to this order), and the budget.
struct InjectionPlan {
    std::vector<double> attrs;
    std::vector<std::size_t> candidates;
    std::vector<double> edge_weights;
    std::size_t delta = 1;
    bool hardened = false;
};

// Read-only overlay of a plan on a base graph; node n is the injected node.
struct PerturbedView {
    const Graph* base = nullptr;
    InjectionPlan plan;

    std::size_t n() const { return base->n() + 1; }
};

// Sparsity skeleton of the normalized (n+1)-node adjacency for a fixed
// candidate set. Injected entries and degree contributions are indexed so a
// weight vector (or a taped tensor) can be scattered in without rebuilding.
struct PerturbedStructure {
    std::shared_ptr<const CsrPattern> pattern;  // includes the diagonal
    std::vector<double> values_template;        // 1 at base/self entries, 0 at injected slots
    std::vector<std::pair<std::size_t, std::size_t>> injected_slots;  // nnz pos -> weight index
    std::vector<double> degree_plus1;           // per node, self-loop included
    std::vector<std::pair<std::size_t, std::size_t>> degree_updates;  // node -> weight index
    std::vector<std::size_t> entry_rows, entry_cols;  // per nnz, for degree gathers
    std::vector<std::size_t> candidates;
};

Graph load_graph(const std::string& edge_path, const std::string& attr_path,
                 const std::string& label_path, AttrKind expected_kind);
void write_graph(const Graph& g, const std::string& edge_path, const std::string& attr_path,
                 const std::string& label_path);

Graph largest_connected_component(const Graph& g);
Graph split_nodes(Graph g, std::uint64_t seed);

CsrMatrix normalize_adjacency(const Graph& g);
CsrMatrix normalize_adjacency(const PerturbedView& view);
CsrMatrix normalize_adjacency(const PerturbedStructure& ps, const std::vector<double>& edge_weights);

std::vector<std::size_t> candidate_set(const Graph& g, const std::vector<std::size_t>& targets);
AttributeBounds attribute_bounds(const Graph& g);

PerturbedStructure build_perturbed_structure(const Graph& g,
                                             const std::vector<std::size_t>& candidates);

// Structural checks only (candidate ids, weight count, hardened edge rule).
void validate_plan_structure(const Graph& g, const InjectionPlan& plan);
// Full check including attribute bounds / l0 budget; throws on any violation.
void validate_plan(const Graph& g, const AttributeBounds& bounds, const InjectionPlan& plan);

PerturbedView inject_node(const Graph& g, InjectionPlan plan);

// FNV-1a over the canonical serialization (see README); order-sensitive and
// covering adjacency, attributes, labels, classes, kind and split tags.
std::uint64_t graph_checksum(const Graph& g);

}  // namespace nia
