#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "nia/graph.hpp"
#include "nia/tensor.hpp"

namespace nia {

enum class GnnKind { gcn, appnp };

const char* to_string(GnnKind k);
GnnKind gnn_kind_from(const std::string& s);

struct GnnParams {
    ad::Tensor w0;  // d x h
    ad::Tensor w1;  // h x K
    double alpha = 0.1;    // appnp teleport
    std::size_t steps = 10;  // appnp propagation depth
};

// A trained model plus the normalized adjacency of the graph it was fitted
// on. forward_calls counts every prediction made through this handle, which
// lets tests prove the black-box attack path never queries the victim.
struct SurrogateModel {
    GnnKind kind = GnnKind::gcn;
    GnnParams params;
    CsrMatrix clean_norm_adj;
    std::uint64_t fitted_checksum = 0;
    std::shared_ptr<std::atomic<std::uint64_t>> forward_calls;

    std::size_t hidden() const { return params.w0.cols(); }
    std::size_t dim() const { return params.w0.rows(); }
    std::size_t classes() const { return params.w1.cols(); }
};

struct TrainConfig {
    double lr = 1e-2;
    double weight_decay = 5e-4;
    std::size_t epochs = 300;
    std::size_t patience = 30;
    std::size_t hidden = 64;
    std::uint64_t seed = 0;
    double alpha = 0.1;
    std::size_t steps = 10;
};

// Probability rows over the clean graph (cached adjacency).
ad::Tensor model_forward(const SurrogateModel& m, const Graph& g);
// Probability rows over an injected view; plan weights may be soft or hard.
ad::Tensor model_forward(const SurrogateModel& m, const PerturbedView& view);

// Differentiable forward through the soft-edge normalization: injected_attrs
// is the 1 x d attribute row and edge_weights the 1 x m candidate weights,
// either of which may require grad. Returns (n+1) x K probability rows.
ad::Tensor perturbed_forward(ad::Tape* tape, const SurrogateModel& m, const Graph& g,
                             const PerturbedStructure& ps, const ad::Tensor& injected_attrs,
                             const ad::Tensor& edge_weights);

ad::Tensor forward_probs(ad::Tape* tape, GnnKind kind, const GnnParams& p, const CsrMatrix& adj,
                         const ad::Tensor& x);
ad::Tensor forward_probs(ad::Tape* tape, GnnKind kind, const GnnParams& p,
                         const ad::SparseTensor& adj, const ad::Tensor& x);

// First-layer structure-aware activations, n x h over the clean graph.
ad::Tensor hidden_representation(const SurrogateModel& m, const Graph& g);

// Columns y and k of W0*W1 side by side as a 1 x 2d row.
ad::Tensor class_representation(const SurrogateModel& m, int y, int k);

// relu(a * W0): representation of a node that has no edges yet.
ad::Tensor transform_injected(ad::Tape* tape, const SurrogateModel& m, const ad::Tensor& a_inj);

// argmax over classes != labels[t] of the clean prediction row, ties toward
// the smaller class index.
int most_likely_class(const ad::Tensor& probs, int label, std::size_t t);
int most_likely_class(const SurrogateModel& m, const Graph& g, std::size_t t);

SurrogateModel train_surrogate(const Graph& g, GnnKind kind, const TrainConfig& cfg);

double accuracy(const ad::Tensor& probs, const std::vector<int>& labels,
                const std::vector<std::size_t>& nodes);

void save_model(const SurrogateModel& m, const std::string& path);
SurrogateModel load_model(const std::string& path, const Graph& g);

std::uint64_t forward_count(const SurrogateModel& m);

}  // namespace nia
