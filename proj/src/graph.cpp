#include "nia/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nia {

const char* to_string(AttrKind k) { return k == AttrKind::continuous ? "cont" : "disc"; }

AttrKind attr_kind_from(const std::string& s) {
    if (s == "cont") return AttrKind::continuous;
    if (s == "disc") return AttrKind::discrete;
    throw std::invalid_argument("graph: unknown attribute kind '" + s + "'");
}

double Graph::avg_degree() const {
    if (n() == 0) return 0.0;
    return static_cast<double>(adjacency.pattern->nnz()) / static_cast<double>(n());
}

std::vector<std::size_t> Graph::nodes_with(SplitTag tag) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == tag) out.push_back(i);
    return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error("graph: " + path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Graph load_graph(const std::string& edge_path, const std::string& attr_path,
                 const std::string& label_path, AttrKind expected_kind) {
    std::ifstream attr_in(attr_path);
    if (!attr_in) throw std::runtime_error("graph: cannot open " + attr_path);
    std::string header;
    if (!std::getline(attr_in, header)) parse_fail(attr_path, 1, "missing header");
    std::size_t n = 0, d = 0;
    std::string kind_tok;
    {
        std::istringstream hs(header);
        if (!(hs >> n >> d >> kind_tok)) parse_fail(attr_path, 1, "header must be 'n d kind'");
    }
    const AttrKind kind = attr_kind_from(kind_tok);
    if (kind != expected_kind)
        throw std::invalid_argument("graph: " + attr_path + " declares '" + kind_tok +
                                    "' attributes, expected '" + to_string(expected_kind) + "'");
    if (n == 0 || d == 0) parse_fail(attr_path, 1, "n and d must be positive");

    std::vector<double> attrs(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        std::string line;
        if (!std::getline(attr_in, line)) parse_fail(attr_path, i + 2, "missing attribute row");
        std::istringstream ls(line);
        for (std::size_t j = 0; j < d; ++j) {
            double v;
            if (!(ls >> v)) parse_fail(attr_path, i + 2, "expected " + std::to_string(d) + " values");
            if (kind == AttrKind::discrete && v != 0.0 && v != 1.0)
                parse_fail(attr_path, i + 2, "discrete attribute outside {0,1}");
            attrs[i * d + j] = v;
        }
    }

    std::ifstream label_in(label_path);
    if (!label_in) throw std::runtime_error("graph: cannot open " + label_path);
    std::vector<int> labels(n);
    int max_label = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(label_in >> labels[i])) parse_fail(label_path, i + 1, "missing label");
        if (labels[i] < 0) parse_fail(label_path, i + 1, "negative label");
        max_label = std::max(max_label, labels[i]);
    }

    std::ifstream edge_in(edge_path);
    if (!edge_in) throw std::runtime_error("graph: cannot open " + edge_path);
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(edge_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t a, b;
        if (!(ls >> a >> b)) parse_fail(edge_path, line_no, "expected 'src<TAB>dst'");
        if (a >= n || b >= n)
            throw std::out_of_range("graph: " + edge_path + ":" + std::to_string(line_no) +
                                    ": node id exceeds n=" + std::to_string(n));
        if (a == b) continue;  // self-loops are added canonically during normalization
        entries.emplace_back(a, b);
        entries.emplace_back(b, a);
    }

    Graph g;
    auto pattern = make_pattern(n, n, entries);
    g.adjacency = {pattern, std::vector<double>(pattern->nnz(), 1.0)};
    g.attributes = ad::Tensor::from(n, d, std::move(attrs));
    g.labels = std::move(labels);
    g.num_classes = max_label + 1;
    g.attr_kind = kind;
    return g;
}

void write_graph(const Graph& g, const std::string& edge_path, const std::string& attr_path,
                 const std::string& label_path) {
    std::ofstream edge_out(edge_path);
    if (!edge_out) throw std::runtime_error("graph: cannot write " + edge_path);
    for (std::size_t i = 0; i < g.n(); ++i)
        for (std::size_t j : g.adjacency.pattern->row(i))
            if (i < j) edge_out << i << '\t' << j << '\n';

    std::ofstream attr_out(attr_path);
    if (!attr_out) throw std::runtime_error("graph: cannot write " + attr_path);
    attr_out << g.n() << ' ' << g.dim() << ' ' << to_string(g.attr_kind) << '\n';
    char buf[40];
    for (std::size_t i = 0; i < g.n(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", g.attributes.at(i, j));
            attr_out << buf << (j + 1 == g.dim() ? '\n' : ' ');
        }
    }

    std::ofstream label_out(label_path);
    if (!label_out) throw std::runtime_error("graph: cannot write " + label_path);
    for (int y : g.labels) label_out << y << '\n';
}

Graph largest_connected_component(const Graph& g) {
    const std::size_t n = g.n();
    if (n == 0) throw std::invalid_argument("graph: lcc of an empty graph");
    std::vector<int> comp(n, -1);
    int comps = 0;
    std::size_t best_root = 0, best_size = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int c = comps++;
        std::size_t size = 0;
        stack.assign(1, s);
        comp[s] = c;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            ++size;
            for (std::size_t v : g.adjacency.pattern->row(u)) {
                if (comp[v] < 0) {
                    comp[v] = c;
                    stack.push_back(v);
                }
            }
        }
        // strict > keeps the earliest (smallest-root) component on ties
        if (size > best_size) {
            best_size = size;
            best_root = s;
        }
    }
    const int keep = comp[best_root];

    std::vector<std::size_t> new_id(n, n);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] == keep) {
            new_id[i] = kept.size();
            kept.push_back(i);
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t i : kept)
        for (std::size_t j : g.adjacency.pattern->row(i))
            if (comp[j] == keep) entries.emplace_back(new_id[i], new_id[j]);

    Graph out;
    auto pattern = make_pattern(kept.size(), kept.size(), entries);
    out.adjacency = {pattern, std::vector<double>(pattern->nnz(), 1.0)};
    std::vector<double> attrs(kept.size() * g.dim());
    out.labels.resize(kept.size());
    if (!g.split.empty()) out.split.resize(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) attrs[i * g.dim() + j] = g.attributes.at(kept[i], j);
        out.labels[i] = g.labels[kept[i]];
        if (!g.split.empty()) out.split[i] = g.split[kept[i]];
    }
    out.attributes = ad::Tensor::from(kept.size(), g.dim(), std::move(attrs));
    out.num_classes = g.num_classes;
    out.attr_kind = g.attr_kind;
    return out;
}

Graph split_nodes(Graph g, std::uint64_t seed) {
    const std::size_t n = g.n();
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);

    const auto pool = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(pool)));
    g.split.assign(n, SplitTag::test);
    for (std::size_t i = 0; i < pool; ++i)
        g.split[ids[i]] = i < pool - n_val ? SplitTag::train : SplitTag::val;
    return g;
}

CsrMatrix normalize_adjacency(const Graph& g) {
    const std::size_t n = g.n();
    if (n == 0) throw std::invalid_argument("graph: normalize of an empty graph");
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    entries.reserve(g.adjacency.pattern->nnz() + n);
    for (std::size_t i = 0; i < n; ++i) {
        entries.emplace_back(i, i);
        for (std::size_t j : g.adjacency.pattern->row(i)) entries.emplace_back(i, j);
    }
    auto pattern = make_pattern(n, n, entries);
    std::vector<double> rsq(n);
    for (std::size_t i = 0; i < n; ++i)
        rsq[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    std::vector<double> values(pattern->nnz());
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = pattern->row(i);
        for (std::size_t p = 0; p < row.size(); ++p)
            values[pattern->offsets[i] + p] = rsq[i] * rsq[row[p]];
    }
    return {pattern, std::move(values)};
}

PerturbedStructure build_perturbed_structure(const Graph& g,
                                             const std::vector<std::size_t>& candidates) {
    const std::size_t n = g.n();
    if (candidates.empty()) throw std::invalid_argument("graph: empty candidate set");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] >= n) throw std::out_of_range("graph: candidate id exceeds n");
        if (i > 0 && candidates[i] <= candidates[i - 1])
            throw std::invalid_argument("graph: candidates must be strictly ascending");
    }

    std::vector<std::pair<std::size_t, std::size_t>> entries;
    entries.reserve(g.adjacency.pattern->nnz() + n + 1 + 2 * candidates.size());
    for (std::size_t i = 0; i <= n; ++i) entries.emplace_back(i, i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : g.adjacency.pattern->row(i)) entries.emplace_back(i, j);
    for (std::size_t c : candidates) {
        entries.emplace_back(n, c);
        entries.emplace_back(c, n);
    }

    PerturbedStructure ps;
    ps.pattern = make_pattern(n + 1, n + 1, entries);
    ps.candidates = candidates;
    const std::size_t nnz = ps.pattern->nnz();
    ps.values_template.assign(nnz, 1.0);
    ps.entry_rows.resize(nnz);
    ps.entry_cols.resize(nnz);
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t p = ps.pattern->offsets[i]; p < ps.pattern->offsets[i + 1]; ++p) {
            ps.entry_rows[p] = i;
            ps.entry_cols[p] = ps.pattern->indices[p];
        }
    }

    std::vector<std::size_t> weight_of(n, candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) weight_of[candidates[j]] = j;
    for (std::size_t p = 0; p < nnz; ++p) {
        const std::size_t r = ps.entry_rows[p], c = ps.entry_cols[p];
        if (r == c) continue;
        if (r == n || c == n) {
            const std::size_t j = weight_of[r == n ? c : r];
            ps.values_template[p] = 0.0;
            ps.injected_slots.emplace_back(p, j);
        }
    }

    ps.degree_plus1.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) ps.degree_plus1[i] = static_cast<double>(g.degree(i) + 1);
    ps.degree_plus1[n] = 1.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        ps.degree_updates.emplace_back(candidates[j], j);
        ps.degree_updates.emplace_back(n, j);
    }
    return ps;
}

CsrMatrix normalize_adjacency(const PerturbedStructure& ps,
                              const std::vector<double>& edge_weights) {
    if (edge_weights.size() != ps.candidates.size())
        throw std::invalid_argument("graph: weight count differs from candidate count");
    std::vector<double> deg = ps.degree_plus1;
    for (const auto& [node, j] : ps.degree_updates) deg[node] += edge_weights[j];
    std::vector<double> rsq(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i) rsq[i] = 1.0 / std::sqrt(deg[i]);

    std::vector<double> values = ps.values_template;
    for (const auto& [p, j] : ps.injected_slots) values[p] += edge_weights[j];
    for (std::size_t p = 0; p < values.size(); ++p)
        values[p] *= rsq[ps.entry_rows[p]] * rsq[ps.entry_cols[p]];
    return {ps.pattern, std::move(values)};
}

CsrMatrix normalize_adjacency(const PerturbedView& view) {
    const auto ps = build_perturbed_structure(*view.base, view.plan.candidates);
    return normalize_adjacency(ps, view.plan.edge_weights);
}

std::vector<std::size_t> candidate_set(const Graph& g, const std::vector<std::size_t>& targets) {
    if (targets.empty()) throw std::invalid_argument("graph: empty target set");
    std::vector<std::size_t> out;
    for (std::size_t t : targets) {
        if (t >= g.n()) throw std::out_of_range("graph: target id exceeds n");
        out.push_back(t);
        const auto row = g.adjacency.pattern->row(t);
        out.insert(out.end(), row.begin(), row.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

AttributeBounds attribute_bounds(const Graph& g) {
    AttributeBounds b;
    const std::size_t d = g.dim();
    b.lo.assign(d, 0.0);
    b.hi.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = g.attributes.at(0, j), hi = lo;
        for (std::size_t i = 1; i < g.n(); ++i) {
            lo = std::min(lo, g.attributes.at(i, j));
            hi = std::max(hi, g.attributes.at(i, j));
        }
        b.lo[j] = lo;
        b.hi[j] = hi;
    }
    if (g.attr_kind == AttrKind::discrete) {
        double total = 0.0;
        for (std::size_t i = 0; i < g.n(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                if (g.attributes.at(i, j) != 0.0) total += 1.0;
        const auto mean = static_cast<std::size_t>(
            std::llround(total / static_cast<double>(g.n())));
        b.l0_budget = std::max<std::size_t>(1, mean);
    }
    return b;
}

void validate_plan_structure(const Graph& g, const InjectionPlan& plan) {
    if (plan.candidates.empty()) throw std::invalid_argument("plan: empty candidate set");
    for (std::size_t i = 0; i < plan.candidates.size(); ++i) {
        if (plan.candidates[i] >= g.n()) throw std::out_of_range("plan: candidate id exceeds n");
        if (i > 0 && plan.candidates[i] <= plan.candidates[i - 1])
            throw std::invalid_argument("plan: candidates must be strictly ascending");
    }
    if (plan.edge_weights.size() != plan.candidates.size())
        throw std::invalid_argument("plan: one weight per candidate required");
    if (plan.attrs.size() != g.dim())
        throw std::invalid_argument("plan: attribute length differs from graph dimension");
    if (plan.delta == 0) throw std::invalid_argument("plan: edge budget must be positive");
    for (double w : plan.edge_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("plan: negative or NaN edge weight");
        if (plan.hardened && w != 0.0 && w != 1.0)
            throw std::invalid_argument("plan: hardened weights must be 0 or 1");
    }
    if (plan.hardened) {
        std::size_t ones = 0;
        for (double w : plan.edge_weights) ones += w == 1.0;
        const std::size_t want = std::min(plan.delta, plan.candidates.size());
        if (ones != want)
            throw std::invalid_argument("plan: hardened plan must place exactly min(delta, m) edges");
    }
}

void validate_plan(const Graph& g, const AttributeBounds& bounds, const InjectionPlan& plan) {
    validate_plan_structure(g, plan);
    constexpr double slack = 1e-9;
    if (g.attr_kind == AttrKind::continuous) {
        for (std::size_t j = 0; j < plan.attrs.size(); ++j)
            if (plan.attrs[j] < bounds.lo[j] - slack || plan.attrs[j] > bounds.hi[j] + slack)
                throw std::invalid_argument("plan: attribute outside [lo, hi]");
    } else if (plan.hardened) {
        std::size_t ones = 0;
        for (double a : plan.attrs) {
            if (a != 0.0 && a != 1.0)
                throw std::invalid_argument("plan: discrete attributes must be 0 or 1");
            ones += a == 1.0;
        }
        if (ones > bounds.l0_budget)
            throw std::invalid_argument("plan: attribute nonzeros exceed the l0 budget");
    }
}

PerturbedView inject_node(const Graph& g, InjectionPlan plan) {
    validate_plan_structure(g, plan);
    return {&g, std::move(plan)};
}

std::uint64_t graph_checksum(const Graph& g) {
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
    mix(g.n());
    mix(g.dim());
    mix(static_cast<std::uint64_t>(g.num_classes));
    mix(g.attr_kind == AttrKind::continuous ? 0 : 1);
    for (std::size_t i = 0; i < g.n(); ++i) {
        const auto row = g.adjacency.pattern->row(i);
        mix(row.size());
        for (std::size_t j : row) mix(j);
    }
    for (double v : g.attributes.data()) mix_f64(v);
    for (int y : g.labels) mix(static_cast<std::uint64_t>(y));
    mix(g.split.size());
    for (SplitTag t : g.split) mix(static_cast<std::uint64_t>(t));
    return h;
}

}  // namespace nia
