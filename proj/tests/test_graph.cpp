#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "nia/graph.hpp"
#include "nia/sbm.hpp"

using namespace nia;

namespace {

// path graph 0-1-2-3 plus an isolated pair 4-5, mixed labels
Graph toy_graph() {
    Graph g;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    auto link = [&](std::size_t a, std::size_t b) {
        entries.emplace_back(a, b);
        entries.emplace_back(b, a);
    };
    link(0, 1);
    link(1, 2);
    link(2, 3);
    link(4, 5);
    g.adjacency.pattern = make_pattern(6, 6, entries);
    g.adjacency.values.assign(g.adjacency.pattern->nnz(), 1.0);
    g.attributes = ad::Tensor::from(6, 2, {0.1, 0.9, 0.4, 0.3, 0.8, 0.2, 0.5, 0.5, 0.7, 0.1, 0.0, 1.0});
    g.labels = {0, 1, 0, 1, 0, 1};
    g.num_classes = 2;
    return g;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("nia_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("graph text round trip preserves everything") {
    TempDir dir;
    Graph g = toy_graph();
    write_graph(g, dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"));
    const Graph h =
        load_graph(dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"), g.attr_kind);
    CHECK(h.n() == g.n());
    CHECK(h.dim() == g.dim());
    CHECK(h.num_classes == g.num_classes);
    CHECK(h.labels == g.labels);
    CHECK(h.adjacency.pattern->indices == g.adjacency.pattern->indices);
    CHECK(h.attributes.data() == g.attributes.data());
    CHECK(graph_checksum(h) == graph_checksum(g));
}

TEST_CASE("load_graph symmetrizes, drops self loops and validates") {
    TempDir dir;
    {
        std::ofstream e(dir.file("g.edges"));
        e << "0\t1\n1\t1\n1\t0\n2\t0\n";  // duplicate direction + self loop
        std::ofstream a(dir.file("g.attrs"));
        a << "3 2 disc\n1 0\n0 1\n1 1\n";
        std::ofstream l(dir.file("g.labels"));
        l << "0\n1\n0\n";
    }
    const Graph g = load_graph(dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"),
                               AttrKind::discrete);
    CHECK(g.n() == 3);
    CHECK(g.degree(0) == 2);
    CHECK(g.degree(1) == 1);
    CHECK(g.degree(2) == 1);
    CHECK(g.attr_kind == AttrKind::discrete);

    // header says disc but the loader was told to expect cont
    CHECK_THROWS(load_graph(dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"),
                            AttrKind::continuous));

    // discrete attributes must be 0/1
    {
        std::ofstream a(dir.file("g.attrs"));
        a << "3 2 disc\n1 0\n0 0.5\n1 1\n";
    }
    CHECK_THROWS(load_graph(dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"),
                            AttrKind::discrete));

    // out of range endpoint
    {
        std::ofstream a(dir.file("g.attrs"));
        a << "3 2 disc\n1 0\n0 1\n1 1\n";
        std::ofstream e(dir.file("g.edges"));
        e << "0\t7\n";
    }
    CHECK_THROWS(load_graph(dir.file("g.edges"), dir.file("g.attrs"), dir.file("g.labels"),
                            AttrKind::discrete));
}

TEST_CASE("largest_connected_component keeps the bigger part and relabels") {
    const Graph g = toy_graph();
    const Graph lcc = largest_connected_component(g);
    CHECK(lcc.n() == 4);
    CHECK(lcc.labels == std::vector<int>{0, 1, 0, 1});
    CHECK(lcc.degree(0) == 1);
    CHECK(lcc.degree(1) == 2);
    // attributes follow their nodes
    CHECK(lcc.attributes.at(3, 0) == doctest::Approx(0.5));
}

TEST_CASE("split sizes follow the 64/16/20 rule") {
    for (const std::size_t n : {10, 100, 237}) {
        SbmConfig cfg;
        cfg.nodes = n;
        cfg.seed = 3;
        Graph g = split_nodes(make_sbm(cfg), 17);
        const auto train = g.nodes_with(SplitTag::train);
        const auto val = g.nodes_with(SplitTag::val);
        const auto test = g.nodes_with(SplitTag::test);
        const auto pool = static_cast<std::size_t>(std::llround(0.8 * double(n)));
        const auto n_val = static_cast<std::size_t>(std::llround(0.2 * double(pool)));
        CHECK(train.size() == pool - n_val);
        CHECK(val.size() == n_val);
        CHECK(test.size() == n - pool);
        CHECK(train.size() + val.size() + test.size() == n);

        // same seed, same assignment
        Graph g2 = split_nodes(make_sbm(cfg), 17);
        CHECK(g2.split == g.split);
        // different seed, (almost surely) different assignment
        Graph g3 = split_nodes(make_sbm(cfg), 18);
        CHECK(g3.split != g.split);
    }
}

TEST_CASE("normalize_adjacency hand values") {
    // two nodes, one edge: deg+1 = 2 each, off-diagonal 1/2, diagonal 1/2
    Graph g;
    g.adjacency.pattern = make_pattern(2, 2, {{0, 1}, {1, 0}});
    g.adjacency.values = {1.0, 1.0};
    g.attributes = ad::Tensor::zeros(2, 1);
    g.labels = {0, 0};
    g.num_classes = 1;
    const CsrMatrix a = normalize_adjacency(g);
    // rows hold {diag, neighbor} sorted by column
    for (const double v : a.values) CHECK(v == doctest::Approx(0.5));

    // star 0-1, 0-2: center degree 3, leaves 2; edge weight 1/sqrt(6)
    Graph s;
    s.adjacency.pattern = make_pattern(3, 3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
    s.adjacency.values.assign(4, 1.0);
    s.attributes = ad::Tensor::zeros(3, 1);
    s.labels = {0, 0, 0};
    s.num_classes = 1;
    const CsrMatrix b = normalize_adjacency(s);
    const auto row0 = b.pattern->row(0);
    REQUIRE(row0.size() == 3);
    // row 0 columns are 0,1,2: diag 1/3 then two edges 1/sqrt(6)
    CHECK(b.values[0] == doctest::Approx(1.0 / 3.0));
    CHECK(b.values[1] == doctest::Approx(1.0 / std::sqrt(6.0)));
    CHECK(b.values[2] == doctest::Approx(1.0 / std::sqrt(6.0)));
}

TEST_CASE("soft-edge normalization with 0/1 weights matches an explicit rebuild") {
    SbmConfig cfg;
    cfg.nodes = 30;
    cfg.seed = 5;
    const Graph g = make_sbm(cfg);
    const std::vector<std::size_t> targets{3, 7};
    const auto cands = candidate_set(g, targets);
    const auto ps = build_perturbed_structure(g, cands);

    std::vector<double> w(cands.size(), 0.0);
    w[0] = 1.0;
    REQUIRE(w.size() > 2);
    w[2] = 1.0;
    const CsrMatrix soft = normalize_adjacency(ps, w);

    // independently: materialize the (n+1)-node graph with the two picked
    // edges as ordinary edges, then run the clean-graph normalization
    Graph big;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    const auto& pat = *g.adjacency.pattern;
    for (std::size_t i = 0; i < g.n(); ++i)
        for (const auto j : pat.row(i)) entries.emplace_back(i, j);
    for (const auto c : {cands[0], cands[2]}) {
        entries.emplace_back(g.n(), c);
        entries.emplace_back(c, g.n());
    }
    big.adjacency.pattern = make_pattern(g.n() + 1, g.n() + 1, entries);
    big.adjacency.values.assign(big.adjacency.pattern->nnz(), 1.0);
    big.attributes = ad::Tensor::zeros(g.n() + 1, 1);
    big.labels.assign(g.n() + 1, 0);
    big.num_classes = 1;
    const CsrMatrix hard = normalize_adjacency(big);

    const std::size_t n1 = g.n() + 1;
    std::vector<double> ds(n1 * n1, 0.0), dh(n1 * n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        const auto rs = soft.pattern->row(i);
        for (std::size_t p = 0; p < rs.size(); ++p)
            ds[i * n1 + rs[p]] = soft.values[soft.pattern->offsets[i] + p];
        const auto rh = hard.pattern->row(i);
        for (std::size_t p = 0; p < rh.size(); ++p)
            dh[i * n1 + rh[p]] = hard.values[hard.pattern->offsets[i] + p];
    }
    for (std::size_t i = 0; i < n1 * n1; ++i) CHECK(ds[i] == doctest::Approx(dh[i]).epsilon(1e-12));
}

TEST_CASE("candidate_set is the sorted union of targets and their neighbors") {
    const Graph g = toy_graph();
    const auto c = candidate_set(g, {1});
    CHECK(c == std::vector<std::size_t>{0, 1, 2});
    const auto c2 = candidate_set(g, {1, 4});
    CHECK(c2 == std::vector<std::size_t>{0, 1, 2, 4, 5});
}

TEST_CASE("attribute_bounds: box for continuous, l0 budget for discrete") {
    Graph g = toy_graph();
    const auto b = attribute_bounds(g);
    CHECK(b.lo == std::vector<double>{0.0, 0.1});
    CHECK(b.hi == std::vector<double>{0.8, 1.0});
    CHECK(b.l0_budget == 0);

    Graph d = toy_graph();
    d.attr_kind = AttrKind::discrete;
    d.attributes = ad::Tensor::from(6, 3, {1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0, 1, 0, 1});
    // nonzero counts: 1,2,0,3,1,2 -> mean 1.5 -> rounds to 2
    const auto bd = attribute_bounds(d);
    CHECK(bd.l0_budget == 2);

    // budget never drops below one
    Graph z = toy_graph();
    z.attr_kind = AttrKind::discrete;
    z.attributes = ad::Tensor::zeros(6, 3);
    CHECK(attribute_bounds(z).l0_budget == 1);
}

TEST_CASE("plan validation rejects structural and budget violations") {
    const Graph g = toy_graph();
    const auto bounds = attribute_bounds(g);
    InjectionPlan ok;
    ok.candidates = {0, 1, 2};
    ok.edge_weights = {1.0, 0.0, 0.0};
    ok.attrs = {0.3, 0.6};
    ok.delta = 1;
    ok.hardened = true;
    CHECK_NOTHROW(validate_plan(g, bounds, ok));

    auto bad = ok;
    bad.candidates = {2, 1, 0};  // not ascending
    CHECK_THROWS(validate_plan_structure(g, bad));

    bad = ok;
    bad.edge_weights = {1.0, 1.0, 0.0};  // two edges but delta 1
    CHECK_THROWS(validate_plan_structure(g, bad));

    bad = ok;
    bad.edge_weights = {0.7, 0.0, 0.0};  // hardened plans need 0/1 weights
    CHECK_THROWS(validate_plan_structure(g, bad));

    bad = ok;
    bad.attrs = {0.3, 1.6};  // above hi
    CHECK_THROWS(validate_plan(g, bounds, bad));

    bad = ok;
    bad.candidates = {0, 1, 9};  // unknown node
    CHECK_THROWS(validate_plan_structure(g, bad));

    // discrete: l0 budget enforced
    Graph d = toy_graph();
    d.attr_kind = AttrKind::discrete;
    d.attributes = ad::Tensor::from(6, 2, {1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1});
    const auto bd = attribute_bounds(d);
    REQUIRE(bd.l0_budget == 1);
    InjectionPlan p = ok;
    p.attrs = {1.0, 1.0};
    CHECK_THROWS(validate_plan(d, bd, p));
    p.attrs = {0.0, 1.0};
    CHECK_NOTHROW(validate_plan(d, bd, p));
}

TEST_CASE("checksum is order-sensitive and injection never mutates the base") {
    const Graph g = toy_graph();
    const auto before = graph_checksum(g);

    InjectionPlan plan;
    plan.candidates = {0, 1, 2};
    plan.edge_weights = {1.0, 0.0, 0.0};
    plan.attrs = {0.3, 0.6};
    plan.hardened = true;
    const auto view = inject_node(g, plan);
    CHECK(view.n() == g.n() + 1);
    CHECK(graph_checksum(g) == before);

    Graph h = toy_graph();
    h.labels[0] = 1;
    CHECK(graph_checksum(h) != before);

    Graph a = toy_graph();
    a.attributes.at(2, 1) += 1e-9;
    CHECK(graph_checksum(a) != before);
}

TEST_CASE("avg_degree counts undirected edges twice over n") {
    const Graph g = toy_graph();
    // 4 undirected edges, 6 nodes: 8/6
    CHECK(g.avg_degree() == doctest::Approx(8.0 / 6.0));
}
