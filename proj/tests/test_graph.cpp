#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "doctest.h"
#include "mvembed/errors.hpp"
#include "mvembed/graph.hpp"

using namespace mvembed;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mvembed_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) {
    auto p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("load_graph builds a two-view graph") {
  TempDir dir;
  auto f1 = dir.file("v1.tsv", "0\t1\n1\t2\n");
  auto f2 = dir.file("v2.tsv", "0\t2\n");
  auto g = load_graph({f1, f2}, NodeMapPolicy::Strict);
  CHECK(g.num_nodes == 3);
  CHECK(g.edge_counts == std::vector<std::size_t>{2, 1});
  CHECK(g.has_edge(0, 0, 1));
  CHECK(g.has_edge(0, 1, 0));
  CHECK(g.has_edge(1, 0, 2));
  CHECK_FALSE(g.has_edge(1, 0, 1));
}

TEST_CASE("reversed duplicate collapses to one undirected edge") {
  TempDir dir;
  auto f = dir.file("v.tsv", "a\tb\nb\ta\n");
  auto g = load_graph({f}, NodeMapPolicy::DenseReindex);
  CHECK(g.num_nodes == 2);
  CHECK(g.edge_counts[0] == 1);
}

TEST_CASE("self-loop is dropped") {
  TempDir dir;
  auto f = dir.file("v.tsv", "x\tx\na\tb\n");
  auto g = load_graph({f}, NodeMapPolicy::DenseReindex);
  CHECK(g.edge_counts[0] == 1);
  CHECK(g.num_nodes == 3);  // x stays in the namespace with degree 0
  CHECK(g.degree(0, g.node_index.at("x")) == 0);
}

TEST_CASE("comment lines and extra columns are tolerated") {
  TempDir dir;
  auto f = dir.file("v.tsv", "# header\n0\t1\t0.7\n\n1\t2\n");
  auto g = load_graph({f}, NodeMapPolicy::Strict);
  CHECK(g.edge_counts[0] == 2);
}

TEST_CASE("strict mode rejects non-integer names") {
  TempDir dir;
  auto f = dir.file("v.tsv", "a\tb\n");
  CHECK_THROWS_AS(load_graph({f}, NodeMapPolicy::Strict), InputError);
}

TEST_CASE("missing file is fatal") {
  CHECK_THROWS_AS(load_graph({"/nonexistent/file.tsv"},
                             NodeMapPolicy::Strict),
                  InputError);
}

TEST_CASE("node namespace is the union over views") {
  TempDir dir;
  auto f1 = dir.file("v1.tsv", "a\tb\n");
  auto f2 = dir.file("v2.tsv", "c\td\n");
  auto g = load_graph({f1, f2}, NodeMapPolicy::DenseReindex);
  CHECK(g.num_nodes == 4);
  CHECK(g.degree(0, g.node_index.at("c")) == 0);
  CHECK(g.degree(1, g.node_index.at("c")) == 1);
}

TEST_CASE("write/reload round-trip preserves the graph") {
  TempDir dir;
  auto f1 = dir.file("v1.tsv", "a\tb\nb\tc\nc\ta\n");
  auto f2 = dir.file("v2.tsv", "a\tc\nd\tb\n");
  auto g = load_graph({f1, f2}, NodeMapPolicy::DenseReindex);

  std::vector<std::string> outs = {(dir.path / "o1.tsv").string(),
                                   (dir.path / "o2.tsv").string()};
  write_edge_lists(g, outs);
  auto g2 = load_graph(outs, NodeMapPolicy::DenseReindex);
  REQUIRE(g2.num_nodes == g.num_nodes);
  REQUIRE(g2.edge_counts == g.edge_counts);
  for (std::size_t v = 0; v < g.num_views(); ++v)
    for (NodeId i = 0; i < g.num_nodes; ++i) {
      NodeId i2 = g2.node_index.at(g.node_names[i]);
      std::vector<std::string> n1, n2;
      for (NodeId j : g.adjacency[v][i]) n1.push_back(g.node_names[j]);
      for (NodeId j : g2.adjacency[v][i2]) n2.push_back(g2.node_names[j]);
      std::sort(n1.begin(), n1.end());
      std::sort(n2.begin(), n2.end());
      CHECK(n1 == n2);
    }
}

TEST_CASE("degree sequence invariant under input line permutation") {
  TempDir dir;
  auto f1 = dir.file("a.tsv", "0\t1\n1\t2\n2\t3\n0\t3\n1\t3\n");
  auto f2 = dir.file("b.tsv", "1\t3\n0\t3\n2\t3\n1\t2\n0\t1\n");
  auto g1 = load_graph({f1}, NodeMapPolicy::Strict);
  auto g2 = load_graph({f2}, NodeMapPolicy::Strict);
  auto degrees = [](const MultiViewGraph& g) {
    std::vector<std::size_t> d;
    for (NodeId i = 0; i < g.num_nodes; ++i) d.push_back(g.degree(0, i));
    std::sort(d.begin(), d.end());
    return d;
  };
  CHECK(degrees(g1) == degrees(g2));
}

TEST_CASE("stratified folds: exact divisibility puts one item per class per fold") {
  std::vector<std::pair<NodeId, NodeId>> items;
  std::vector<int> classes;
  for (NodeId i = 0; i < 10; ++i) {
    items.push_back({i, i});
    classes.push_back(i < 5 ? 0 : 1);
  }
  auto ls = make_label_set(TaskKind::NodeClass, items, classes, 5, 7);
  for (int f = 0; f < 5; ++f) {
    int c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < ls.items.size(); ++i)
      if (ls.folds[i] == f) (ls.classes[i] == 0 ? c0 : c1)++;
    CHECK(c0 == 1);
    CHECK(c1 == 1);
  }
}

TEST_CASE("fold assignment is deterministic given seed") {
  std::vector<std::pair<NodeId, NodeId>> items;
  std::vector<int> classes;
  for (NodeId i = 0; i < 23; ++i) {
    items.push_back({i, i});
    classes.push_back(i % 3);
  }
  auto a = make_label_set(TaskKind::NodeClass, items, classes, 5, 99);
  auto b = make_label_set(TaskKind::NodeClass, items, classes, 5, 99);
  CHECK(a.folds == b.folds);
}

TEST_CASE("tiny class spreads over distinct folds round-robin") {
  std::vector<std::pair<NodeId, NodeId>> items = {{0, 0}, {1, 1}, {2, 2},
                                                  {3, 3}, {4, 4}, {5, 5},
                                                  {6, 6}, {7, 7}};
  std::vector<int> classes = {0, 0, 0, 1, 1, 1, 1, 1};
  auto ls = make_label_set(TaskKind::NodeClass, items, classes, 5, 3);
  std::set<int> folds_of_small;
  for (std::size_t i = 0; i < ls.items.size(); ++i)
    if (ls.classes[i] == 0) folds_of_small.insert(ls.folds[i]);
  CHECK(folds_of_small.size() == 3);
}

TEST_CASE("label file with unknown node is fatal") {
  TempDir dir;
  auto f = dir.file("v.tsv", "a\tb\n");
  auto g = load_graph({f}, NodeMapPolicy::DenseReindex);
  auto labels = dir.file("l.tsv", "a\t1\nzzz\t0\n");
  CHECK_THROWS_AS(load_labels(labels, TaskKind::NodeClass, g, 2, 1),
                  InputError);
}
