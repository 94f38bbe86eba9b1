#include <doctest.h>

#include <algorithm>
#include <set>

#include "fobn/errors.hpp"
#include "fobn/ground.hpp"
#include "fobn/infer.hpp"
#include "test_support.hpp"

using namespace fobn;
using fobn::testing::Rng;

namespace {

NetworkSpec friends_spec() {
  return parse_spec(testing::slurp(testing::data_path("friends.fobn")));
}

std::set<std::string> parent_names(const GroundedNetwork& net,
                                   const GroundAtom& atom) {
  std::set<std::string> out;
  for (const auto& p : node_parents(net, atom))
    out.insert(net.atom_name(net.atom_id(p.pred, p.tuple)));
  return out;
}

} // namespace

TEST_CASE("friendship network at domain size 3") {
  NetworkSpec spec = friends_spec();
  GroundedNetwork net = ground(spec, Domain(3));
  NetworkStats st = net.stats();
  CHECK(st.nodes == 21);
  CHECK(st.edges == 24);
  CHECK(st.roots == 12);

  PredId fan = *spec.vocabulary.find("fan");
  PredId friends = *spec.vocabulary.find("friends");

  // Off-diagonal pairs: both fans plus the dedicated reason.
  CHECK(parent_names(net, {friends, {0, 1}}) ==
        std::set<std::string>{"fan(0)", "fan(1)", "other(0,1)"});
  CHECK(parent_names(net, {friends, {2, 0}}) ==
        std::set<std::string>{"fan(2)", "fan(0)", "other(2,0)"});
  // Diagonal: the equality disjunct contributes no parent.
  CHECK(parent_names(net, {friends, {0, 0}}) ==
        std::set<std::string>{"fan(0)", "other(0,0)"});
  // Roots are parentless.
  CHECK(parent_names(net, {fan, {0}}).empty());

  CHECK_THROWS_AS(node_parents(net, {friends, {0, 7}}), DomainError);
  CHECK_THROWS_AS(node_parents(net, {friends, {0}}), DomainError);
}

TEST_CASE("friendship network at domain size 1") {
  GroundedNetwork net = ground(friends_spec(), Domain(1));
  NetworkStats st = net.stats();
  CHECK(st.nodes == 3);
  CHECK(st.edges == 2);
  CHECK(st.roots == 2);
  PredId friends = 1;
  CHECK(parent_names(net, {friends, {0, 0}}) ==
        std::set<std::string>{"fan(0)", "other(0,0)"});
}

TEST_CASE("single propositional root") {
  GroundedNetwork net = ground(parse_spec("root p/0 = 1/2."), Domain(1));
  NetworkStats st = net.stats();
  CHECK(st.nodes == 1);
  CHECK(st.edges == 0);
  CHECK(st.roots == 1);
}

TEST_CASE("node count equals the sum of grounding counts") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    NetworkSpec spec = testing::random_spec(rng);
    int n = testing::pick(rng, 1, 3);
    GroundedNetwork net = ground(spec, Domain(n));
    std::uint64_t expected = 0;
    for (const auto& p : spec.vocabulary.predicates())
      expected += int_pow(n, p.arity);
    CHECK(net.stats().nodes == expected);
  }
}

TEST_CASE("grounded definitions preserve the body semantics") {
  Rng rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    NetworkSpec spec = testing::random_spec(rng);
    int n = testing::pick(rng, 1, 3);
    GroundedNetwork net = ground(spec, Domain(n));

    // Random complete world over all atoms.
    std::vector<std::uint8_t> values(net.atom_count());
    Structure world(spec.vocabulary, Domain(n));
    for (AtomId id = 0; id < net.atom_count(); ++id) {
      values[id] = testing::pick(rng, 0, 1);
      GroundAtom a = net.atom(id);
      world.interp.set(a.pred, a.tuple, values[id] != 0);
    }

    for (const auto& d : spec.definitions) {
      std::uint64_t count = int_pow(n, spec.vocabulary[d.pred].arity);
      for (std::uint64_t j = 0; j < count; ++j) {
        std::vector<int> tuple =
            tuple_unrank(j, n, spec.vocabulary[d.pred].arity);
        Binding binding;
        for (std::size_t h = 0; h < d.head_vars.size(); ++h)
          binding[d.head_vars[h]] = tuple[h];
        AtomId id = net.atom_id(d.pred, tuple);
        CHECK(net.pool().eval2(net.definition(id), values) ==
              evaluate(d.body, world, binding));
      }
    }
  }
}

TEST_CASE("grounding is equivariant under domain permutations") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    NetworkSpec spec = testing::random_spec(rng);
    int n = testing::pick(rng, 2, 3);
    GroundedNetwork net = ground(spec, Domain(n));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    for (const auto& d : spec.definitions) {
      std::uint64_t count = int_pow(n, spec.vocabulary[d.pred].arity);
      for (std::uint64_t j = 0; j < count; ++j) {
        std::vector<int> tuple =
            tuple_unrank(j, n, spec.vocabulary[d.pred].arity);
        std::vector<int> image(tuple.size());
        for (std::size_t i = 0; i < tuple.size(); ++i)
          image[i] = perm[tuple[i]];

        // The parent set of the permuted atom is the permuted parent set.
        std::set<std::pair<PredId, std::vector<int>>> mapped;
        for (AtomId p : net.parents(net.atom_id(d.pred, tuple))) {
          GroundAtom a = net.atom(p);
          std::vector<int> t2(a.tuple.size());
          for (std::size_t i = 0; i < a.tuple.size(); ++i)
            t2[i] = perm[a.tuple[i]];
          mapped.insert({a.pred, t2});
        }
        std::set<std::pair<PredId, std::vector<int>>> direct;
        for (AtomId p : net.parents(net.atom_id(d.pred, image)))
          direct.insert({net.atom(p).pred, net.atom(p).tuple});
        CHECK(mapped == direct);
      }
    }

    // Alphas are shared per predicate, so relabeling keeps them equal.
    for (AtomId r : net.root_atoms()) {
      GroundAtom a = net.atom(r);
      std::vector<int> image(a.tuple.size());
      for (std::size_t i = 0; i < a.tuple.size(); ++i)
        image[i] = perm[a.tuple[i]];
      CHECK(net.alpha(r) == net.alpha(net.atom_id(a.pred, image)));
    }
  }
}

TEST_CASE("grounded graph is acyclic") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    NetworkSpec spec = testing::random_spec(rng);
    GroundedNetwork net = ground(spec, Domain(2));
    // Kahn over the atom-level graph.
    std::vector<int> indeg(net.atom_count(), 0);
    for (AtomId id = 0; id < net.atom_count(); ++id)
      indeg[id] = static_cast<int>(net.parents(id).size());
    std::vector<std::vector<AtomId>> children(net.atom_count());
    for (AtomId id = 0; id < net.atom_count(); ++id)
      for (AtomId p : net.parents(id)) children[p].push_back(id);
    std::vector<AtomId> queue;
    for (AtomId id = 0; id < net.atom_count(); ++id)
      if (indeg[id] == 0) queue.push_back(id);
    std::size_t seen = 0;
    while (!queue.empty()) {
      AtomId id = queue.back();
      queue.pop_back();
      ++seen;
      for (AtomId c : children[id])
        if (--indeg[c] == 0) queue.push_back(c);
    }
    CHECK(seen == static_cast<std::size_t>(net.atom_count()));
  }
}

TEST_CASE("grounding guards and validation") {
  NetworkSpec cyc = parse_spec("define p(x) <=> q(x). define q(x) <=> p(x).");
  CHECK_THROWS_AS(ground(cyc, Domain(2)), DomainError);
  NetworkSpec spec = friends_spec();
  CHECK_THROWS_AS(ground(spec, Domain(3), 10), ResourceCapError);
}

TEST_CASE("DOT export is stable and complete") {
  GroundedNetwork net = ground(friends_spec(), Domain(2));
  std::string dot = net.to_dot();
  CHECK(dot == net.to_dot());
  CHECK(dot.find("\"fan(0)\" -> \"friends(0,0)\";") != std::string::npos);
  CHECK(dot.find("\"other(0,1)\" -> \"friends(0,1)\";") != std::string::npos);
  CHECK(dot.find("\"fan(1)\" -> \"friends(0,0)\";") == std::string::npos);
  // One line per node and edge plus the braces.
  NetworkStats st = net.stats();
  std::size_t lines = std::count(dot.begin(), dot.end(), '\n');
  CHECK(lines == st.nodes + st.edges + 2);
}

TEST_CASE("DOT export matches the golden file") {
  GroundedNetwork net = ground(friends_spec(), Domain(2));
  CHECK(net.to_dot() == testing::slurp(testing::data_path("friends_n2.dot")));
}
