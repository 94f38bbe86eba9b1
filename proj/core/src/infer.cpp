#include "fobn/infer.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include <gmpxx.h>

#include "fobn/errors.hpp"

namespace fobn {

void EventSpec::require(AtomId atom, bool value) {
  for (auto& [a, v] : assignments_) {
    if (a != atom) continue;
    if (v != value)
      throw DomainError("event assigns atom " + std::to_string(atom) +
                        " both true and false");
    return;
  }
  assignments_.emplace_back(atom, value);
}

// --- completion ------------------------------------------------------------

std::vector<std::uint8_t> complete_values(
    const GroundedNetwork& network, const std::vector<std::uint8_t>& root_bits) {
  if (root_bits.size() != network.root_atoms().size())
    throw DomainError("root assignment must cover exactly the root atoms");
  std::vector<std::uint8_t> values(network.atom_count(), 0);
  for (std::size_t i = 0; i < root_bits.size(); ++i)
    values[network.root_atoms()[i]] = root_bits[i] ? 1 : 0;
  for (AtomId id : network.defined_topo())
    values[id] = network.pool().eval2(network.definition(id), values) ? 1 : 0;
  return values;
}

Interpretation complete_from_roots(const GroundedNetwork& network,
                                   const std::vector<std::uint8_t>& root_bits) {
  std::vector<std::uint8_t> values = complete_values(network, root_bits);
  Interpretation interp(network.spec().vocabulary, network.domain());
  for (AtomId id = 0; id < network.atom_count(); ++id) {
    GroundAtom a = network.atom(id);
    interp.set(a.pred, a.tuple, values[id] != 0);
  }
  return interp;
}

// --- engine ------------------------------------------------------------------

namespace {

struct Watch {
  std::int32_t node;
  bool required;
};

// Pruned backtracking over the roots a query depends on. Roots outside the
// event's support contribute a factor alpha + (1 - alpha) = 1 and are
// skipped; the result is exactly the full enumeration sum.
class Engine {
public:
  Engine(const GroundedNetwork& net, const EventSpec& event,
         const EngineOptions& opts)
      : net_(net), opts_(opts) {
    const auto& roots = net.root_atoms();
    root_index_.assign(net.atom_count(), -1);
    for (std::size_t i = 0; i < roots.size(); ++i)
      root_index_[roots[i]] = static_cast<int>(i);
    forced_.assign(roots.size(), -1);

    pool_ = &net.pool();
    std::vector<std::int32_t> watch_nodes;
    for (const auto& [atom, value] : event.assignments()) {
      if (atom < 0 || atom >= net.atom_count())
        throw DomainError("event atom outside the network");
      if (net.is_root(atom)) {
        int idx = root_index_[atom];
        if (forced_[idx] != -1 && forced_[idx] != (value ? 1 : 0))
          throw DomainError("event assigns a root both true and false");
        forced_[idx] = value ? 1 : 0;
        continue;
      }
      std::int32_t node = inline_defined(net.definition(atom));
      if (value) {
        flatten_conjuncts(node, watch_nodes);
        for (std::int32_t c : watch_nodes) watches_.push_back({c, true});
        watch_nodes.clear();
      } else {
        watches_.push_back({node, false});
      }
    }

    // Atom support per watch, as root indices.
    touch_.assign(net.root_atoms().size(), {});
    std::vector<AtomId> atoms;
    for (std::size_t w = 0; w < watches_.size(); ++w) {
      atoms.clear();
      pool().collect_atoms(watches_[w].node, atoms);
      std::sort(atoms.begin(), atoms.end());
      atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
      for (AtomId a : atoms) {
        // Inlining replaced every defined atom by its root expansion.
        touch_[root_index_[a]].push_back(static_cast<int>(w));
      }
    }

    for (std::size_t i = 0; i < roots.size(); ++i)
      if (forced_[i] != -1 || !touch_[i].empty())
        relevant_.push_back(static_cast<int>(i));

    if (relevant_.size() > opts_.max_roots)
      throw ResourceCapError(
          "query depends on " + std::to_string(relevant_.size()) +
          " roots, above the cap of " + std::to_string(opts_.max_roots) +
          " (raise --cap to override)");

    uniform_half_ = true;
    for (int i : relevant_)
      if (!(net.alpha(roots[i]) == Rational(1, 2))) {
        uniform_half_ = false;
        break;
      }
  }

  Rational run() {
    int jobs = std::max(1, opts_.jobs);
    int prefix = 0;
    if (jobs > 1) {
      while ((1 << prefix) < 4 * jobs &&
             prefix < static_cast<int>(branchable_count()) && prefix < 12)
        ++prefix;
    }
    std::vector<Task> tasks = make_tasks(prefix);

    if (jobs <= 1 || tasks.size() <= 1) {
      Total total;
      for (const Task& t : tasks) run_task(t, total);
      return finish(total);
    }

    std::atomic<std::size_t> next{0};
    std::vector<Total> results(tasks.size());
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&, j] {
        try {
          for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            run_task(tasks[i], results[i]);
          }
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    // Deterministic reduction in task order.
    Total total;
    for (const Total& r : results) {
      total.count += r.count;
      total.weight += r.weight;
    }
    return finish(total);
  }

private:
  struct Total {
    mpz_class count = 0;   // uniform-half fast path
    Rational weight;       // general path
  };

  struct Task {
    std::vector<std::pair<int, std::uint8_t>> prefix;  // (relevant idx, value)
  };

  const GroundPool& pool() const { return *pool_; }

  std::size_t branchable_count() const {
    std::size_t c = 0;
    for (int i : relevant_)
      if (forced_[i] == -1) ++c;
    return c;
  }

  std::vector<Task> make_tasks(int prefix_bits) {
    std::vector<int> prefix_roots;
    for (int i : relevant_) {
      if (static_cast<int>(prefix_roots.size()) >= prefix_bits) break;
      if (forced_[i] == -1) prefix_roots.push_back(i);
    }
    std::vector<Task> tasks;
    std::size_t combos = std::size_t(1) << prefix_roots.size();
    tasks.reserve(combos);
    for (std::size_t mask = 0; mask < combos; ++mask) {
      Task t;
      for (std::size_t b = 0; b < prefix_roots.size(); ++b)
        t.prefix.emplace_back(prefix_roots[b],
                              static_cast<std::uint8_t>((mask >> b) & 1));
      tasks.push_back(std::move(t));
    }
    return tasks;
  }

  // One backtracking pass; `task.prefix` pins values of selected roots.
  void run_task(const Task& task, Total& out) const {
    State st;
    st.values.assign(net_.atom_count(), 2);
    st.determined.assign(watches_.size(), 0);
    st.pinned.assign(net_.root_atoms().size(), -1);
    for (auto [idx, v] : task.prefix) st.pinned[idx] = v;
    st.out = &out;

    // Watches with no unassigned atoms (constant formulas) decide now.
    for (std::size_t w = 0; w < watches_.size(); ++w) {
      Tristate t = pool().eval3(watches_[w].node, st.values);
      if (t == Tristate::Unassigned) continue;
      if ((t == Tristate::True) != watches_[w].required) return;
      st.determined[w] = 1;
    }
    descend(st, 0, Rational::one());
  }

  struct State {
    std::vector<std::uint8_t> values;
    std::vector<std::uint8_t> determined;
    std::vector<std::int8_t> pinned;
    std::uint64_t nodes = 0;
    Total* out = nullptr;
  };

  void descend(State& st, std::size_t depth, Rational weight) const {
    if (++st.nodes > opts_.max_search_nodes)
      throw ResourceCapError("inference search exceeded the node cap");
    if (depth == relevant_.size()) {
      // All watch atoms are assigned here; anything undetermined decides.
      for (std::size_t w = 0; w < watches_.size(); ++w) {
        if (st.determined[w]) continue;
        bool value = pool().eval2(watches_[w].node, st.values);
        if (value != watches_[w].required) return;
      }
      if (uniform_half_)
        st.out->count += 1;
      else
        st.out->weight += weight;
      return;
    }

    int ridx = relevant_[depth];
    AtomId atom = net_.root_atoms()[ridx];
    for (std::uint8_t v = 0; v <= 1; ++v) {
      if (forced_[ridx] != -1 && forced_[ridx] != v) continue;
      if (st.pinned[ridx] != -1 && st.pinned[ridx] != v) continue;
      st.values[atom] = v;
      std::vector<int> newly;
      bool pruned = false;
      for (int w : touch_[ridx]) {
        if (st.determined[w]) continue;
        Tristate t = pool().eval3(watches_[w].node, st.values);
        if (t == Tristate::Unassigned) continue;
        if ((t == Tristate::True) != watches_[w].required) {
          pruned = true;
          break;
        }
        st.determined[w] = 1;
        newly.push_back(w);
      }
      if (!pruned) {
        Rational w2 = weight;
        if (!uniform_half_) {
          const Rational& a = net_.alpha(atom);
          w2 *= v ? a : Rational::one() - a;
        }
        descend(st, depth + 1, std::move(w2));
      }
      for (int w : newly) st.determined[w] = 0;
      st.values[atom] = 2;
    }
  }

  Rational finish(const Total& total) const {
    if (uniform_half_) {
      if (total.count == 0) return Rational::zero();
      Rational w = half_power(static_cast<unsigned>(relevant_.size()));
      return Rational::parse(total.count.get_str()) * w;
    }
    return total.weight;
  }

  // Replaces defined-atom leaves by their (recursively inlined)
  // definitions so watches depend on roots only.
  std::int32_t inline_defined(std::int32_t node) {
    if (!has_defined(node)) return node;
    if (pool_ == &net_.pool()) {
      own_pool_ = net_.pool();  // copy-on-first-need
      pool_ = &own_pool_;
    }
    return rewrite(node);
  }

  bool has_defined(std::int32_t node) const {
    const auto& nd = net_.pool()[node];
    switch (nd.op) {
      case GroundPool::Op::True:
      case GroundPool::Op::False:
        return false;
      case GroundPool::Op::Atom:
        return !net_.is_root(nd.a);
      case GroundPool::Op::Not:
        return has_defined(nd.a);
      default:
        return has_defined(nd.a) || has_defined(nd.b);
    }
  }

  std::int32_t rewrite(std::int32_t node) {
    const auto nd = own_pool_[node];
    switch (nd.op) {
      case GroundPool::Op::True:
      case GroundPool::Op::False:
        return node;
      case GroundPool::Op::Atom: {
        if (net_.is_root(nd.a)) return node;
        auto it = inline_memo_.find(nd.a);
        if (it != inline_memo_.end()) return it->second;
        std::int32_t expansion = rewrite(net_.definition(nd.a));
        inline_memo_.emplace(nd.a, expansion);
        return expansion;
      }
      case GroundPool::Op::Not: {
        std::int32_t a = rewrite(nd.a);
        if (a == nd.a) return node;
        return own_pool_.add(GroundPool::Op::Not, a);
      }
      default: {
        std::int32_t a = rewrite(nd.a);
        std::int32_t b = rewrite(nd.b);
        if (a == nd.a && b == nd.b) return node;
        return own_pool_.add(nd.op, a, b);
      }
    }
  }

  const GroundedNetwork& net_;
  EngineOptions opts_;
  const GroundPool* pool_ = nullptr;
  GroundPool own_pool_;
  std::map<AtomId, std::int32_t> inline_memo_;
  std::vector<Watch> watches_;
  std::vector<int> root_index_;
  std::vector<std::int8_t> forced_;
  std::vector<std::vector<int>> touch_;
  std::vector<int> relevant_;
  bool uniform_half_ = false;

  void flatten_conjuncts(std::int32_t node, std::vector<std::int32_t>& out) {
    const auto& nd = pool()[node];
    if (nd.op == GroundPool::Op::And) {
      flatten_conjuncts(nd.a, out);
      flatten_conjuncts(nd.b, out);
    } else {
      out.push_back(node);
    }
  }
};

} // namespace

Rational event_probability(const GroundedNetwork& network,
                           const EventSpec& event,
                           const EngineOptions& options) {
  Engine engine(network, event, options);
  return engine.run();
}

std::optional<Rational> conditional_probability(const GroundedNetwork& network,
                                                const EventSpec& target,
                                                const EventSpec& given,
                                                const EngineOptions& options) {
  EventSpec joint = given;
  for (const auto& [atom, value] : target.assignments())
    joint.require(atom, value);  // throws on contradictory overlap
  Rational den = event_probability(network, given, options);
  if (den == Rational::zero()) return std::nullopt;
  Rational num = event_probability(network, joint, options);
  return num / den;
}

// --- acceptance ------------------------------------------------------------

AcceptanceDecision decide_acceptance(const GroundedNetwork& network,
                                     const AcceptanceQuery& query,
                                     const EvidencePiece& evidence,
                                     const EngineOptions& options) {
  const NetworkSpec& spec = network.spec();
  if (evidence.domain().size != network.domain().size)
    throw DomainError("evidence domain does not match the query domain");

  // Map evidence predicates (by name) into the spec; they must be sigma.
  std::vector<PredId> to_spec(evidence.vocab().size(), -1);
  for (PredId p = 0; p < evidence.vocab().size(); ++p) {
    const Predicate& pred = evidence.vocab()[p];
    auto id = spec.vocabulary.find(pred.name);
    if (!id || spec.vocabulary[*id].arity != pred.arity)
      throw DomainError("evidence predicate '" + pred.name +
                        "' is not part of the specification");
    if (std::find(spec.sigma.begin(), spec.sigma.end(), *id) ==
        spec.sigma.end())
      throw DomainError("evidence predicate '" + pred.name +
                        "' is outside the input vocabulary");
    to_spec[p] = *id;
  }

  bool contradictory = false;
  EventSpec given;
  auto add_or_flag = [&](AtomId atom, bool value) {
    if (contradictory) return;
    try {
      given.require(atom, value);
    } catch (const DomainError&) {
      contradictory = true;
    }
  };

  for (PredId b : query.conditioning) {
    std::uint64_t count = int_pow(network.domain().size,
                                  spec.vocabulary[b].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      add_or_flag(network.atom_id(b, tuple_unrank(r, network.domain().size,
                                                  spec.vocabulary[b].arity)),
                  true);
  }
  for (PredId p = 0; p < evidence.vocab().size(); ++p) {
    std::uint64_t count = evidence.groundings(p);
    for (std::uint64_t r = 0; r < count; ++r) {
      Tristate t = evidence.get(p, r);
      if (t == Tristate::Unassigned) continue;
      AtomId atom = static_cast<AtomId>(
          network.atom_id(to_spec[p],
                          tuple_unrank(r, network.domain().size,
                                       evidence.vocab()[p].arity)));
      add_or_flag(atom, t == Tristate::True);
    }
  }
  if (contradictory) return {AcceptanceDecision::Kind::Undefined, std::nullopt};

  Rational den = event_probability(network, given, options);
  if (den == Rational::zero())
    return {AcceptanceDecision::Kind::Undefined, std::nullopt};

  bool joint_contradiction = false;
  EventSpec joint = given;
  for (PredId a : query.conditioned) {
    std::uint64_t count = int_pow(network.domain().size,
                                  spec.vocabulary[a].arity);
    for (std::uint64_t r = 0; r < count; ++r) {
      if (joint_contradiction) break;
      try {
        joint.require(network.atom_id(a, tuple_unrank(r, network.domain().size,
                                                      spec.vocabulary[a].arity)),
                      true);
      } catch (const DomainError&) {
        joint_contradiction = true;
      }
    }
  }

  Rational num = joint_contradiction ? Rational::zero()
                                     : event_probability(network, joint,
                                                         options);
  Rational p = num / den;
  AcceptanceDecision out;
  out.kind = p > Rational(1, 2) ? AcceptanceDecision::Kind::Accept
                                : AcceptanceDecision::Kind::Reject;
  out.probability = p;
  return out;
}

AcceptanceDecision decide_acceptance(const NetworkSpec& spec,
                                     const AcceptanceQuery& query,
                                     const Domain& domain,
                                     const EvidencePiece& evidence,
                                     const EngineOptions& options) {
  GroundedNetwork network = ground(spec, domain);
  return decide_acceptance(network, query, evidence, options);
}

} // namespace fobn
