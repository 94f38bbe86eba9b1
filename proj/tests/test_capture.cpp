#include <doctest.h>

#include "fobn/capture.hpp"
#include "fobn/errors.hpp"
#include "fobn/ground.hpp"
#include "fobn/infer.hpp"
#include "test_support.hpp"

using namespace fobn;
using fobn::testing::Rng;

namespace {

NTMachine load_machine(const std::string& name) {
  return normalize_machine(parse_machine(testing::slurp(testing::data_path(name))));
}

Vocabulary mark_vocab() {
  Vocabulary v;
  v.add({"mark", 1});
  return v;
}

// Accepts unconditionally.
NTMachine always_accept() {
  std::string text =
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qa, 0, S\ntrans q0, 1 -> qa, 1, S\n"
      "trans q0, _ -> qa, _, S\nbounds kt=1 kp=auto\n";
  return normalize_machine(parse_machine(text));
}

// Accepts iff the first choice bit is 1.
NTMachine first_bit_machine() {
  std::string text =
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qr, 0, S\ntrans q0, 0 -> qa, 0, S\n"
      "trans q0, 1 -> qr, 1, S\ntrans q0, 1 -> qa, 1, S\n"
      "trans q0, _ -> qr, _, S\ntrans q0, _ -> qa, _, S\n"
      "bounds kt=1 kp=auto\n";
  return normalize_machine(parse_machine(text));
}

// First choice: moving left off cell 0 (freezes the path) or moving right
// into the accept state.
NTMachine lefty_machine() {
  std::string text =
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qa, 0, L\ntrans q0, 0 -> qa, 0, R\n"
      "trans q0, 1 -> qa, 1, L\ntrans q0, 1 -> qa, 1, R\n"
      "trans q0, _ -> qa, _, L\ntrans q0, _ -> qa, _, R\n"
      "bounds kt=1 kp=auto\n";
  return normalize_machine(parse_machine(text));
}

} // namespace

TEST_CASE("machine parsing and normalization") {
  NTMachine m = load_machine("coin_or.tm");
  CHECK(m.state_count() == 4);
  CHECK(m.initial == *m.find_state("q0"));
  CHECK(m.accept == *m.find_state("qa"));
  CHECK(m.reject == *m.find_state("qr"));
  CHECK(m.normalized);
  for (int q = 0; q < m.state_count(); ++q)
    for (int s = 0; s < 3; ++s)
      CHECK(m.transitions[q][s].size() == 2);
  // Halting states became absorbing self-loops.
  for (int s = 0; s < 3; ++s) {
    CHECK(m.transitions[m.accept][s][0].state == m.accept);
    CHECK(m.transitions[m.accept][s][0].move == Move::Stay);
    CHECK(m.transitions[m.reject][s][1].state == m.reject);
  }

  // Deterministic machines get their single choice duplicated.
  NTMachine det = always_accept();
  CHECK(det.transitions[det.initial][0][0] == det.transitions[det.initial][0][1]);

  CHECK_THROWS_AS(parse_machine("state q0 initial\nstate qa accept\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_machine("state q0 initial\nstate qa accept\n"
                                "state qr reject\ntrans q0, 0 -> qx, 0, S\n"),
                  ParseError);

  // Three-way branches are rejected with a pre-splitting instruction.
  std::string three =
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qa, 0, S\ntrans q0, 0 -> qr, 0, S\n"
      "trans q0, 0 -> q0, 0, S\n"
      "trans q0, 1 -> qa, 1, S\ntrans q0, _ -> qa, _, S\n";
  CHECK_THROWS_AS(normalize_machine(parse_machine(three)), DomainError);

  // Missing transitions on a reachable symbol are rejected.
  std::string partial =
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qa, 0, S\n";
  CHECK_THROWS_AS(normalize_machine(parse_machine(partial)), DomainError);

  // Explicit bounds override the automatic space exponent.
  NTMachine bounded = parse_machine(
      "state q0 initial\nstate qa accept\nstate qr reject\n"
      "trans q0, 0 -> qa, 0, S\ntrans q0, 1 -> qa, 1, S\n"
      "trans q0, _ -> qa, _, S\nbounds kt=2 kp=4\n");
  CHECK(bounded.time_exp == 2);
  REQUIRE(bounded.space_exp.has_value());
  CHECK(*bounded.space_exp == 4);
  CHECK_FALSE(load_machine("coin_or.tm").space_exp.has_value());
}

TEST_CASE("path counts on the bundled machines") {
  // T = n with kt = 1; all examples at n = 2 ==> four paths.
  CHECK(count_paths(always_accept(), 2, "001") == PathCount{4, 4});
  CHECK(count_paths(first_bit_machine(), 2, "001") == PathCount{2, 4});
  CHECK(count_paths(load_machine("coin_or.tm"), 2, "001") == PathCount{3, 4});
  CHECK(count_paths(load_machine("coin_and.tm"), 2, "001") == PathCount{1, 4});
  CHECK(count_paths(load_machine("tie.tm"), 2, "001") == PathCount{2, 4});

  // The accepting fraction of the OR machine stays 3/4 at longer bounds.
  for (int n : {2, 3, 4}) {
    PathCount pc = count_paths(load_machine("coin_or.tm"), n, "001");
    std::uint64_t T = n;
    CHECK(pc.total == std::uint64_t(1) << T);
    CHECK(pc.accepting == 3 * (std::uint64_t(1) << (T - 2)));
  }

  CHECK_THROWS_AS(count_paths(load_machine("tie.tm"), 30, "001",
                              CountOptions{.max_paths = 1024}),
                  ResourceCapError);
}

TEST_CASE("out-of-bounds moves freeze the path") {
  NTMachine m = lefty_machine();
  m.space_exp = 1;

  // One cell at n=1: both directions block, every path is frozen and
  // permanently non-accepting.
  CHECK(count_paths(m, 1, "0") == PathCount{0, 2});
  // Clamped mode instead applies the write and state change in place.
  CHECK(count_paths(m, 1, "0", CountOptions{.clamp = true}) ==
        PathCount{2, 2});

  // Two cells at n=2: only the left move at the first step blocks.
  CHECK(count_paths(m, 2, "00") == PathCount{2, 4});

  // With eight cells the right-moving half accepts as well.
  NTMachine wide = lefty_machine();
  wide.space_exp = 3;
  CHECK(count_paths(wide, 2, "0") == PathCount{2, 4});
}

TEST_CASE("majority is strict") {
  CHECK(majority_decision({3, 4}) == Majority::Accept);
  CHECK(majority_decision({2, 4}) == Majority::Reject);
  CHECK(majority_decision({0, 4}) == Majority::Reject);
  CHECK_THROWS_AS(majority_decision({0, 0}), DomainError);
}

TEST_CASE("order sentence counts linear orders") {
  Vocabulary v;
  PredId lt = v.add({"lt", 2});
  FormulaPtr order = build_order_formula(v, lt);
  std::vector<std::uint64_t> expected{1, 2, 6};  // factorials
  for (int n = 1; n <= 3; ++n) {
    std::uint64_t bits = std::uint64_t(n) * n;
    std::uint64_t models = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << bits); ++mask) {
      Structure s(v, Domain(n));
      for (std::uint64_t b = 0; b < bits; ++b)
        s.interp.set(lt, b, (mask >> b) & 1);
      if (evaluate(order, s)) ++models;
    }
    CHECK(models == expected[n - 1]);
  }
}

TEST_CASE("compiled specifications have the expected shape") {
  NTMachine m = load_machine("coin_or.tm");
  CompiledCapture compiled = compile_machine(m, mark_vocab(), 2);

  CHECK(compiled.layout.k_t == 1);
  CHECK(compiled.layout.k_p == 3);  // 2^3 >= 7, the pair-code length at n=2

  const NetworkSpec& spec = compiled.spec;
  CHECK(validate_spec(spec).ok());
  CHECK(spec.sigma_declared);
  REQUIRE(spec.sigma.size() == 1);
  CHECK(spec.vocabulary[spec.sigma[0]].name == "mark");

  // accepted and valid are the only defined predicates; all else is a
  // half-weight root, including the input predicates.
  CHECK(spec.definitions.size() == 2);
  for (const auto& r : spec.roots) CHECK(r.alpha == Rational(1, 2));
  CHECK(spec.roots.size() + 2 == static_cast<std::size_t>(spec.vocabulary.size()));

  REQUIRE(spec.query.has_value());
  CHECK(spec.query->conditioned == std::vector<PredId>{compiled.layout.accepted});
  CHECK(spec.query->conditioning == std::vector<PredId>{compiled.layout.valid});

  // The compiled text is a valid spec file.
  NetworkSpec reparsed = parse_spec(print_spec(spec));
  CHECK(validate_spec(reparsed).ok());
  CHECK(reparsed.vocabulary.size() == spec.vocabulary.size());

  // Name collisions between inputs and auxiliaries are rejected.
  Vocabulary clash;
  clash.add({"choice", 1});
  CHECK_THROWS_AS(compile_machine(m, clash, 2), DomainError);
}

TEST_CASE("grounded compiled network matches the counting argument at n=1") {
  for (const char* name : {"coin_or.tm", "coin_and.tm", "tie.tm"}) {
    CAPTURE(name);
    NTMachine m = load_machine(name);
    CompiledCapture compiled = compile_machine(m, mark_vocab(), 2);
    const NetworkSpec& spec = compiled.spec;

    // Exhaustive oracle over every root assignment of the tiny grounding.
    GroundAtom valid{compiled.layout.valid, {}};
    GroundAtom accepted{compiled.layout.accepted, {}};
    Rational pb = testing::oracle_event_probability(spec, Domain(1),
                                                    {{valid, true}});
    std::uint64_t roots = 0;
    for (const auto& r : spec.roots)
      roots += int_pow(1, spec.vocabulary[r.pred].arity);

    // Satisfying assignments: 1 order x 2 input completions x 2 choices.
    Rational expected_b(4);
    for (std::uint64_t i = 0; i < roots; ++i)
      expected_b = expected_b * Rational(1, 2);
    CHECK(pb == expected_b);

    // The engine agrees with the oracle exactly.
    GroundedNetwork net = ground(spec, Domain(1));
    EventSpec b_event;
    b_event.require(net.atom_id(compiled.layout.valid, {}), true);
    EngineOptions opts;
    opts.max_roots = 64;
    CHECK(event_probability(net, b_event, opts) == pb);

    EventSpec ab_event = b_event;
    ab_event.require(net.atom_id(compiled.layout.accepted, {}), true);
    Rational pab = testing::oracle_event_probability(
        spec, Domain(1), {{valid, true}, {accepted, true}});
    CHECK(event_probability(net, ab_event, opts) == pab);

    // And both match the structured counter.
    EvidencePiece empty(mark_vocab(), Domain(1));
    auto structured = structured_conditional(compiled, Domain(1), empty);
    REQUIRE(structured.has_value());
    CHECK(*structured == pab / pb);
  }
}

TEST_CASE("structured conditional on the bundled machines") {
  Vocabulary sigma = mark_vocab();
  EvidencePiece empty(sigma, Domain(2));

  auto run = [&](const char* name) {
    CompiledCapture compiled =
        compile_machine(load_machine(name), sigma, 2);
    return *structured_conditional(compiled, Domain(2), empty);
  };
  CHECK(run("coin_or.tm") == Rational(3, 4));
  CHECK(run("coin_and.tm") == Rational(1, 4));
  CHECK(run("tie.tm") == Rational(1, 2));

  CompiledCapture acc = compile_machine(always_accept(), sigma, 2);
  CHECK(*structured_conditional(acc, Domain(2), empty) == Rational(1));

  // Evidence does not change an input-oblivious machine.
  CompiledCapture orm = compile_machine(load_machine("coin_or.tm"), sigma, 2);
  EvidencePiece marked(sigma, Domain(2));
  marked.set(0, {0}, Tristate::True);
  marked.set(0, {1}, Tristate::False);
  CHECK(*structured_conditional(orm, Domain(2), marked) == Rational(3, 4));
}

TEST_CASE("order invariance of per-order acceptance ratios") {
  // With a fixed order the ratio equals the overall conditional; check by
  // restricting the evidence-free count to each order via domain size 2
  // and comparing both orders through the permuted evidence.
  Vocabulary sigma = mark_vocab();
  CompiledCapture compiled =
      compile_machine(load_machine("coin_or.tm"), sigma, 2);
  EvidencePiece e(sigma, Domain(2));
  e.set(0, {0}, Tristate::True);
  EvidencePiece swapped = apply_permutation(e, {1, 0});
  CHECK(*structured_conditional(compiled, Domain(2), e) ==
        *structured_conditional(compiled, Domain(2), swapped));
}

TEST_CASE("verify_capture reports zero mismatches for the bundled machines") {
  for (const char* name : {"coin_or.tm", "coin_and.tm", "tie.tm"}) {
    CAPTURE(name);
    VerifyReport report =
        verify_capture(load_machine(name), mark_vocab(), 2);
    CHECK(report.ok());
    REQUIRE(report.checked.size() == 2);
    CHECK(report.checked[0].pieces == 3);   // 3^1
    CHECK(report.checked[1].pieces == 9);   // 3^2
  }
}

TEST_CASE("verify_capture agrees for a machine that can fall off the tape") {
  VerifyReport report = verify_capture(lefty_machine(), mark_vocab(), 2);
  CHECK(report.ok());
}

TEST_CASE("tie machines are rejected on both sides") {
  NTMachine tie = load_machine("tie.tm");
  PathCount pc = count_paths(tie, 2, encode_pair(EvidencePiece(mark_vocab(), Domain(2))));
  CHECK(majority_decision(pc) == Majority::Reject);
  CompiledCapture compiled = compile_machine(tie, mark_vocab(), 2);
  EvidencePiece empty(mark_vocab(), Domain(2));
  Rational p = *structured_conditional(compiled, Domain(2), empty);
  CHECK(p == Rational(1, 2));
  CHECK_FALSE(p > Rational(1, 2));
}

TEST_CASE("per-order acceptance counts coincide on complete evidence") {
  // The input code under a non-canonical element order equals the
  // canonical code of the relabeled evidence, so per-order path counts
  // are comparable through count_paths directly.
  Vocabulary sigma = mark_vocab();
  for (const char* name : {"coin_or.tm", "coin_and.tm", "tie.tm"}) {
    CAPTURE(name);
    NTMachine m = load_machine(name);
    CompiledCapture compiled = compile_machine(m, sigma, 2);
    for (std::uint64_t assignment = 0; assignment < 4; ++assignment) {
      EvidencePiece e(sigma, Domain(2));
      e.set(0, {0}, (assignment & 1) ? Tristate::True : Tristate::False);
      e.set(0, {1}, (assignment & 2) ? Tristate::True : Tristate::False);
      PathCount canonical =
          count_paths(compiled.machine, 2, encode_pair(e));
      PathCount swapped = count_paths(
          compiled.machine, 2, encode_pair(apply_permutation(e, {1, 0})));
      CHECK(canonical == swapped);
    }
  }
}

TEST_CASE("compiled root counts follow the layout arithmetic") {
  // At n=2 with kt=1, kp=3: mark 2 + less_than 4 + choice 2 + match 16 +
  // four states 8 + head 16 + three tape symbols 48 = 96 roots, plus the
  // two defined nullary predicates.
  CompiledCapture compiled =
      compile_machine(load_machine("coin_or.tm"), mark_vocab(), 2);
  GroundedNetwork net = ground(compiled.spec, Domain(2));
  NetworkStats st = net.stats();
  CHECK(st.roots == 96);
  CHECK(st.nodes == 98);

  std::uint64_t closed_form = 0;
  for (const auto& r : compiled.spec.roots)
    closed_form += int_pow(2, compiled.spec.vocabulary[r.pred].arity);
  CHECK(closed_form == 96);
}

TEST_CASE("random moving machines: engine equals structured counter") {
  // kp = 1 keeps the grounded network small enough for the enumeration
  // engine while still giving a two-cell tape at n = 2, so head movement,
  // writes, frame conditions and blocked moves are all exercised.
  Rng rng(83);
  Vocabulary sigma = mark_vocab();
  EngineOptions opts;
  opts.max_roots = 64;

  for (int trial = 0; trial < 25; ++trial) {
    NTMachine m;
    int plain = testing::pick(rng, 0, 2);
    m.state_names = {"q0", "qa", "qr"};
    for (int i = 0; i < plain; ++i)
      m.state_names.push_back("s" + std::to_string(i));
    m.initial = 0;
    m.accept = 1;
    m.reject = 2;
    m.transitions.resize(m.state_count());
    for (int q = 0; q < m.state_count(); ++q)
      for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 2; ++c)
          m.transitions[q][s].push_back(
              {testing::pick(rng, 0, m.state_count() - 1),
               static_cast<TapeSym>(testing::pick(rng, 0, 2)),
               static_cast<Move>(testing::pick(rng, 0, 2))});
    m.time_exp = 1;
    m.space_exp = 1;
    m = normalize_machine(m);

    CompiledCapture compiled = compile_machine(m, sigma, 2);
    for (int n = 1; n <= 2; ++n) {
      CAPTURE(trial);
      CAPTURE(n);
      GroundedNetwork net = ground(compiled.spec, Domain(n));
      EventSpec given;
      given.require(net.atom_id(compiled.layout.valid, {}), true);
      EventSpec target = given;
      target.require(net.atom_id(compiled.layout.accepted, {}), true);
      Rational pb = event_probability(net, given, opts);
      Rational pab = event_probability(net, target, opts);
      REQUIRE(pb > Rational(0));

      EvidencePiece empty(sigma, Domain(n));
      Rational structured =
          *structured_conditional(compiled, Domain(n), empty);
      CHECK(pab / pb == structured);
    }
  }
}
