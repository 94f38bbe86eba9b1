#include "fobn_cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fobn/capture.hpp"
#include "fobn/codec.hpp"
#include "fobn/errors.hpp"
#include "fobn/eso.hpp"
#include "fobn/ground.hpp"
#include "fobn/infer.hpp"
#include "fobn/spec.hpp"

namespace fobn::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string read_stream(std::istream& in) {
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

NetworkSpec load_spec(const std::string& path) {
  return parse_spec(read_file(path));
}

NetworkSpec load_valid_spec(const std::string& path) {
  NetworkSpec spec = load_spec(path);
  ValidationReport report = validate_spec(spec);
  if (!report.ok())
    throw ParseError("'" + path + "' does not validate:\n" +
                     report.to_string());
  return spec;
}

std::string prob_line(const Rational& p) {
  return p.str() + " = " + p.decimal(6);
}

EventSpec load_event(const std::string& path, const GroundedNetwork& net) {
  EvidencePiece e =
      parse_evidence_text(read_file(path), net.spec().vocabulary);
  if (e.domain().size != net.domain().size)
    throw DomainError("event file domain " + std::to_string(e.domain().size) +
                      " does not match --domain-size " +
                      std::to_string(net.domain().size));
  EventSpec out;
  for (PredId p = 0; p < e.vocab().size(); ++p) {
    std::uint64_t count = e.groundings(p);
    for (std::uint64_t r = 0; r < count; ++r) {
      Tristate t = e.get(p, r);
      if (t == Tristate::Unassigned) continue;
      out.require(net.atom_id(p, tuple_unrank(r, net.domain().size,
                                              e.vocab()[p].arity)),
                  t == Tristate::True);
    }
  }
  return out;
}

struct Options {
  std::string spec_path;
  std::string machine_path;
  std::string vocab_path;
  std::string target_path;
  std::string given_path;
  std::string pair_path;
  std::string dot_path;
  std::string out_path;
  std::string sentence_path;
  std::string structure_path;
  std::string input_bits;
  std::string kind;
  int domain_size = 1;
  int max_n = 2;
  int jobs = 1;
  std::uint64_t cap = 0;  // 0: per-subcommand default
  bool cross_check = false;
  bool clamp = false;
};

int cmd_validate(const Options& o, std::ostream& out) {
  NetworkSpec spec = load_spec(o.spec_path);
  ValidationReport report = validate_spec(spec);
  out << report.to_string();
  if (!report.ok()) return kExitFormat;
  out << "ok\n";
  return kExitAccept;
}

int cmd_ground(const Options& o, std::ostream& out) {
  NetworkSpec spec = load_valid_spec(o.spec_path);
  GroundedNetwork net =
      ground(spec, Domain(o.domain_size),
             o.cap ? o.cap : std::uint64_t(1) << 22);
  NetworkStats st = net.stats();
  out << "nodes=" << st.nodes << " edges=" << st.edges
      << " roots=" << st.roots << "\n";
  if (!o.dot_path.empty()) {
    std::ofstream f(o.dot_path);
    if (!f) throw Error("cannot write '" + o.dot_path + "'");
    f << net.to_dot();
  }
  return kExitAccept;
}

EngineOptions engine_options(const Options& o) {
  EngineOptions e;
  if (o.cap) e.max_roots = o.cap;
  e.jobs = o.jobs;
  return e;
}

int cmd_prob(const Options& o, std::ostream& out) {
  NetworkSpec spec = load_valid_spec(o.spec_path);
  GroundedNetwork net = ground(spec, Domain(o.domain_size));
  EventSpec target = load_event(o.target_path, net);
  EventSpec given;
  if (!o.given_path.empty()) given = load_event(o.given_path, net);
  std::optional<Rational> p =
      conditional_probability(net, target, given, engine_options(o));
  if (!p) {
    out << "undefined\n";
    return kExitUndefined;
  }
  out << prob_line(*p) << "\n";
  return kExitAccept;
}

int cmd_accept(const Options& o, std::ostream& out) {
  NetworkSpec spec = load_valid_spec(o.spec_path);
  if (!spec.query)
    throw ParseError("'" + o.spec_path + "' has no query block");
  BitString bits = strip_ws(read_file(o.pair_path));
  EvidencePiece pair = decode_pair(bits, spec.sigma_vocab());
  AcceptanceDecision dec =
      decide_acceptance(spec, *spec.query, pair.domain(), pair,
                        engine_options(o));
  switch (dec.kind) {
    case AcceptanceDecision::Kind::Accept:
      out << "decision = accept\n";
      break;
    case AcceptanceDecision::Kind::Reject:
      out << "decision = reject\n";
      break;
    case AcceptanceDecision::Kind::Undefined:
      out << "decision = undefined\n";
      return kExitUndefined;
  }
  out << "probability = " << prob_line(*dec.probability) << "\n";
  return dec.kind == AcceptanceDecision::Kind::Accept ? kExitAccept
                                                      : kExitReject;
}

int cmd_encode(const Options& o, std::istream& in, std::ostream& out) {
  NetworkSpec spec = load_spec(o.vocab_path);
  Vocabulary sigma = spec.sigma_vocab();
  std::string text = read_stream(in);
  if (o.kind == "structure") {
    out << encode_structure(parse_structure_text(text, sigma)) << "\n";
  } else {
    out << encode_pair(parse_evidence_text(text, sigma)) << "\n";
  }
  return kExitAccept;
}

int cmd_decode(const Options& o, std::istream& in, std::ostream& out) {
  NetworkSpec spec = load_spec(o.vocab_path);
  Vocabulary sigma = spec.sigma_vocab();
  BitString bits = strip_ws(read_stream(in));
  if (o.kind == "structure") {
    out << print_structure_text(decode_structure(bits, sigma));
  } else {
    out << print_evidence_text(decode_pair(bits, sigma));
  }
  return kExitAccept;
}

int cmd_eso_check(const Options& o, std::ostream& out) {
  EsoSentence sentence = parse_eso(read_file(o.sentence_path));
  Structure structure =
      parse_structure_text(read_file(o.structure_path), sentence.input_vocab);
  bool model = eso_check(sentence, structure,
                         o.cap ? o.cap : std::uint64_t(1) << 24);
  out << (model ? "true" : "false") << "\n";
  return model ? kExitAccept : kExitReject;
}

int cmd_capture_count(const Options& o, std::ostream& out) {
  NTMachine machine = normalize_machine(parse_machine(read_file(o.machine_path)));
  CountOptions opts;
  opts.clamp = o.clamp;
  if (o.cap) opts.max_paths = o.cap;
  PathCount pc = count_paths(machine, o.domain_size, o.input_bits, opts);
  out << "accepting=" << pc.accepting << " total=" << pc.total << "\n";
  Majority m = majority_decision(pc);
  out << "decision = " << (m == Majority::Accept ? "accept" : "reject")
      << "\n";
  return m == Majority::Accept ? kExitAccept : kExitReject;
}

int cmd_capture_compile(const Options& o, std::ostream& out) {
  NTMachine machine = normalize_machine(parse_machine(read_file(o.machine_path)));
  NetworkSpec vocab_spec = load_spec(o.vocab_path);
  CompiledCapture compiled =
      compile_machine(machine, vocab_spec.sigma_vocab(), o.max_n);
  std::string text = print_spec(compiled.spec);
  if (!o.out_path.empty()) {
    std::ofstream f(o.out_path);
    if (!f) throw Error("cannot write '" + o.out_path + "'");
    f << text;
  } else {
    out << text;
  }
  return kExitAccept;
}

int cmd_capture_verify(const Options& o, std::ostream& out) {
  NTMachine machine = normalize_machine(parse_machine(read_file(o.machine_path)));
  NetworkSpec vocab_spec = load_spec(o.vocab_path);
  VerifyOptions opts;
  opts.cross_check = o.cross_check;
  opts.engine.jobs = o.jobs;
  if (o.cap) opts.max_pieces = o.cap;
  VerifyReport report =
      verify_capture(machine, vocab_spec.sigma_vocab(), o.max_n, opts);
  for (const auto& per : report.checked) {
    std::uint64_t mismatches = 0;
    for (const auto& mm : report.mismatches)
      if (mm.n == per.n) ++mismatches;
    out << "n=" << per.n << " pieces=" << per.pieces
        << " mismatches=" << mismatches << "\n";
  }
  if (o.cross_check) out << "cross-checks=" << report.cross_checks << "\n";
  for (const auto& mm : report.mismatches)
    out << "mismatch n=" << mm.n << " code=" << mm.pair_code
        << " machine=" << (mm.machine_side == Majority::Accept ? "accept"
                                                               : "reject")
        << " (" << mm.machine_count.accepting << "/" << mm.machine_count.total
        << ") spec=" << (mm.spec_accepts ? "accept" : "reject") << " ("
        << mm.spec_probability.str() << ")\n";
  out << "result = " << (report.ok() ? "ok" : "mismatch") << "\n";
  return report.ok() ? kExitAccept : kExitReject;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  CLI::App app{"first-order Bayesian network specifications"};
  app.require_subcommand(1);
  Options o;

  auto add_cap = [&](CLI::App* cmd) {
    cmd->add_option("--cap", o.cap, "override the resource guard");
  };
  auto add_jobs = [&](CLI::App* cmd) {
    cmd->add_option("--jobs", o.jobs, "worker count (results are invariant)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a specification");
  validate->add_option("spec", o.spec_path)->required();

  CLI::App* grnd = app.add_subcommand("ground", "ground into a network");
  grnd->add_option("spec", o.spec_path)->required();
  grnd->add_option("--domain-size", o.domain_size)->required();
  grnd->add_option("--dot", o.dot_path, "write the network in DOT format");
  add_cap(grnd);

  CLI::App* prob = app.add_subcommand("prob", "exact event probability");
  prob->add_option("spec", o.spec_path)->required();
  prob->add_option("--domain-size", o.domain_size)->required();
  prob->add_option("--target", o.target_path)->required();
  prob->add_option("--given", o.given_path);
  add_cap(prob);
  add_jobs(prob);

  CLI::App* accept = app.add_subcommand("accept", "decide an encoded pair");
  accept->add_option("spec", o.spec_path)->required();
  accept->add_option("--pair", o.pair_path)->required();
  add_cap(accept);
  add_jobs(accept);

  CLI::App* encode = app.add_subcommand("encode", "text to bit code (stdin)");
  encode->add_option("--kind", o.kind)
      ->check(CLI::IsMember({"structure", "pair"}))
      ->required();
  encode->add_option("--vocab", o.vocab_path)->required();

  CLI::App* decode = app.add_subcommand("decode", "bit code to text (stdin)");
  decode->add_option("--kind", o.kind)
      ->check(CLI::IsMember({"structure", "pair"}))
      ->required();
  decode->add_option("--vocab", o.vocab_path)->required();

  CLI::App* eso = app.add_subcommand("eso-check", "second-order model check");
  eso->add_option("--sentence", o.sentence_path)->required();
  eso->add_option("--structure", o.structure_path)->required();
  add_cap(eso);

  CLI::App* capture = app.add_subcommand("capture", "machine equivalences");
  capture->require_subcommand(1);

  CLI::App* count = capture->add_subcommand("count", "count accepting paths");
  count->add_option("machine", o.machine_path)->required();
  count->add_option("--input", o.input_bits)->required();
  count->add_option("--domain-size", o.domain_size)->required();
  count->add_flag("--clamp", o.clamp, "clamp out-of-bounds moves");
  add_cap(count);

  CLI::App* compile = capture->add_subcommand("compile",
                                              "machine to specification");
  compile->add_option("machine", o.machine_path)->required();
  compile->add_option("--vocab", o.vocab_path)->required();
  compile->add_option("--max-n", o.max_n);
  compile->add_option("--out", o.out_path);

  CLI::App* verify = capture->add_subcommand("verify",
                                             "decision equivalence check");
  verify->add_option("machine", o.machine_path)->required();
  verify->add_option("--vocab", o.vocab_path)->required();
  verify->add_option("--max-n", o.max_n);
  verify->add_flag("--cross-check", o.cross_check,
                   "also compare against the grounded-network engine");
  add_cap(verify);
  add_jobs(verify);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitAccept;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(o, out);
    if (app.got_subcommand(grnd)) return cmd_ground(o, out);
    if (app.got_subcommand(prob)) return cmd_prob(o, out);
    if (app.got_subcommand(accept)) return cmd_accept(o, out);
    if (app.got_subcommand(encode)) return cmd_encode(o, in, out);
    if (app.got_subcommand(decode)) return cmd_decode(o, in, out);
    if (app.got_subcommand(eso)) return cmd_eso_check(o, out);
    if (app.got_subcommand(capture)) {
      if (capture->got_subcommand(count)) return cmd_capture_count(o, out);
      if (capture->got_subcommand(compile)) return cmd_capture_compile(o, out);
      if (capture->got_subcommand(verify)) return cmd_capture_verify(o, out);
    }
    err << "usage error: no subcommand\n";
    return kExitUsage;
  } catch (const ResourceCapError& e) {
    err << "resource cap: " << e.what() << "\n";
    return kExitCap;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFormat;
  }
}

} // namespace fobn::cli
