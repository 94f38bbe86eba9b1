#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fobn/codec.hpp"
#include "fobn_cli.hpp"
#include "test_support.hpp"

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int code = fobn::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string friends_path() { return fobn::testing::data_path("friends.fobn"); }

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "cli_tmp_" + std::to_string(counter++) + ".txt";
    std::ofstream f(path);
    f << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("cli validate") {
  CHECK(run_cli({"validate", friends_path()}).code == 0);

  TempFile cyclic("define p(x) <=> q(x). define q(x) <=> p(x).");
  CliResult r = run_cli({"validate", cyclic.path});
  CHECK(r.code == fobn::cli::kExitFormat);
  CHECK(r.out.find("cycle") != std::string::npos);

  CHECK(run_cli({"validate", "no_such_file.fobn"}).code ==
        fobn::cli::kExitFormat);
  CHECK(run_cli({"validate"}).code == fobn::cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == fobn::cli::kExitUsage);
}

TEST_CASE("cli ground with DOT output") {
  CliResult r = run_cli({"ground", friends_path(), "--domain-size", "3"});
  CHECK(r.code == 0);
  CHECK(r.out == "nodes=21 edges=24 roots=12\n");

  TempFile dot("");
  CliResult r2 = run_cli({"ground", friends_path(), "--domain-size", "3",
                          "--dot", dot.path});
  CHECK(r2.code == 0);
  std::string dots = fobn::testing::slurp(dot.path);
  CHECK(dots.find("digraph") != std::string::npos);
  CHECK(std::count(dots.begin(), dots.end(), '\n') == 21 + 24 + 2);

  // Byte-identical across runs.
  CliResult r3 = run_cli({"ground", friends_path(), "--domain-size", "3"});
  CHECK(r3.out == r.out);

  CHECK(run_cli({"ground", friends_path(), "--domain-size", "3", "--cap",
                 "5"}).code == fobn::cli::kExitCap);
}

TEST_CASE("cli prob") {
  TempFile target("domain 3; friends(0, 1) = true;");
  CliResult r = run_cli({"prob", friends_path(), "--domain-size", "3",
                         "--target", target.path});
  CHECK(r.code == 0);
  CHECK(r.out == "17/125 = 0.136000\n");

  TempFile given("domain 3; other(0, 1) = false;");
  CliResult r2 = run_cli({"prob", friends_path(), "--domain-size", "3",
                          "--target", target.path, "--given", given.path});
  CHECK(r2.code == 0);
  CHECK(r2.out == "1/25 = 0.040000\n");

  TempFile impossible("domain 3; friends(0, 0) = false;");
  CliResult r3 = run_cli({"prob", friends_path(), "--domain-size", "3",
                          "--target", target.path, "--given",
                          impossible.path});
  CHECK(r3.code == fobn::cli::kExitUndefined);
  CHECK(r3.out == "undefined\n");

  // Worker count does not change the output bytes.
  CliResult r4 = run_cli({"prob", friends_path(), "--domain-size", "3",
                          "--target", target.path, "--jobs", "8"});
  CHECK(r4.out == r.out);
}

TEST_CASE("cli encode and decode") {
  CliResult enc = run_cli({"encode", "--kind", "structure", "--vocab",
                           friends_path()},
                          "domain 1; fan(0) = true;");
  CHECK(enc.code == 0);
  // Header 01, then one bit each for fan(0), friends(0,0), other(0,0).
  CHECK(enc.out == "01100\n");

  CliResult dec = run_cli({"decode", "--kind", "structure", "--vocab",
                           friends_path()},
                          enc.out);
  CHECK(dec.code == 0);
  CHECK(dec.out == "domain 1;\nfan(0) = true;\n");

  // Pair round trip through the codec text forms.
  CliResult encp = run_cli({"encode", "--kind", "pair", "--vocab",
                            friends_path()},
                           "domain 1; fan(0) = true; other(0, 0) = false;");
  CHECK(encp.code == 0);
  CliResult decp = run_cli({"decode", "--kind", "pair", "--vocab",
                            friends_path()},
                           encp.out);
  CHECK(decp.out == "domain 1;\nfan(0) = true;\nother(0, 0) = false;\n");

  CliResult bad = run_cli({"decode", "--kind", "pair", "--vocab",
                           friends_path()},
                          "0110");
  CHECK(bad.code == fobn::cli::kExitFormat);
}

TEST_CASE("cli accept") {
  // Evidence: every fan and every reason present at n=2; friends follows
  // deterministically, so the pair is accepted with probability one.
  fobn::NetworkSpec spec =
      fobn::parse_spec(fobn::testing::slurp(friends_path()));
  fobn::EvidencePiece e(spec.vocabulary, fobn::Domain(2));
  for (std::uint64_t r = 0; r < 2; ++r) e.set(0, r, fobn::Tristate::True);
  for (std::uint64_t r = 0; r < 4; ++r) e.set(2, r, fobn::Tristate::True);
  TempFile pair(fobn::encode_pair(e) + "\n");

  CliResult r = run_cli({"accept", friends_path(), "--pair", pair.path});
  CHECK(r.code == fobn::cli::kExitAccept);
  CHECK(r.out == "decision = accept\nprobability = 1 = 1.000000\n");

  // No evidence at all: all friends simultaneously true is unlikely.
  fobn::EvidencePiece blank(spec.vocabulary, fobn::Domain(2));
  TempFile blank_pair(fobn::encode_pair(blank) + "\n");
  CliResult r2 = run_cli({"accept", friends_path(), "--pair",
                          blank_pair.path});
  CHECK(r2.code == fobn::cli::kExitReject);

  // Impossible evidence is undefined.
  fobn::EvidencePiece impossible(spec.vocabulary, fobn::Domain(2));
  impossible.set(1, {0, 0}, fobn::Tristate::False);
  TempFile und_pair(fobn::encode_pair(impossible) + "\n");
  CliResult r3 = run_cli({"accept", friends_path(), "--pair", und_pair.path});
  CHECK(r3.code == fobn::cli::kExitUndefined);
}

TEST_CASE("cli eso-check") {
  TempFile graph("domain 2;\nedge(0, 1) = true;\n");
  CliResult r = run_cli({"eso-check", "--sentence",
                         fobn::testing::data_path("bipartite.eso"),
                         "--structure", graph.path});
  CHECK(r.code == 0);
  CHECK(r.out == "true\n");

  TempFile triangle(
      "domain 3;\nedge(0, 1) = true;\nedge(1, 0) = true;\n"
      "edge(1, 2) = true;\nedge(2, 1) = true;\n"
      "edge(0, 2) = true;\nedge(2, 0) = true;\n");
  CliResult r2 = run_cli({"eso-check", "--sentence",
                          fobn::testing::data_path("bipartite.eso"),
                          "--structure", triangle.path});
  CHECK(r2.code == fobn::cli::kExitReject);
  CHECK(r2.out == "false\n");
}

TEST_CASE("cli capture subcommands") {
  CliResult count = run_cli({"capture", "count",
                             fobn::testing::data_path("coin_or.tm"),
                             "--input", "001", "--domain-size", "2"});
  CHECK(count.code == fobn::cli::kExitAccept);
  CHECK(count.out == "accepting=3 total=4\ndecision = accept\n");

  CliResult tie = run_cli({"capture", "count",
                           fobn::testing::data_path("tie.tm"),
                           "--input", "001", "--domain-size", "2"});
  CHECK(tie.code == fobn::cli::kExitReject);

  CliResult compile = run_cli({"capture", "compile",
                               fobn::testing::data_path("coin_or.tm"),
                               "--vocab", fobn::testing::data_path("mark.fobn")});
  CHECK(compile.code == 0);
  CHECK(compile.out.find("vocabulary mark/1.") != std::string::npos);
  CHECK(compile.out.find("root less_than/2 = 1/2.") != std::string::npos);
  CHECK(compile.out.find("define valid <=>") != std::string::npos);
  CHECK(compile.out.find("query conditioned accepted; conditioning valid.") !=
        std::string::npos);
  // The compiled output is itself a valid specification file.
  TempFile compiled_spec(compile.out);
  CHECK(run_cli({"validate", compiled_spec.path}).code == 0);

  CliResult verify = run_cli({"capture", "verify",
                              fobn::testing::data_path("tie.tm"),
                              "--vocab", fobn::testing::data_path("mark.fobn"),
                              "--max-n", "2"});
  CHECK(verify.code == 0);
  CHECK(verify.out.find("n=1 pieces=3 mismatches=0\n") != std::string::npos);
  CHECK(verify.out.find("n=2 pieces=9 mismatches=0\n") != std::string::npos);
  CHECK(verify.out.find("result = ok\n") != std::string::npos);

  // Cross-checking against the grounded-network engine (kept at the small
  // domain so the unit suite stays fast).
  CliResult cross = run_cli({"capture", "verify",
                             fobn::testing::data_path("coin_and.tm"),
                             "--vocab", fobn::testing::data_path("mark.fobn"),
                             "--max-n", "1", "--cross-check"});
  CHECK(cross.code == 0);
  CHECK(cross.out.find("cross-checks=3\n") != std::string::npos);
  CHECK(cross.out.find("result = ok\n") != std::string::npos);
}

TEST_CASE("cli pipeline: compile, encode, accept matches the machine") {
  // Compile the tie machine, feed the compiled spec back through the
  // regular accept pipeline on an encoded pair, and compare against the
  // machine's majority decision on the same code.
  CliResult compiled = run_cli({"capture", "compile",
                                fobn::testing::data_path("tie.tm"),
                                "--vocab",
                                fobn::testing::data_path("mark.fobn")});
  REQUIRE(compiled.code == 0);
  TempFile spec_file(compiled.out);

  // Pair over sigma = {mark/1} at n = 1 with mark(0) observed true.
  TempFile pair_file("0111\n");
  CliResult accept = run_cli({"accept", spec_file.path, "--pair",
                              pair_file.path, "--cap", "64"});
  CliResult count = run_cli({"capture", "count",
                             fobn::testing::data_path("tie.tm"),
                             "--input", "0111", "--domain-size", "1"});
  // Exactly half the paths accept on both sides: reject, strictly.
  CHECK(accept.code == fobn::cli::kExitReject);
  CHECK(accept.out.find("probability = 1/2") != std::string::npos);
  CHECK(count.code == fobn::cli::kExitReject);
  CHECK(count.out.find("accepting=1 total=2") != std::string::npos);
}
