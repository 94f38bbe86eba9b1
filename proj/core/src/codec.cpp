#include "fobn/codec.hpp"

#include "fobn/errors.hpp"

namespace fobn {

namespace {

std::uint64_t grounding_count(const Vocabulary& vocab, int n) {
  std::uint64_t total = 0;
  for (const auto& p : vocab.predicates()) total += int_pow(n, p.arity);
  return total;
}

// Reads the `0^n 1` header and checks the total length.
int decode_header(const BitString& bits, const Vocabulary& vocab,
                  bool pair_code) {
  std::size_t i = 0;
  while (i < bits.size() && bits[i] == '0') ++i;
  if (i == 0)
    throw ParseError("malformed header: no leading block of 0s");
  if (i == bits.size())
    throw ParseError("malformed header: missing terminating 1");
  if (bits[i] != '1')
    throw ParseError(std::string("invalid character '") + bits[i] +
                     "' in code");
  int n = static_cast<int>(i);
  std::uint64_t expected =
      n + 1 + (pair_code ? 2 : 1) * grounding_count(vocab, n);
  if (bits.size() != expected)
    throw ParseError("code length " + std::to_string(bits.size()) +
                     " does not match expected " + std::to_string(expected) +
                     " for domain size " + std::to_string(n));
  for (char c : bits)
    if (c != '0' && c != '1')
      throw ParseError(std::string("invalid character '") + c + "' in code");
  return n;
}

} // namespace

std::uint64_t structure_code_length(const Vocabulary& vocab, int n) {
  return n + 1 + grounding_count(vocab, n);
}

std::uint64_t pair_code_length(const Vocabulary& vocab, int n) {
  return n + 1 + 2 * grounding_count(vocab, n);
}

BitString encode_structure(const Structure& structure) {
  int n = structure.domain.size;
  BitString out;
  out.reserve(structure_code_length(structure.vocab, n));
  out.append(n, '0');
  out.push_back('1');
  for (PredId p = 0; p < structure.vocab.size(); ++p) {
    std::uint64_t count = int_pow(n, structure.vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      out.push_back(structure.interp.get(p, r) ? '1' : '0');
  }
  return out;
}

Structure decode_structure(const BitString& bits, const Vocabulary& vocab) {
  int n = decode_header(bits, vocab, false);
  Structure s(vocab, Domain(n));
  std::size_t i = n + 1;
  for (PredId p = 0; p < vocab.size(); ++p) {
    std::uint64_t count = int_pow(n, vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r)
      s.interp.set(p, r, bits[i++] == '1');
  }
  return s;
}

BitString encode_pair(const EvidencePiece& pair) {
  int n = pair.domain().size;
  BitString out;
  out.reserve(pair_code_length(pair.vocab(), n));
  out.append(n, '0');
  out.push_back('1');
  for (PredId p = 0; p < pair.vocab().size(); ++p) {
    std::uint64_t count = pair.groundings(p);
    for (std::uint64_t r = 0; r < count; ++r) {
      switch (pair.get(p, r)) {
        case Tristate::False: out += "00"; break;
        case Tristate::True: out += "11"; break;
        case Tristate::Unassigned: out += "01"; break;
      }
    }
  }
  return out;
}

EvidencePiece decode_pair(const BitString& bits, const Vocabulary& vocab) {
  int n = decode_header(bits, vocab, true);
  EvidencePiece e(vocab, Domain(n));
  std::size_t i = n + 1;
  for (PredId p = 0; p < vocab.size(); ++p) {
    std::uint64_t count = int_pow(n, vocab[p].arity);
    for (std::uint64_t r = 0; r < count; ++r) {
      char hi = bits[i++];
      char lo = bits[i++];
      if (hi == '0' && lo == '0') e.set(p, r, Tristate::False);
      else if (hi == '1' && lo == '1') e.set(p, r, Tristate::True);
      else if (hi == '0' && lo == '1') e.set(p, r, Tristate::Unassigned);
      else
        throw ParseError("malformed code 10 at offset " +
                         std::to_string(i - 2));
    }
  }
  return e;
}

} // namespace fobn
