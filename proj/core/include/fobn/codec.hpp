#ifndef FOBN_CODEC_HPP
#define FOBN_CODEC_HPP

#include <cstdint>
#include <string>

#include "fobn/model.hpp"

namespace fobn {

// ASCII '0'/'1' strings are the canonical external form of all codes.
using BitString = std::string;

std::uint64_t structure_code_length(const Vocabulary& vocab, int n);
std::uint64_t pair_code_length(const Vocabulary& vocab, int n);

// `0^n 1`, then one bit per lexicographic tuple of each predicate in
// declaration order; total length n + 1 + sum_i n^arity(r_i).
BitString encode_structure(const Structure& structure);

// Inverse of encode_structure; rejects malformed headers and lengths.
Structure decode_structure(const BitString& bits, const Vocabulary& vocab);

// `0^n 1`, then two bits per grounding: 00 false, 11 true, 01 unassigned;
// total length n + 1 + 2 * sum_i n^arity(r_i).
BitString encode_pair(const EvidencePiece& pair);

// Inverse of encode_pair; the code 10 is rejected as malformed.
EvidencePiece decode_pair(const BitString& bits, const Vocabulary& vocab);

} // namespace fobn

#endif
