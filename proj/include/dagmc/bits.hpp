#pragma once

#include <bit>
#include <cstdint>

namespace dagmc {

// A set of node indices in 0..d-1, d <= 32.
using NodeSet = std::uint32_t;

inline constexpr int kMaxNodes = 32;

inline constexpr NodeSet bit(int i) { return NodeSet(1) << i; }
inline constexpr NodeSet full_set(int d) {
  return d == 32 ? ~NodeSet(0) : (NodeSet(1) << d) - 1;
}
inline constexpr bool contains(NodeSet s, int i) { return (s >> i) & 1u; }
inline constexpr int set_size(NodeSet s) { return std::popcount(s); }
inline constexpr int lowest(NodeSet s) { return std::countr_zero(s); }

// Pack a subset of V \ {i} into d-1 bits by dropping bit i.
inline constexpr NodeSet compress_without(int i, NodeSet s) {
  return (s & (bit(i) - 1)) | ((s >> (i + 1)) << i);
}
inline constexpr NodeSet expand_without(int i, NodeSet c) {
  return (c & (bit(i) - 1)) | ((c >> i) << (i + 1));
}

// Iterate subsets of a mask: for (NodeSet t = m;; t = (t - 1) & m) { ...; if (!t) break; }
// enumerates all subsets of m including empty and m itself.

}  // namespace dagmc
