#pragma once

// Parameter count of an encoder-decoder transformer with learned positional
// embeddings:
//   P = de (wi + wp + 2) + ((wo + wp + 2) dd + wo) + ne de (12 de + 13)
//       + nd dd (14 dd + 2 de + 19)

#include <cstdint>

#include "linseq/numcodec.hpp"
#include "linseq/randmat.hpp"
#include "linseq/taskgen.hpp"

namespace linseq {

struct TransformerShape {
  std::uint64_t n_e = 1;  // encoder layers
  std::uint64_t n_d = 1;  // decoder layers
  std::uint64_t d_e = 512;
  std::uint64_t d_d = 512;
  std::uint64_t w_i = 0;  // input vocabulary
  std::uint64_t w_o = 0;  // output vocabulary
  std::uint64_t w_p = 0;  // positional table (longest sequence)
};

struct ParamCount {
  std::uint64_t input_embedding = 0;
  std::uint64_t output_embedding = 0;
  std::uint64_t encoder = 0;
  std::uint64_t decoder = 0;
  std::uint64_t total = 0;
};

ParamCount param_count(const TransformerShape& s);

/// Longest input or output sequence (with dimension tokens and an optional
/// task prefix) the task can emit at the largest dimensions of its ensemble.
std::uint64_t longest_sequence(const MatrixTask& task);

}  // namespace linseq
