#include "linseq/paramcount.hpp"

#include <algorithm>

#include "linseq/matseq.hpp"

namespace linseq {

ParamCount param_count(const TransformerShape& s) {
  ParamCount p;
  p.input_embedding = s.d_e * (s.w_i + s.w_p + 2);
  // the prediction layer shares its weights with the decoder embedding
  p.output_embedding = (s.w_o + s.w_p + 2) * s.d_d + s.w_o;
  p.encoder = s.n_e * s.d_e * (12 * s.d_e + 13);
  p.decoder = s.n_d * s.d_d * (14 * s.d_d + 2 * s.d_e + 19);
  p.total = p.input_embedding + p.output_embedding + p.encoder + p.decoder;
  return p;
}

std::uint64_t longest_sequence(const MatrixTask& task) {
  const auto& d = task.input_spec.dims;
  std::uint64_t best = 0;
  // output length is not monotone in (m, n) for every task, so scan the range
  for (std::size_t m = d.min_rows; m <= d.max_rows; ++m) {
    for (std::size_t n = d.min_cols; n <= d.max_cols; ++n) {
      if (d.square && m != n) continue;
      const Shape in = input_shape(task.kind, m, n);
      const Shape out = output_shape(task.kind, m, n);
      const std::uint64_t extra = task.prefix ? 1 : 0;
      best = std::max<std::uint64_t>(
          {best, sequence_length(in.rows, in.cols, {task.scheme_in, true}) + extra,
           sequence_length(out.rows, out.cols, {task.scheme_out, true}) + extra});
    }
  }
  return best;
}

}  // namespace linseq
