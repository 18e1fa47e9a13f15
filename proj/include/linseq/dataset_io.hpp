#pragma once

// Dataset file format (format_version 1).
//
// A dataset is a JSON-lines file, one record per line, keys in this order:
//   task           snake_case task name
//   index          position in the stream
//   seed           seed of the accepted draw (decimal integer)
//   m, n           operand shape
//   prefix         task token, joint datasets only
//   input_tokens   space-separated tokens (noisy when noise was requested)
//   output_tokens  space-separated tokens
//   clean_input    row-major values of the rounded input before noise (optional)
//   target         row-major values of the rounded target (optional)
//
// The manifest sits next to it at <path>.manifest.json and echoes the full
// generation spec, the seed, the record count, the library version and the
// vocabulary sizes and fingerprints.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linseq/matseq.hpp"
#include "linseq/taskgen.hpp"

namespace linseq {

inline constexpr std::string_view kDatasetFormat = "linseq-dataset";
inline constexpr int kDatasetFormatVersion = 1;

std::string library_version();

/// One JSON object, no trailing newline.
std::string record_to_json(const ExampleRecord& r, bool include_values = true);

struct DatasetRecord {
  TaskKind task = TaskKind::Transpose;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::optional<std::string> prefix;
  TokenSeq input_tokens;
  TokenSeq output_tokens;
  std::optional<std::vector<double>> clean_input;
  std::optional<std::vector<double>> target;
};

/// Throws IoError on malformed JSON or missing fields.
DatasetRecord parse_record(std::string_view line);

struct ManifestTask {
  TaskKind kind = TaskKind::Transpose;
  double weight = 1.0;
  std::optional<std::string> prefix;
  EncodingScheme scheme_in;
  EncodingScheme scheme_out;
  double noise_level = 0.0;
  bool noisy_target = false;
};

struct VocabularyInfo {
  std::string scheme;
  std::size_t max_dim = 0;
  std::size_t size = 0;
  std::string fingerprint;  // 16 hex digits
};

struct Manifest {
  std::string format = std::string(kDatasetFormat);
  int format_version = kDatasetFormatVersion;
  std::string library_version;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  bool joint = false;
  std::vector<ManifestTask> tasks;
  VocabularyInfo vocab_in;
  VocabularyInfo vocab_out;
};

std::string manifest_path(const std::string& dataset_path);

/// Largest V-token the tasks can emit, at least 30.
std::size_t vocabulary_max_dim(const std::vector<WeightedTask>& tasks);
/// Task tokens a joint dataset adds to the vocabulary.
std::vector<std::string> task_tokens(const std::vector<WeightedTask>& tasks);

/// Pretty-printed manifest JSON for `tasks`.
std::string manifest_json(const std::vector<WeightedTask>& tasks, bool joint, std::size_t count,
                          std::uint64_t seed);
/// Throws IoError.
Manifest read_manifest(const std::string& path);

/// Line-by-line reader. Throws IoError when the file cannot be opened.
class DatasetReader {
 public:
  explicit DatasetReader(const std::string& path);
  /// False at end of file. Blank lines are skipped.
  bool next(DatasetRecord& out);
  std::size_t line() const noexcept { return line_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t line_ = 0;
};

std::vector<DatasetRecord> read_dataset(const std::string& path);

}  // namespace linseq
