#include "linseq/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "linseq/error.hpp"

namespace linseq {

using ojson = nlohmann::ordered_json;

namespace {

ojson law_json(const CoefficientLaw& law) {
  struct {
    ojson operator()(const IidUniform& u) const {
      return {{"law", "iid_uniform"}, {"half_width", u.half_width}};
    }
    ojson operator()(const IidGaussian& g) const {
      return {{"law", "iid_gaussian"}, {"sigma", g.sigma}};
    }
    ojson operator()(const IidLaplace& l) const {
      return {{"law", "iid_laplace"}, {"sigma", l.sigma}};
    }
    ojson operator()(const UniformWidthMixture& w) const {
      return {{"law", "uniform_width_mixture"},
              {"min_half_width", w.min_half_width},
              {"max_half_width", w.max_half_width}};
    }
    ojson operator()(const SpectralResample& s) const {
      return {{"law", "spectral"},
              {"family", std::string(to_string(s.eigenvalues.family))},
              {"scale", s.eigenvalues.scale}};
    }
  } v;
  return std::visit(v, law);
}

ojson ensemble_json(const EnsembleSpec& e) {
  ojson j;
  if (e.mixture.empty()) {
    j["law"] = law_json(e.law);
  } else {
    ojson mix = ojson::array();
    for (const auto& c : e.mixture) mix.push_back({{"weight", c.weight}, {"law", law_json(c.law)}});
    j["mixture"] = std::move(mix);
  }
  j["symmetric"] = e.symmetric;
  j["dims"] = e.dims.to_string();
  j["coefficient_std"] = e.coefficient_std();
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

ojson vocab_json(const EncodingScheme& s, std::size_t max_dim,
                 const std::vector<std::string>& extra) {
  const Vocabulary v = build_vocabulary(s, max_dim, extra);
  return {{"scheme", s.name()},
          {"max_dim", max_dim},
          {"size", v.size()},
          {"fingerprint", hex64(v.fingerprint())}};
}

VocabularyInfo vocab_info(const ojson& j) {
  return {j.at("scheme").get<std::string>(), j.at("max_dim").get<std::size_t>(),
          j.at("size").get<std::size_t>(), j.at("fingerprint").get<std::string>()};
}

std::vector<double> flat(const Matrix& m) { return m.values(); }

}  // namespace

std::string library_version() { return LINSEQ_VERSION; }

std::string record_to_json(const ExampleRecord& r, bool include_values) {
  ojson j;
  j["task"] = std::string(to_string(r.task));
  j["index"] = r.index;
  j["seed"] = std::to_string(r.seed);
  j["m"] = r.m;
  j["n"] = r.n;
  if (r.prefix) j["prefix"] = *r.prefix;
  j["input_tokens"] = join_tokens(r.input_tokens);
  j["output_tokens"] = join_tokens(r.output_tokens);
  if (include_values) {
    j["clean_input"] = flat(r.clean_input);
    j["target"] = flat(r.target);
  }
  return j.dump();
}

DatasetRecord parse_record(std::string_view line) {
  try {
    const ojson j = ojson::parse(line);
    DatasetRecord r;
    r.task = parse_task_kind(j.at("task").get<std::string>());
    r.index = j.at("index").get<std::size_t>();
    r.seed = std::stoull(j.at("seed").get<std::string>());
    r.m = j.at("m").get<std::size_t>();
    r.n = j.at("n").get<std::size_t>();
    if (j.contains("prefix")) r.prefix = j["prefix"].get<std::string>();
    r.input_tokens = split_tokens(j.at("input_tokens").get<std::string>());
    r.output_tokens = split_tokens(j.at("output_tokens").get<std::string>());
    if (j.contains("clean_input")) r.clean_input = j["clean_input"].get<std::vector<double>>();
    if (j.contains("target")) r.target = j["target"].get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad dataset record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("bad dataset record: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw IoError(std::string("bad dataset record: ") + e.what());
  }
}

std::string manifest_path(const std::string& dataset_path) {
  return dataset_path + ".manifest.json";
}

std::size_t vocabulary_max_dim(const std::vector<WeightedTask>& tasks) {
  std::size_t d = 30;
  for (const auto& wt : tasks) {
    const auto& dims = wt.task.input_spec.dims;
    const Shape in = input_shape(wt.task.kind, dims.max_rows, dims.max_cols);
    const Shape out = output_shape(wt.task.kind, dims.max_rows, dims.max_cols);
    d = std::max({d, in.rows, in.cols, out.rows, out.cols});
  }
  return d;
}

std::vector<std::string> task_tokens(const std::vector<WeightedTask>& tasks) {
  std::vector<std::string> out;
  for (const auto& wt : tasks)
    if (wt.task.prefix) out.push_back(*wt.task.prefix);
  return out;
}

std::string manifest_json(const std::vector<WeightedTask>& tasks, bool joint, std::size_t count,
                          std::uint64_t seed) {
  ojson j;
  j["format"] = std::string(kDatasetFormat);
  j["format_version"] = kDatasetFormatVersion;
  j["library_version"] = library_version();
  j["seed"] = std::to_string(seed);
  j["count"] = count;
  j["joint"] = joint;
  ojson arr = ojson::array();
  for (const auto& wt : tasks) {
    const MatrixTask& t = wt.task;
    ojson e;
    e["name"] = std::string(to_string(t.kind));
    e["weight"] = wt.weight;
    e["prefix"] = t.prefix ? ojson(*t.prefix) : ojson(nullptr);
    e["scheme_in"] = t.scheme_in.name();
    e["scheme_out"] = t.scheme_out.name();
    e["ensemble"] = ensemble_json(t.input_spec);
    e["noise_level"] = t.noise_level;
    e["noisy_target"] = t.noisy_target;
    e["max_condition"] = t.max_condition ? ojson(*t.max_condition) : ojson(nullptr);
    e["max_input_tokens"] = t.max_input_tokens;
    e["max_attempts"] = t.max_attempts;
    arr.push_back(std::move(e));
  }
  j["tasks"] = std::move(arr);
  if (!tasks.empty()) {
    const std::size_t max_dim = vocabulary_max_dim(tasks);
    const auto extra = task_tokens(tasks);
    j["vocabulary"] = {{"input", vocab_json(tasks.front().task.scheme_in, max_dim, extra)},
                       {"output", vocab_json(tasks.front().task.scheme_out, max_dim, extra)}};
  }
  return j.dump(2);
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  try {
    const ojson j = ojson::parse(in);
    Manifest m;
    m.format = j.at("format").get<std::string>();
    if (m.format != kDatasetFormat) throw IoError("'" + path + "' is not a dataset manifest");
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion)
      throw IoError("unsupported dataset format version " + std::to_string(m.format_version));
    m.library_version = j.at("library_version").get<std::string>();
    m.seed = std::stoull(j.at("seed").get<std::string>());
    m.count = j.at("count").get<std::size_t>();
    m.joint = j.at("joint").get<bool>();
    for (const auto& e : j.at("tasks")) {
      ManifestTask t;
      t.kind = parse_task_kind(e.at("name").get<std::string>());
      t.weight = e.at("weight").get<double>();
      if (!e.at("prefix").is_null()) t.prefix = e["prefix"].get<std::string>();
      t.scheme_in = EncodingScheme::parse(e.at("scheme_in").get<std::string>());
      t.scheme_out = EncodingScheme::parse(e.at("scheme_out").get<std::string>());
      t.noise_level = e.at("noise_level").get<double>();
      t.noisy_target = e.at("noisy_target").get<bool>();
      m.tasks.push_back(std::move(t));
    }
    if (j.contains("vocabulary")) {
      m.vocab_in = vocab_info(j["vocabulary"].at("input"));
      m.vocab_out = vocab_info(j["vocabulary"].at("output"));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad manifest '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError("bad manifest '" + path + "': " + e.what());
  }
}

DatasetReader::DatasetReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open dataset '" + path + "'");
}

bool DatasetReader::next(DatasetRecord& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out = parse_record(line);
    } catch (const IoError& e) {
      throw IoError(path_ + ":" + std::to_string(line_) + ": " + e.what());
    }
    return true;
  }
  return false;
}

std::vector<DatasetRecord> read_dataset(const std::string& path) {
  DatasetReader reader(path);
  std::vector<DatasetRecord> out;
  DatasetRecord r;
  while (reader.next(r)) out.push_back(r);
  return out;
}

}  // namespace linseq
