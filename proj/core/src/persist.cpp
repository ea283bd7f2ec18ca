#include "groundbridge/persist.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"

namespace groundbridge {

using nlohmann::json;

namespace {

json header(const char* format) {
  json j;
  j["format"] = format;
  j["version"] = kFormatVersion;
  return j;
}

json parse_document(const std::string& text, const char* format) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::format, std::string(format) + ": " + e.what());
  }
  require(j.is_object(), ErrorKind::format, std::string(format) + ": document must be a JSON object");
  require(j.value("format", "") == format, ErrorKind::format,
          std::string("expected a '") + format + "' document, found '" + j.value("format", "") + "'");
  const auto it = j.find("version");
  require(it != j.end() && it->is_string(), ErrorKind::format, std::string(format) + ": missing version");
  const std::string v = it->get<std::string>();
  long long major = 0;
  try {
    major = csv::parse_int(v.substr(0, v.find('.')));
  } catch (const Error&) {
    fail(ErrorKind::format, std::string(format) + ": malformed version '" + v + "'");
  }
  require(major == 1, ErrorKind::format,
          std::string(format) + " version " + v + " is not supported (this build reads 1.x)");
  return j;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  require(it != j.end(), ErrorKind::format, std::string("missing field '") + key + "'");
  return *it;
}

std::vector<double> doubles(const json& j, const char* what) {
  require(j.is_array(), ErrorKind::format, std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    require(v.is_number(), ErrorKind::format, std::string(what) + " holds a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

json finite_array(std::span<const double> xs, const char* what) {
  for (double v : xs) require(std::isfinite(v), ErrorKind::numeric, std::string("cannot persist non-finite ") + what);
  return json(std::vector<double>(xs.begin(), xs.end()));
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed document: ") + e.what());
  }
}

std::string layer_name(std::size_t l) { return "conv" + std::to_string(l + 1); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = csv::open_out(path);
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

std::string params_to_json(const EncoderParams& params) {
  const auto& lay = params.layout;
  json j = header("groundbridge-encoder");
  j["input_length"] = lay.input_length();
  json specs = json::array();
  json arrays = json::object();
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const auto& c = lay.conv(l);
    specs.push_back({{"name", layer_name(l)},
                     {"kind", "conv1d"},
                     {"in_channels", c.in_channels},
                     {"out_channels", c.out_channels},
                     {"kernel", kKernel},
                     {"pool", c.pooled ? kPoolWindow : 1}});
    arrays[layer_name(l) + ".weight"] = finite_array(params.conv_weight(l), "weights");
    arrays[layer_name(l) + ".bias"] = finite_array(params.conv_bias(l), "weights");
  }
  specs.push_back({{"name", "dense"}, {"kind", "dense"}, {"in", lay.flat_dim()}, {"out", kEmbeddingDim}});
  arrays["dense.weight"] = finite_array(params.dense_weight(), "weights");
  arrays["dense.bias"] = finite_array(params.dense_bias(), "weights");
  j["layer_specs"] = specs;
  j["arrays"] = arrays;
  return j.dump() + "\n";
}

namespace {

EncoderParams params_from_json_impl(const std::string& text) {
  const json j = parse_document(text, "groundbridge-encoder");
  const auto input_length = field(j, "input_length").get<std::size_t>();
  EncoderParams params{EncoderLayout(input_length)};
  const auto& lay = params.layout;

  const auto& specs = field(j, "layer_specs");
  require(specs.is_array() && specs.size() == kConvLayers + 1, ErrorKind::shape, "expected 5 layer specs");
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const auto& s = specs[l];
    require(s.value("in_channels", 0u) == lay.conv(l).in_channels &&
                s.value("out_channels", 0u) == lay.conv(l).out_channels && s.value("kernel", 0u) == kKernel,
            ErrorKind::shape, "layer spec " + layer_name(l) + " does not match the encoder architecture");
  }
  require(specs[kConvLayers].value("in", 0u) == lay.flat_dim() &&
              specs[kConvLayers].value("out", 0u) == kEmbeddingDim,
          ErrorKind::shape, "dense layer spec does not match the encoder architecture");

  const auto& arrays = field(j, "arrays");
  auto load = [&](const std::string& name, std::span<double> dst) {
    const auto v = doubles(field(arrays, name.c_str()), name.c_str());
    require(v.size() == dst.size(), ErrorKind::shape,
            name + " has " + std::to_string(v.size()) + " values, expected " + std::to_string(dst.size()));
    std::copy(v.begin(), v.end(), dst.begin());
  };
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    load(layer_name(l) + ".weight", params.conv_weight(l));
    load(layer_name(l) + ".bias", params.conv_bias(l));
  }
  load("dense.weight", params.dense_weight());
  load("dense.bias", params.dense_bias());
  return params;
}

}  // namespace

EncoderParams params_from_json(const std::string& text) {
  return guarded([&] { return params_from_json_impl(text); });
}

void save_params(const std::filesystem::path& path, const EncoderParams& params) {
  write_text_file(path, params_to_json(params));
}

EncoderParams load_params(const std::filesystem::path& path) { return params_from_json(read_text_file(path)); }

std::string map_to_json(const AffineMap& map) {
  json j = header("groundbridge-map");
  j["d"] = map.dim;
  j["lambda"] = map.lambda;
  j["fitted_on"] = map.fitted_on;
  j["residual_mse"] = map.residual_mse;
  j["weights"] = finite_array(map.weights, "map weights");
  j["offset"] = finite_array(map.offset, "map offset");
  return j.dump() + "\n";
}

namespace {

AffineMap map_from_json_impl(const std::string& text) {
  const json j = parse_document(text, "groundbridge-map");
  AffineMap m;
  m.dim = field(j, "d").get<std::size_t>();
  m.lambda = field(j, "lambda").get<double>();
  m.fitted_on = field(j, "fitted_on").get<std::vector<std::string>>();
  m.residual_mse = j.value("residual_mse", 0.0);
  m.weights = doubles(field(j, "weights"), "weights");
  m.offset = doubles(field(j, "offset"), "offset");
  require(m.weights.size() == m.dim * kEmbeddingDim, ErrorKind::shape, "map weights do not match d x 64");
  require(m.offset.size() == kEmbeddingDim, ErrorKind::shape, "map offset must have 64 entries");
  return m;
}

}  // namespace

AffineMap map_from_json(const std::string& text) {
  return guarded([&] { return map_from_json_impl(text); });
}

void save_map(const std::filesystem::path& path, const AffineMap& map) { write_text_file(path, map_to_json(map)); }
AffineMap load_map(const std::filesystem::path& path) { return map_from_json(read_text_file(path)); }

std::string index_to_json(const ObjectIndex& index) {
  json j = header("groundbridge-index");
  j["dim"] = kEmbeddingDim;
  json entries = json::array();
  for (std::size_t i = 0; i < index.size(); ++i) {
    entries.push_back({{"label", label_key(index.label(i))}, {"embedding", index.embedding(i)}});
  }
  j["entries"] = entries;
  return j.dump() + "\n";
}

namespace {

ObjectIndex index_from_json_impl(const std::string& text) {
  const json j = parse_document(text, "groundbridge-index");
  require(field(j, "dim").get<std::size_t>() == kEmbeddingDim, ErrorKind::shape, "index dimension must be 64");
  ObjectIndex index;
  for (const auto& e : field(j, "entries")) {
    const auto name = field(e, "label").get<std::string>();
    const auto label = parse_label(name);
    require(label.has_value(), ErrorKind::format, "unknown object label '" + name + "'");
    index.add(doubles(field(e, "embedding"), "embedding"), *label);
  }
  return index;
}

}  // namespace

ObjectIndex index_from_json(const std::string& text) {
  return guarded([&] { return index_from_json_impl(text); });
}

void save_index(const std::filesystem::path& path, const ObjectIndex& index) {
  write_text_file(path, index_to_json(index));
}
ObjectIndex load_index(const std::filesystem::path& path) { return index_from_json(read_text_file(path)); }

namespace {

json rule_json(const LabelRule& r) {
  const bool sup = r.kind == LabelRule::Kind::supercategory;
  auto name = [&](int v) {
    return sup ? std::string(supercategory_name(static_cast<Supercategory>(v)))
               : std::string(label_key(static_cast<ObjectLabel>(v)));
  };
  return {{"kind", sup ? "supercategory" : "object"}, {"a", name(r.a)}, {"b", name(r.b)}};
}

LabelRule rule_from(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  const auto a = field(j, "a").get<std::string>();
  const auto b = field(j, "b").get<std::string>();
  if (kind == "supercategory") {
    auto parse = [](const std::string& s) {
      for (auto c : {Supercategory::flat_sided, Supercategory::round}) {
        if (supercategory_name(c) == s) return static_cast<int>(c);
      }
      fail(ErrorKind::format, "unknown supercategory '" + s + "'");
    };
    return LabelRule{LabelRule::Kind::supercategory, parse(a), parse(b)};
  }
  require(kind == "object", ErrorKind::format, "unknown label rule '" + kind + "'");
  const auto la = parse_label(a);
  const auto lb = parse_label(b);
  require(la && lb, ErrorKind::format, "unknown object label in rule");
  return LabelRule::objects(*la, *lb);
}

}  // namespace

std::string run_to_json(const CurriculumRun& run) {
  json j = header("groundbridge-run");
  j["curriculum"] = run.curriculum;
  j["model_tag"] = run.model_tag;
  j["lambda"] = run.lambda;
  json pairs = json::array();
  for (const auto& p : run.eval_pairs) {
    json pj = {{"name", p.name}, {"word_a", p.word_a}, {"word_b", p.word_b}, {"rule", rule_json(p.rule)}};
    pj["hint_stage"] = p.hint_stage ? json(*p.hint_stage) : json(nullptr);
    pairs.push_back(pj);
  }
  j["eval_pairs"] = pairs;
  json stages = json::array();
  for (const auto& s : run.stages) {
    json evals = json::array();
    for (const auto& e : s.evals) {
      evals.push_back({{"pair", e.pair},
                       {"center_cosine", e.center_cosine},
                       {"macro_f1", e.knn.macro_f1},
                       {"f1", e.knn.f1},
                       {"support", e.knn.support},
                       {"hinted", e.knn.hinted}});
    }
    stages.push_back({{"label", s.label}, {"hint", s.hint}, {"fitted_on", s.map.fitted_on}, {"evals", evals}});
  }
  j["stages"] = stages;
  json points = json::array();
  for (const auto& t : run.final_points) {
    points.push_back({{"word", t.word},
                      {"sentence_id", t.sentence_id},
                      {"gold", t.gold},
                      {"pair", t.pair},
                      {"vector", finite_array(t.vector, "transformed vector")}});
  }
  j["final_points"] = points;
  return j.dump() + "\n";
}

namespace {

CurriculumRun run_from_json_impl(const std::string& text) {
  const json j = parse_document(text, "groundbridge-run");
  CurriculumRun run;
  run.curriculum = field(j, "curriculum").get<std::string>();
  run.model_tag = field(j, "model_tag").get<std::string>();
  run.lambda = field(j, "lambda").get<double>();
  for (const auto& p : field(j, "eval_pairs")) {
    EvalPairSpec spec{field(p, "name").get<std::string>(), field(p, "word_a").get<std::string>(),
                      field(p, "word_b").get<std::string>(), rule_from(field(p, "rule")), std::nullopt};
    if (const auto& h = field(p, "hint_stage"); !h.is_null()) spec.hint_stage = h.get<std::size_t>();
    run.eval_pairs.push_back(std::move(spec));
  }
  for (const auto& s : field(j, "stages")) {
    StageResult sr;
    sr.label = field(s, "label").get<std::string>();
    sr.hint = field(s, "hint").get<bool>();
    sr.map.fitted_on = s.value("fitted_on", std::vector<std::string>{});
    for (const auto& e : field(s, "evals")) {
      PairEval pe;
      pe.pair = field(e, "pair").get<std::string>();
      pe.center_cosine = field(e, "center_cosine").get<double>();
      pe.knn.pair = pe.pair;
      pe.knn.macro_f1 = field(e, "macro_f1").get<double>();
      pe.knn.f1 = field(e, "f1").get<std::array<double, 2>>();
      pe.knn.support = field(e, "support").get<std::array<std::size_t, 2>>();
      pe.knn.hinted = field(e, "hinted").get<bool>();
      sr.evals.push_back(std::move(pe));
    }
    require(sr.evals.size() == run.eval_pairs.size(), ErrorKind::format,
            "stage '" + sr.label + "' does not evaluate every pair");
    run.stages.push_back(std::move(sr));
  }
  for (const auto& t : field(j, "final_points")) {
    run.final_points.push_back(TransformedToken{field(t, "word").get<std::string>(),
                                                field(t, "sentence_id").get<std::string>(),
                                                field(t, "gold").get<int>(), field(t, "pair").get<std::string>(),
                                                doubles(field(t, "vector"), "vector")});
  }
  return run;
}

}  // namespace

CurriculumRun run_from_json(const std::string& text) {
  return guarded([&] { return run_from_json_impl(text); });
}

void save_run(const std::filesystem::path& path, const CurriculumRun& run) { write_text_file(path, run_to_json(run)); }
CurriculumRun load_run(const std::filesystem::path& path) { return run_from_json(read_text_file(path)); }

}  // namespace groundbridge
