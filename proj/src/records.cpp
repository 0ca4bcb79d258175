#include "spatial_trust/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace spatial_trust {

namespace {

using nlohmann::json;

// Field error carrying the field name separately from the reason.
struct FieldError : std::invalid_argument {
  FieldError(std::string f, const std::string& reason)
      : std::invalid_argument(f + ": " + reason), field(std::move(f)), reason(reason) {}
  std::string field;
  std::string reason;
};

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw FieldError(path + key, "missing required field");
  return *it;
}

std::string require_string(const json& j, const std::string& key, const std::string& path = "") {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw FieldError(path + key, "expected a string");
  return v.get<std::string>();
}

double require_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw FieldError(field, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw FieldError(field, "not finite");
  return x;
}

double require_unit(const json& j, const std::string& key, const std::string& path,
                    const std::string& what) {
  double x = require_number(require(j, key, path), path + key);
  if (x < 0.0 || x > 1.0) throw FieldError(path + key, what + " out of range [0,1]");
  return x;
}

Relation require_relation(const json& j, const std::string& key) {
  std::string token = require_string(j, key);
  auto r = relation_from_string(token);
  if (!r) throw FieldError(key, "unknown relation token '" + token + "'");
  return *r;
}

BoundingBox parse_box(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 4) throw FieldError(field, "expected [x_min,y_min,x_max,y_max]");
  BoundingBox b{require_number(v[0], field), require_number(v[1], field), require_number(v[2], field),
                require_number(v[3], field)};
  if (std::string why = b.validate(); !why.empty()) throw FieldError(field, why);
  return b;
}

Detection parse_detection(const json& j, const std::string& key) {
  const json& d = require(j, key, "");
  if (!d.is_object()) throw FieldError(key, "expected an object");
  const std::string path = key + ".";
  Detection det;
  det.label = require_string(d, "label", path);
  det.score = require_unit(d, "score", path, "score");
  const json& box = require(d, "box", path);
  if (!box.is_null()) det.box = parse_box(box, path + "box");
  return det;
}

std::optional<double> optional_positive(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  double x = require_number(*it, key);
  if (x <= 0.0) throw FieldError(key, "must be positive");
  return x;
}

json box_json(const std::optional<BoundingBox>& b) {
  if (!b) return nullptr;
  return json::array({b->x_min, b->y_min, b->x_max, b->y_max});
}

nlohmann::ordered_json detection_json(const Detection& d) {
  nlohmann::ordered_json j;
  j["label"] = d.label;
  j["score"] = d.score;
  j["box"] = box_json(d.box);
  return j;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kLeft: return "left";
    case Relation::kRight: return "right";
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
    case Relation::kNear: return "near";
  }
  return "?";
}

std::optional<Relation> relation_from_string(std::string_view token) {
  for (Relation r : kAllRelations) {
    if (to_string(r) == token) return r;
  }
  return std::nullopt;
}

std::string BoundingBox::validate() const {
  for (double v : {x_min, y_min, x_max, y_max}) {
    if (!std::isfinite(v)) return "non-finite coordinate";
    if (v < 0.0) return "negative coordinate";
  }
  if (!(x_min < x_max) || !(y_min < y_max)) return "degenerate box";
  return {};
}

std::string ParseIssue::to_string() const {
  std::ostringstream os;
  os << "line " << line;
  if (!field.empty()) os << ", field '" << field << "'";
  os << ": " << message;
  return os.str();
}

DatasetError::DatasetError(std::vector<ParseIssue> issues)
    : std::runtime_error([&] {
        std::string msg = std::to_string(issues.size()) + " invalid record(s)";
        for (std::size_t i = 0; i < issues.size() && i < 10; ++i) msg += "\n  " + issues[i].to_string();
        return msg;
      }()),
      issues_(std::move(issues)) {}

Sample sample_from_json(const json& j) {
  if (!j.is_object()) throw FieldError("", "expected a JSON object");
  Sample s;
  s.sample_id = require_string(j, "sample_id");
  if (s.sample_id.empty()) throw FieldError("sample_id", "empty");
  s.image_id = require_string(j, "image_id");
  s.object_1 = require_string(j, "object_1");
  s.object_2 = require_string(j, "object_2");
  s.claimed_relation = require_relation(j, "claimed_relation");
  s.prediction.relation = require_relation(j, "vlm_relation");
  s.prediction.token_confidence = require_unit(j, "vlm_token_confidence", "", "token confidence");
  s.detection_1 = parse_detection(j, "det1");
  s.detection_2 = parse_detection(j, "det2");
  if (s.detection_1.label != s.object_1) throw FieldError("det1.label", "does not match object_1");
  if (s.detection_2.label != s.object_2) throw FieldError("det2.label", "does not match object_2");
  const json& label = require(j, "label", "");
  if (!label.is_boolean()) throw FieldError("label", "expected true or false");
  s.label = label.get<bool>();
  s.image_width = optional_positive(j, "image_width");
  s.image_height = optional_positive(j, "image_height");
  return s;
}

nlohmann::ordered_json sample_to_json(const Sample& s) {
  nlohmann::ordered_json j;
  j["sample_id"] = s.sample_id;
  j["image_id"] = s.image_id;
  j["object_1"] = s.object_1;
  j["object_2"] = s.object_2;
  j["claimed_relation"] = to_string(s.claimed_relation);
  j["vlm_relation"] = to_string(s.prediction.relation);
  j["vlm_token_confidence"] = s.prediction.token_confidence;
  j["det1"] = detection_json(s.detection_1);
  j["det2"] = detection_json(s.detection_2);
  j["label"] = s.label;
  j["image_width"] = s.image_width ? json(*s.image_width) : json(nullptr);
  j["image_height"] = s.image_height ? json(*s.image_height) : json(nullptr);
  return j;
}

ParseResult read_dataset(std::istream& in) {
  ParseResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      result.issues.push_back({line_no, "", std::string("malformed JSON: ") + e.what()});
      continue;
    }
    if (j.is_object() && j.contains("_meta")) continue;
    try {
      Sample s = sample_from_json(j);
      if (!seen.insert(s.sample_id).second) {
        result.issues.push_back({line_no, "sample_id", "duplicate sample_id '" + s.sample_id + "'"});
        continue;
      }
      result.samples.push_back(std::move(s));
    } catch (const FieldError& e) {
      result.issues.push_back({line_no, e.field, e.reason});
    } catch (const json::exception& e) {
      result.issues.push_back({line_no, "", e.what()});
    }
  }
  return result;
}

std::vector<Sample> parse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  ParseResult r = read_dataset(in);
  if (!r.ok()) throw DatasetError(std::move(r.issues));
  return std::move(r.samples);
}

void write_dataset(std::ostream& out, const std::vector<Sample>& samples) {
  for (const Sample& s : samples) out << sample_to_json(s).dump() << '\n';
}

void write_dataset(const std::string& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_dataset(out, samples);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::uint64_t split_key(std::string_view sample_id, std::uint64_t seed) {
  // FNV-1a over the id, then mixed with the seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(seed));
}

Partitions split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec) {
  if (spec.train_fraction < 0.0 || spec.train_fraction > 1.0 || spec.validation_fraction < 0.0 ||
      spec.validation_fraction > 1.0) {
    throw std::invalid_argument("split fractions must lie in [0,1]");
  }
  if (spec.train_fraction + spec.validation_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("split fractions exceed 1");
  }
  if (samples.size() < 3) throw std::invalid_argument("split needs at least 3 samples");

  std::vector<std::tuple<std::uint64_t, const std::string*, std::size_t>> order;
  order.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    order.emplace_back(split_key(samples[i].sample_id, spec.seed), &samples[i].sample_id, i);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return *std::get<1>(a) < *std::get<1>(b);
  });

  const double n = static_cast<double>(samples.size());
  // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
  const auto n_train = static_cast<std::size_t>(std::floor(n * spec.train_fraction + 1e-9));
  const auto n_val = std::min(samples.size() - n_train,
                              static_cast<std::size_t>(std::floor(n * spec.validation_fraction + 1e-9)));

  Partitions p;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Sample& s = samples[std::get<2>(order[k])];
    if (k < n_train) {
      p.train.push_back(s);
    } else if (k < n_train + n_val) {
      p.validation.push_back(s);
    } else {
      p.test.push_back(s);
    }
  }
  return p;
}

}  // namespace spatial_trust
