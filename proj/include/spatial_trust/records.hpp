#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace spatial_trust {

// Closed vocabulary of spatial relations. Unknown tokens are parse errors.
enum class Relation { kLeft, kRight, kAbove, kBelow, kNear };

inline constexpr Relation kAllRelations[] = {Relation::kLeft, Relation::kRight, Relation::kAbove,
                                             Relation::kBelow, Relation::kNear};

std::string_view to_string(Relation r);
std::optional<Relation> relation_from_string(std::string_view token);

// Pixel box in image coordinates (origin top-left, y grows downward).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  // Empty string when the box satisfies every invariant, otherwise the reason.
  std::string validate() const;

  bool operator==(const BoundingBox&) const = default;
};

struct Detection {
  std::string label;
  std::optional<BoundingBox> box;  // absent when the detector failed
  double score = 0.0;

  // Score as seen by downstream quality averaging: zero when the box is absent.
  double effective_score() const { return box ? score : 0.0; }

  bool operator==(const Detection&) const = default;
};

struct VlmPrediction {
  Relation relation = Relation::kLeft;
  double token_confidence = 0.0;

  bool operator==(const VlmPrediction&) const = default;
};

struct Sample {
  std::string sample_id;
  std::string image_id;
  std::string object_1;
  std::string object_2;
  Relation claimed_relation = Relation::kLeft;
  VlmPrediction prediction;
  Detection detection_1;
  Detection detection_2;
  bool label = false;  // VLM prediction correct
  std::optional<double> image_width;
  std::optional<double> image_height;

  bool operator==(const Sample&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.7;
  double validation_fraction = 0.3;
  std::uint64_t seed = 42;
};

struct Partitions {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string field;
  std::string message;

  std::string to_string() const;
};

struct ParseResult {
  std::vector<Sample> samples;
  std::vector<ParseIssue> issues;

  bool ok() const { return issues.empty(); }
};

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(std::vector<ParseIssue> issues);
  const std::vector<ParseIssue>& issues() const { return issues_; }

 private:
  std::vector<ParseIssue> issues_;
};

// Parses JSONL records. Blank lines and `{"_meta": ...}` header lines are skipped.
// Never throws on bad records; every rejected line is reported in `issues`.
ParseResult read_dataset(std::istream& in);

// Reads a JSONL file, throwing DatasetError listing every bad line.
std::vector<Sample> parse_dataset(const std::string& path);

// Converts one JSON object into a Sample, throwing std::invalid_argument
// with the message "<field>: <reason>" on the first violated invariant.
Sample sample_from_json(const nlohmann::json& j);
nlohmann::ordered_json sample_to_json(const Sample& s);

void write_dataset(std::ostream& out, const std::vector<Sample>& samples);
void write_dataset(const std::string& path, const std::vector<Sample>& samples);

// Seeded, sample_id-keyed shuffle then slice. Stable under input reordering.
Partitions split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec);

// 64-bit key used to order samples in split_dataset.
std::uint64_t split_key(std::string_view sample_id, std::uint64_t seed);

}  // namespace spatial_trust
