#pragma once

// Synthetic stacking-behaviour data: 43-value records of a theme object being
// placed on a destination cube, the physics settling, and the final state.
//
// Feature layout (index: meaning)
//   0        numeric type id of the theme shape
//   1-4      orientation before the action (quaternion w,x,y,z)
//   5-7      action placement offset relative to the destination top centre
//   8-13     spatial relation flags: on_top/touching immediately after the
//            action, on_top/touching/supported after physics, off_edge
//   14-17    orientation after physics (quaternion)
//   18-20    position relative to the destination before the action
//   21-23    ... immediately after the action
//   24-26    ... after physics
//   27-29    settle linear displacement (after physics - immediately after)
//   30-32    settle angular displacement (axis * angle)
//   33-35    final linear velocity
//   36-38    final angular velocity
//   39-41    support polygon offset (x, z normalised by half-extent; area)
//   42       settle time in seconds

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace groundbridge {

inline constexpr std::size_t kFeatureCount = 43;
inline constexpr std::size_t kTypeIdFeature = 0;

enum class Shape : std::uint8_t {
  cube,
  sphere,
  cylinder,
  capsule,
  small_cube,
  egg,
  rectangular_prism,
  pyramid,
  cone,
};
inline constexpr std::size_t kShapeCount = 9;

enum class Orientation : std::uint8_t { not_applicable, flat_down, round_down };

enum class Supercategory : std::uint8_t { flat_sided, round };

// The 11 evaluation labels, in the fixed display order used by confusion
// matrices: cube, sphere, cyl-f, cyl-r, cpsl, scube, egg, rect, pyr, cone-f,
// cone-r.
enum class ObjectLabel : std::uint8_t {
  cube,
  sphere,
  cylinder_flat,
  cylinder_round,
  capsule,
  small_cube,
  egg,
  rectangular_prism,
  pyramid,
  cone_flat,
  cone_round,
};
inline constexpr std::size_t kLabelCount = 11;

struct ObjectClass {
  Shape shape = Shape::cube;
  Orientation orientation = Orientation::not_applicable;

  // Throws a configuration error when the orientation does not fit the shape.
  static ObjectClass make(Shape shape, Orientation orientation);
  friend bool operator==(const ObjectClass&, const ObjectClass&) = default;
};

bool has_orientation(Shape shape);
ObjectLabel label_of(ObjectClass cls);
ObjectClass class_of(ObjectLabel label);
Supercategory supercategory_of(ObjectLabel label);

const std::array<ObjectLabel, kLabelCount>& all_labels();
// cube, rectangular_prism, pyramid, small_cube, capsule, sphere, egg
const std::array<ObjectLabel, 7>& training_labels();
bool is_training_label(ObjectLabel label);

std::string_view shape_name(Shape shape);            // "rectangular_prism"
std::string_view orientation_name(Orientation o);    // "flat_down"
std::string_view label_display_name(ObjectLabel l);  // "cyl-f"
std::string_view label_key(ObjectLabel l);           // "cylinder_flat"
std::string_view supercategory_name(Supercategory s);
std::optional<Shape> parse_shape(std::string_view name);
std::optional<Orientation> parse_orientation(std::string_view name);
std::optional<ObjectLabel> parse_label(std::string_view name);  // key or display name

struct StackSample {
  std::array<double, kFeatureCount> features{};
  ObjectClass object;
  bool stack_success = false;

  ObjectLabel label() const { return label_of(object); }
};

// Norm of the settle linear displacement (features 27-29).
double settle_displacement(const StackSample& s);

struct GeneratorConfig {
  std::size_t samples_per_class = 700;  // per evaluation label
  double noise_scale = 0.05;            // bounded sensor noise amplitude
  double placement_tolerance = 0.25;    // max in-tolerance placement offset
  double misplacement_rate = 0.0;       // fraction of placements outside tolerance
  std::vector<ObjectLabel> labels;      // empty means all 11
  std::uint64_t seed = 7;

  void validate() const;
};

// Reads `key = value` lines (# comments). Keys: samples_per_class,
// noise_scale, placement_tolerance, misplacement_rate, seed, labels (comma
// separated label keys).
GeneratorConfig load_generator_config(const std::filesystem::path& path);

std::vector<StackSample> generate_dataset(const GeneratorConfig& config, std::uint64_t seed);

struct ScalerParams {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> std{};
  std::array<bool, kFeatureCount> constant{};

  std::array<double, kFeatureCount> transform(const std::array<double, kFeatureCount>& x) const;
  // Constant dimensions map back to their mean.
  std::array<double, kFeatureCount> inverse(const std::array<double, kFeatureCount>& z) const;
};

inline constexpr double kConstantStdThreshold = 1e-12;

ScalerParams fit_standardizer(std::span<const StackSample> samples);
StackSample standardize(const StackSample& s, const ScalerParams& scaler);

struct SplitConfig {
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 100;
  std::size_t index_per_class = 100;  // held-out reference set for retrieval
};

// Samples eligible for any split obey the success rule of their
// supercategory: flat-sided labels stacked, round labels did not.
bool follows_success_rule(const StackSample& s);

struct DatasetSplit {
  std::vector<StackSample> train;  // 7 training labels, standardized
  std::vector<StackSample> test;   // 11 labels, standardized
  std::vector<StackSample> index;  // 11 labels, standardized, disjoint from test
  ScalerParams scaler;
};

DatasetSplit build_split(std::span<const StackSample> samples, const SplitConfig& config,
                         std::uint64_t seed);

// Encoder input: the standardized features with the type id dropped unless
// `include_type_id` is set.
std::vector<double> encoder_input(const StackSample& s, bool include_type_id = false);

void write_dataset_csv(const std::filesystem::path& path, std::span<const StackSample> samples);
std::vector<StackSample> read_dataset_csv(const std::filesystem::path& path);
std::string dataset_csv_header();

}  // namespace groundbridge
