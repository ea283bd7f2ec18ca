#include "groundbridge/datasim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"
#include "groundbridge/seeding.hpp"

namespace groundbridge {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<ObjectLabel, kLabelCount> kAllLabels = {
    ObjectLabel::cube,          ObjectLabel::sphere,     ObjectLabel::cylinder_flat,
    ObjectLabel::cylinder_round, ObjectLabel::capsule,   ObjectLabel::small_cube,
    ObjectLabel::egg,           ObjectLabel::rectangular_prism, ObjectLabel::pyramid,
    ObjectLabel::cone_flat,     ObjectLabel::cone_round,
};

constexpr std::array<ObjectLabel, 7> kTrainingLabels = {
    ObjectLabel::cube,    ObjectLabel::rectangular_prism, ObjectLabel::pyramid,
    ObjectLabel::small_cube, ObjectLabel::capsule,        ObjectLabel::sphere,
    ObjectLabel::egg,
};

constexpr std::array<std::string_view, kShapeCount> kShapeNames = {
    "cube", "sphere", "cylinder", "capsule", "small_cube", "egg", "rectangular_prism", "pyramid", "cone",
};

constexpr std::array<std::string_view, kLabelCount> kDisplayNames = {
    "cube", "sphere", "cyl-f", "cyl-r", "cpsl", "scube", "egg", "rect", "pyr", "cone-f", "cone-r",
};

constexpr std::array<std::string_view, kLabelCount> kLabelKeys = {
    "cube",    "sphere",     "cylinder_flat",     "cylinder_round", "capsule",   "small_cube",
    "egg",     "rectangular_prism", "pyramid",   "cone_flat",      "cone_round",
};

enum class Pose { upright, lying, tumbling };

// Class-conditional behaviour of one evaluation label.
struct Profile {
  bool round = false;
  Pose pose = Pose::upright;
  double yaw_period = 2 * kPi;
  double com_height = 0.5;  // centre of mass above the supporting surface
  double half_x = 0.5;      // footprint half-extents (flat classes)
  double half_z = 0.5;
  double support_area = 1.0;
  double support_scale = 1.0;  // multiplies all support-polygon features
  double settle_lo = 0.15, settle_hi = 0.25;
  // round classes
  double roll_radius = 0.5;
  double speed_lo = 0.0, speed_hi = 0.0;
  double direction_jitter = 0.0;  // half-width in radians
  double wobble = 0.0;            // extra rotation about the vertical axis
  bool radial_roll = false;       // rolls away from the placement offset
};

Profile profile_of(ObjectLabel label) {
  Profile p;
  switch (label) {
    case ObjectLabel::cube:
      p.yaw_period = kPi / 2;
      p.settle_lo = 0.10, p.settle_hi = 0.16;
      break;
    case ObjectLabel::small_cube:
      p.yaw_period = kPi / 2;
      p.support_scale = 0.5;
      p.settle_lo = 0.10, p.settle_hi = 0.16;
      break;
    case ObjectLabel::rectangular_prism:
      p.yaw_period = kPi;
      p.com_height = 0.3;
      p.half_x = 1.0;
      p.support_area = 2.0;
      p.settle_lo = 0.22, p.settle_hi = 0.28;
      break;
    case ObjectLabel::pyramid:
      p.yaw_period = kPi / 2;
      p.com_height = 0.4;
      p.settle_lo = 0.34, p.settle_hi = 0.40;
      break;
    case ObjectLabel::cylinder_flat:
      p.com_height = 0.6;
      p.support_area = kPi / 4;
      p.settle_lo = 0.46, p.settle_hi = 0.52;
      break;
    case ObjectLabel::cone_flat:
      p.com_height = 0.2;
      p.support_area = kPi / 4;
      p.settle_lo = 0.58, p.settle_hi = 0.64;
      break;
    case ObjectLabel::sphere:
      p.round = true;
      p.pose = Pose::tumbling;
      p.com_height = 0.5;
      p.support_area = 0.0;
      p.roll_radius = 0.5;
      p.speed_lo = 1.1, p.speed_hi = 1.4;
      p.settle_lo = 2.6, p.settle_hi = 3.0;
      p.direction_jitter = 0.2;
      p.radial_roll = true;
      break;
    case ObjectLabel::capsule:
      p.round = true;
      p.pose = Pose::lying;
      p.com_height = 0.25;
      p.support_area = 0.1;
      p.roll_radius = 0.25;
      p.speed_lo = 0.45, p.speed_hi = 0.6;
      p.settle_lo = 2.0, p.settle_hi = 2.3;
      p.direction_jitter = 0.05;
      break;
    case ObjectLabel::egg:
      p.round = true;
      p.pose = Pose::lying;
      p.com_height = 0.35;
      p.support_area = 0.0;
      p.roll_radius = 0.35;
      p.speed_lo = 0.25, p.speed_hi = 0.4;
      p.settle_lo = 3.1, p.settle_hi = 3.5;
      p.direction_jitter = kPi / 6;
      p.wobble = 1.0;
      break;
    case ObjectLabel::cylinder_round:
      p.round = true;
      p.pose = Pose::lying;
      p.com_height = 0.4;
      p.support_area = 0.3;
      p.roll_radius = 0.4;
      p.speed_lo = 0.6, p.speed_hi = 0.8;
      p.settle_lo = 1.6, p.settle_hi = 1.9;
      p.direction_jitter = 0.05;
      break;
    case ObjectLabel::cone_round:
      p.round = true;
      p.pose = Pose::lying;
      p.com_height = 0.3;
      p.support_area = 0.15;
      p.roll_radius = 0.3;
      p.speed_lo = 0.1, p.speed_hi = 0.2;
      p.settle_lo = 1.0, p.settle_hi = 1.3;
      p.direction_jitter = 0.3;
      p.wobble = 2.5;  // precession about the apex
      break;
  }
  return p;
}

using Quat = std::array<double, 4>;  // w, x, y, z

Quat quat_mul(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Quat axis_angle(double ax, double ay, double az, double angle) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (n < 1e-15) return {1.0, 0.0, 0.0, 0.0};
  const double s = std::sin(angle / 2) / n;
  return {std::cos(angle / 2), ax * s, ay * s, az * s};
}

Quat canonical(Quat q) {
  if (q[0] < 0) {
    for (auto& c : q) c = -c;
  }
  return q;
}

Quat random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  return {a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2), b * std::sin(2 * kPi * u3),
          b * std::cos(2 * kPi * u3)};
}

StackSample generate_one(ObjectLabel label, const GeneratorConfig& cfg, Rng& rng) {
  const Profile p = profile_of(label);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  StackSample s;
  s.object = class_of(label);
  auto& f = s.features;
  f[0] = static_cast<double>(static_cast<int>(s.object.shape));

  // Orientation before the action.
  const double yaw = uniform(0.0, p.yaw_period);
  Quat before{};
  switch (p.pose) {
    case Pose::upright: before = axis_angle(0, 1, 0, yaw); break;
    case Pose::lying: before = quat_mul(axis_angle(0, 1, 0, yaw), axis_angle(1, 0, 0, kPi / 2)); break;
    case Pose::tumbling: before = random_rotation(rng); break;
  }
  before = canonical(before);
  for (int i = 0; i < 4; ++i) f[1 + i] = before[i];

  // Placement offset: uniform on a disk, scaled outside tolerance when misplaced.
  const bool misplaced = !p.round && unit(rng) < cfg.misplacement_rate;
  const double off_angle = uniform(0.0, 2 * kPi);
  double off_r = 0.8 * cfg.placement_tolerance * std::sqrt(unit(rng));
  if (misplaced) off_r = cfg.placement_tolerance * uniform(1.2, 2.0);
  const double off_x = off_r * std::cos(off_angle);
  const double off_z = off_r * std::sin(off_angle);
  f[5] = off_x;
  f[6] = 0.0;
  f[7] = off_z;

  const bool falls = p.round || misplaced;
  s.stack_success = !falls;

  // Positions relative to the destination (destination top at y = 0.5).
  const double before_x = uniform(-3.0, 3.0);
  const double before_z = uniform(-3.0, 3.0);
  f[18] = before_x;
  f[19] = -0.5 + p.com_height;
  f[20] = before_z;
  f[21] = off_x;
  f[22] = 0.5 + p.com_height;
  f[23] = off_z;

  std::array<double, 3> disp{};
  std::array<double, 3> ang_disp{};
  std::array<double, 3> vel{};
  std::array<double, 3> ang_vel{};
  double settle_time = 0.0;

  if (!falls) {
    const double drift = uniform(0.0, 0.04);
    const double drift_dir = uniform(0.0, 2 * kPi);
    disp = {drift * std::cos(drift_dir), 0.0, drift * std::sin(drift_dir)};
    settle_time = uniform(p.settle_lo, p.settle_hi);
  } else {
    double theta = 0.0;
    if (misplaced || p.radial_roll) {
      theta = off_angle;
    } else {
      // Lying bodies roll perpendicular to their long axis, away from the offset.
      const double perp = yaw + kPi / 2;
      const double side = std::cos(off_angle - perp) >= 0 ? 0.0 : kPi;
      theta = perp + side;
    }
    theta += uniform(-p.direction_jitter, p.direction_jitter);
    const double dist = misplaced ? uniform(0.3, 1.0) : uniform(0.5, 2.0);
    const double ux = std::cos(theta), uz = std::sin(theta);
    disp = {dist * ux, -1.0, dist * uz};
    const double radius = misplaced ? 0.5 : p.roll_radius;
    // Rolling in direction u rotates about (uz, 0, -ux).
    const double roll = dist / radius;
    ang_disp = {uz * roll, p.wobble * uniform(0.5, 1.0), -ux * roll};
    const double speed = misplaced ? uniform(0.1, 0.3) : uniform(p.speed_lo, p.speed_hi);
    vel = {speed * ux, 0.0, speed * uz};
    ang_vel = {uz * speed / radius, p.wobble * speed, -ux * speed / radius};
    settle_time = misplaced ? uniform(0.8, 1.2) : uniform(p.settle_lo, p.settle_hi);
  }

  // Orientation after physics.
  const double ang = std::sqrt(ang_disp[0] * ang_disp[0] + ang_disp[1] * ang_disp[1] +
                               ang_disp[2] * ang_disp[2]);
  const Quat after = canonical(quat_mul(axis_angle(ang_disp[0], ang_disp[1], ang_disp[2], ang), before));
  for (int i = 0; i < 4; ++i) f[14 + i] = after[i];

  // Relation flags.
  f[8] = 1.0;                // on_top immediately after the action
  f[9] = 1.0;                // touching immediately after the action
  f[10] = falls ? 0.0 : 1.0;  // on_top after physics
  f[11] = falls ? 0.0 : 1.0;  // touching after physics
  f[12] = falls ? 0.0 : 1.0;  // supported after physics
  f[13] = falls ? 1.0 : 0.0;  // off_edge

  for (int i = 0; i < 3; ++i) {
    f[24 + i] = f[21 + i] + disp[i];
    f[27 + i] = disp[i];
    f[30 + i] = ang_disp[i];
    f[33 + i] = vel[i];
    f[36 + i] = ang_vel[i];
  }

  if (p.round) {
    f[39] = 0.0;
    f[40] = 0.0;
    f[41] = p.support_area;
  } else {
    f[39] = off_x / p.half_x * p.support_scale;
    f[40] = off_z / p.half_z * p.support_scale;
    f[41] = p.support_area * p.support_scale;
  }
  f[42] = settle_time;

  // Bounded sensor noise on every continuous feature. The displacement
  // components share a budget so the displacement norm moves by at most
  // noise_scale.
  const double n = cfg.noise_scale;
  if (n > 0) {
    for (std::size_t i = 1; i < kFeatureCount; ++i) {
      if (i >= 8 && i <= 13) continue;
      const double half = (i >= 27 && i <= 29) ? n / std::sqrt(3.0) : n;
      f[i] += uniform(-half, half);
    }
  }
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ObjectClass ObjectClass::make(Shape shape, Orientation orientation) {
  const bool needs = has_orientation(shape);
  require(needs == (orientation != Orientation::not_applicable), ErrorKind::config,
          std::string("orientation '") + std::string(orientation_name(orientation)) +
              "' is not valid for " + std::string(shape_name(shape)));
  return ObjectClass{shape, orientation};
}

bool has_orientation(Shape shape) { return shape == Shape::cylinder || shape == Shape::cone; }

ObjectLabel label_of(ObjectClass cls) {
  switch (cls.shape) {
    case Shape::cube: return ObjectLabel::cube;
    case Shape::sphere: return ObjectLabel::sphere;
    case Shape::capsule: return ObjectLabel::capsule;
    case Shape::small_cube: return ObjectLabel::small_cube;
    case Shape::egg: return ObjectLabel::egg;
    case Shape::rectangular_prism: return ObjectLabel::rectangular_prism;
    case Shape::pyramid: return ObjectLabel::pyramid;
    case Shape::cylinder:
      return cls.orientation == Orientation::round_down ? ObjectLabel::cylinder_round
                                                        : ObjectLabel::cylinder_flat;
    case Shape::cone:
      return cls.orientation == Orientation::round_down ? ObjectLabel::cone_round : ObjectLabel::cone_flat;
  }
  return ObjectLabel::cube;
}

ObjectClass class_of(ObjectLabel label) {
  switch (label) {
    case ObjectLabel::cube: return {Shape::cube, Orientation::not_applicable};
    case ObjectLabel::sphere: return {Shape::sphere, Orientation::not_applicable};
    case ObjectLabel::cylinder_flat: return {Shape::cylinder, Orientation::flat_down};
    case ObjectLabel::cylinder_round: return {Shape::cylinder, Orientation::round_down};
    case ObjectLabel::capsule: return {Shape::capsule, Orientation::not_applicable};
    case ObjectLabel::small_cube: return {Shape::small_cube, Orientation::not_applicable};
    case ObjectLabel::egg: return {Shape::egg, Orientation::not_applicable};
    case ObjectLabel::rectangular_prism: return {Shape::rectangular_prism, Orientation::not_applicable};
    case ObjectLabel::pyramid: return {Shape::pyramid, Orientation::not_applicable};
    case ObjectLabel::cone_flat: return {Shape::cone, Orientation::flat_down};
    case ObjectLabel::cone_round: return {Shape::cone, Orientation::round_down};
  }
  return {};
}

Supercategory supercategory_of(ObjectLabel label) {
  switch (label) {
    case ObjectLabel::sphere:
    case ObjectLabel::capsule:
    case ObjectLabel::egg:
    case ObjectLabel::cylinder_round:
    case ObjectLabel::cone_round:
      return Supercategory::round;
    default:
      return Supercategory::flat_sided;
  }
}

const std::array<ObjectLabel, kLabelCount>& all_labels() { return kAllLabels; }
const std::array<ObjectLabel, 7>& training_labels() { return kTrainingLabels; }

bool is_training_label(ObjectLabel label) {
  return std::find(kTrainingLabels.begin(), kTrainingLabels.end(), label) != kTrainingLabels.end();
}

std::string_view shape_name(Shape shape) { return kShapeNames[static_cast<std::size_t>(shape)]; }

std::string_view orientation_name(Orientation o) {
  switch (o) {
    case Orientation::flat_down: return "flat_down";
    case Orientation::round_down: return "round_down";
    case Orientation::not_applicable: break;
  }
  return "not_applicable";
}

std::string_view label_display_name(ObjectLabel l) { return kDisplayNames[static_cast<std::size_t>(l)]; }
std::string_view label_key(ObjectLabel l) { return kLabelKeys[static_cast<std::size_t>(l)]; }

std::string_view supercategory_name(Supercategory s) {
  return s == Supercategory::round ? "round" : "flat_sided";
}

std::optional<Shape> parse_shape(std::string_view name) {
  for (std::size_t i = 0; i < kShapeNames.size(); ++i) {
    if (kShapeNames[i] == name) return static_cast<Shape>(i);
  }
  return std::nullopt;
}

std::optional<Orientation> parse_orientation(std::string_view name) {
  if (name == "flat_down") return Orientation::flat_down;
  if (name == "round_down") return Orientation::round_down;
  if (name == "not_applicable") return Orientation::not_applicable;
  return std::nullopt;
}

std::optional<ObjectLabel> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelKeys[i] == name || kDisplayNames[i] == name) return static_cast<ObjectLabel>(i);
  }
  return std::nullopt;
}

double settle_displacement(const StackSample& s) {
  const auto& f = s.features;
  return std::sqrt(f[27] * f[27] + f[28] * f[28] + f[29] * f[29]);
}

void GeneratorConfig::validate() const {
  require(samples_per_class >= 1, ErrorKind::config, "samples_per_class must be >= 1");
  require(std::isfinite(noise_scale) && noise_scale >= 0, ErrorKind::config, "noise_scale must be >= 0");
  require(std::isfinite(placement_tolerance) && placement_tolerance > 0, ErrorKind::config,
          "placement_tolerance must be > 0");
  require(misplacement_rate >= 0 && misplacement_rate <= 1, ErrorKind::config,
          "misplacement_rate must lie in [0, 1]");
  if (!labels.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        require(labels[i] != labels[j], ErrorKind::config, "duplicate label in config");
      }
    }
  }
}

GeneratorConfig load_generator_config(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  GeneratorConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos, ErrorKind::config,
            path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    try {
      if (key == "samples_per_class") {
        cfg.samples_per_class = static_cast<std::size_t>(std::stoull(value));
      } else if (key == "noise_scale") {
        cfg.noise_scale = std::stod(value);
      } else if (key == "placement_tolerance") {
        cfg.placement_tolerance = std::stod(value);
      } else if (key == "misplacement_rate") {
        cfg.misplacement_rate = std::stod(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "labels") {
        cfg.labels.clear();
        for (const auto& item : csv::split_line(value, ',')) {
          auto label = parse_label(trim(item));
          require(label.has_value(), ErrorKind::config, "unknown label '" + item + "'");
          cfg.labels.push_back(*label);
        }
      } else {
        fail(ErrorKind::config, "unknown generator key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorKind::config, "bad value for '" + key + "': " + value);
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<StackSample> generate_dataset(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<ObjectLabel> labels = config.labels;
  if (labels.empty()) labels.assign(kAllLabels.begin(), kAllLabels.end());

  std::vector<StackSample> out;
  out.reserve(labels.size() * config.samples_per_class);
  for (ObjectLabel label : labels) {
    Rng rng(derive_seed(seed, "datasim", static_cast<std::uint64_t>(label)));
    for (std::size_t i = 0; i < config.samples_per_class; ++i) {
      out.push_back(generate_one(label, config, rng));
    }
  }
  return out;
}

std::array<double, kFeatureCount> ScalerParams::transform(const std::array<double, kFeatureCount>& x) const {
  std::array<double, kFeatureCount> z{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    z[j] = constant[j] ? 0.0 : (x[j] - mean[j]) / std[j];
  }
  return z;
}

std::array<double, kFeatureCount> ScalerParams::inverse(const std::array<double, kFeatureCount>& z) const {
  std::array<double, kFeatureCount> x{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    x[j] = constant[j] ? mean[j] : z[j] * std[j] + mean[j];
  }
  return x;
}

ScalerParams fit_standardizer(std::span<const StackSample> samples) {
  require(samples.size() >= 2, ErrorKind::shortage, "standardizer needs at least 2 samples");
  ScalerParams p;
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    for (const auto& s : samples) sum += s.features[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : samples) {
      const double d = s.features[j] - mean;
      ss += d * d;
    }
    // Population standard deviation, so the fitting set has unit variance.
    const double sd = std::sqrt(ss / n);
    p.mean[j] = mean;
    p.constant[j] = sd < kConstantStdThreshold;
    p.std[j] = p.constant[j] ? 1.0 : sd;
  }
  return p;
}

StackSample standardize(const StackSample& s, const ScalerParams& scaler) {
  StackSample out = s;
  out.features = scaler.transform(s.features);
  return out;
}

bool follows_success_rule(const StackSample& s) {
  return (supercategory_of(s.label()) == Supercategory::flat_sided) == s.stack_success;
}

DatasetSplit build_split(std::span<const StackSample> samples, const SplitConfig& config,
                         std::uint64_t seed) {
  std::array<std::vector<const StackSample*>, kLabelCount> by_label;
  for (const auto& s : samples) {
    if (follows_success_rule(s)) by_label[static_cast<std::size_t>(s.label())].push_back(&s);
  }

  std::vector<StackSample> train_raw, test_raw, index_raw;
  for (ObjectLabel label : kAllLabels) {
    auto& pool = by_label[static_cast<std::size_t>(label)];
    const bool trains = is_training_label(label);
    const std::size_t need =
        (trains ? config.train_per_class : 0) + config.test_per_class + config.index_per_class;
    if (pool.size() < need) {
      fail(ErrorKind::shortage, "class '" + std::string(label_key(label)) + "' has " +
                                    std::to_string(pool.size()) + " eligible samples, needs " +
                                    std::to_string(need));
    }
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(label)));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t pos = 0;
    if (trains) {
      for (std::size_t i = 0; i < config.train_per_class; ++i) train_raw.push_back(*pool[pos++]);
    }
    for (std::size_t i = 0; i < config.test_per_class; ++i) test_raw.push_back(*pool[pos++]);
    for (std::size_t i = 0; i < config.index_per_class; ++i) index_raw.push_back(*pool[pos++]);
  }

  DatasetSplit split;
  split.scaler = fit_standardizer(train_raw);
  auto apply = [&](const std::vector<StackSample>& in, std::vector<StackSample>& out) {
    out.reserve(in.size());
    for (const auto& s : in) out.push_back(standardize(s, split.scaler));
  };
  apply(train_raw, split.train);
  apply(test_raw, split.test);
  apply(index_raw, split.index);
  return split;
}

std::vector<double> encoder_input(const StackSample& s, bool include_type_id) {
  const std::size_t first = include_type_id ? 0 : 1;
  return std::vector<double>(s.features.begin() + static_cast<std::ptrdiff_t>(first), s.features.end());
}

std::string dataset_csv_header() {
  std::string h = "class,orientation,success";
  for (std::size_t j = 0; j < kFeatureCount; ++j) h += ",f" + std::to_string(j);
  return h;
}

void write_dataset_csv(const std::filesystem::path& path, std::span<const StackSample> samples) {
  auto out = csv::open_out(path);
  out << dataset_csv_header() << '\n';
  for (const auto& s : samples) {
    out << shape_name(s.object.shape) << ',' << orientation_name(s.object.orientation) << ','
        << (s.stack_success ? 1 : 0);
    for (double v : s.features) out << ',' << csv::format_double(v);
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

std::vector<StackSample> read_dataset_csv(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::format, "empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == dataset_csv_header(), ErrorKind::format, "unexpected dataset header");
  std::vector<StackSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    require(fields.size() == 3 + kFeatureCount, ErrorKind::format,
            "row " + std::to_string(row) + ": expected " + std::to_string(3 + kFeatureCount) + " fields");
    auto shape = parse_shape(fields[0]);
    auto orientation = parse_orientation(fields[1]);
    require(shape && orientation, ErrorKind::format, "row " + std::to_string(row) + ": bad class");
    StackSample s;
    s.object = ObjectClass::make(*shape, *orientation);
    require(fields[2] == "0" || fields[2] == "1", ErrorKind::format,
            "row " + std::to_string(row) + ": success must be 0 or 1");
    s.stack_success = fields[2] == "1";
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      s.features[j] = csv::parse_double(fields[3 + j]);
      require(std::isfinite(s.features[j]), ErrorKind::format,
              "row " + std::to_string(row) + ": non-finite feature");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace groundbridge
