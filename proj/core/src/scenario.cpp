#include "hipnav/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hipnav {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigParse, "field '" + where + "': " + what);
}

/// Object reader that remembers which keys were consumed so unknown keys can
/// be rejected (a misspelt key must not silently fall back to a default).
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* get(std::string_view key) {
    used_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const json& need(std::string_view key) {
    const json* v = get(key);
    if (!v) fail(at(key), "required field is missing");
    return *v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

double number_or(Obj& o, std::string_view key, double fallback) {
  const json* v = o.get(key);
  return v ? as_number(*v, o.at(key)) : fallback;
}

std::size_t count_or(Obj& o, std::string_view key, std::size_t fallback, std::size_t minimum = 0) {
  const json* v = o.get(key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<std::int64_t>() < static_cast<std::int64_t>(minimum)) {
    fail(o.at(key), "expected an integer >= " + std::to_string(minimum));
  }
  return v->get<std::size_t>();
}

std::string string_or(Obj& o, std::string_view key, std::string fallback) {
  const json* v = o.get(key);
  if (!v) return fallback;
  if (!v->is_string()) fail(o.at(key), "expected a string");
  return v->get<std::string>();
}

Point3 as_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected [x, y, z]");
  return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]"), as_number(v[2], where + "[2]")};
}

Point3 point_or(Obj& o, std::string_view key, const Point3& fallback) {
  const json* v = o.get(key);
  return v ? as_point(*v, o.at(key)) : fallback;
}

std::vector<Point3> as_points(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of [x, y, z]");
  std::vector<Point3> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_point(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

AnglePair as_angles(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) fail(where, "expected [abduction_deg, anteversion_deg]");
  return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
}

RigidTransform as_transform(const json& v, const std::string& where, FrameTag from, FrameTag to) {
  Obj o(v, where);
  Point3 translation = point_or(o, "translation", Point3::Zero());
  const json* axis = o.get("axis");
  const json* angle = o.get("angle_deg");
  o.finish();
  try {
    if (!axis && !angle) return RigidTransform::from_translation(translation, from, to);
    if (!axis || !angle) fail(where, "'axis' and 'angle_deg' must be given together");
    return RigidTransform::from_axis_angle(as_point(*axis, where + ".axis"), as_number(*angle, where + ".angle_deg"),
                                           translation, from, to);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigParse) throw;
    fail(where, e.what());
  }
}

RigidTransform transform_or(Obj& o, std::string_view key, FrameTag from, FrameTag to) {
  const json* v = o.get(key);
  return v ? as_transform(*v, o.at(key), from, to) : RigidTransform::identity(from, to);
}

MarkerBody parse_body(const json& v, const std::string& where) {
  Obj o(v, where);
  MarkerBody b;
  b.name = string_or(o, "name", "");
  if (b.name.empty()) fail(o.at("name"), "required non-empty string");
  const std::string frame = string_or(o, "frame", "Patient");
  try {
    b.frame = frame_from_string(frame);
  } catch (const Error&) {
    fail(o.at("frame"), "unknown frame '" + frame + "'");
  }
  b.ball_radius = number_or(o, "ball_radius", 5.0);
  b.balls = as_points(o.need("balls"), o.at("balls"));
  o.finish();
  try {
    b.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return b;
}

Phantom parse_phantom(const json& v, const std::string& where) {
  Obj o(v, where);
  Phantom p;
  p.base_to_cam = transform_or(o, "base_to_cam", FrameTag::Base, FrameTag::Cam);
  p.patient_to_cam = transform_or(o, "patient_to_cam", FrameTag::Patient, FrameTag::Cam);
  p.calibration_marker = point_or(o, "calibration_marker", p.calibration_marker);
  if (const json* bodies = o.get("bodies")) {
    if (!bodies->is_array()) fail(o.at("bodies"), "expected an array");
    for (std::size_t i = 0; i < bodies->size(); ++i) {
      p.bodies.push_back(parse_body((*bodies)[i], o.at("bodies") + "[" + std::to_string(i) + "]"));
      for (std::size_t k = 0; k + 1 < p.bodies.size(); ++k) {
        if (p.bodies[k].name == p.bodies.back().name) fail(o.at("bodies"), "duplicate body '" + p.bodies[k].name + "'");
      }
    }
  }
  if (const json* lm = o.get("landmarks")) {
    Obj l(*lm, o.at("landmarks"));
    p.landmarks.hip_reference = point_or(l, "hip_reference", p.landmarks.hip_reference);
    p.landmarks.left_ankle = point_or(l, "left_ankle", p.landmarks.left_ankle);
    p.landmarks.right_ankle = point_or(l, "right_ankle", p.landmarks.right_ankle);
    if (const json* ost = l.get("osteotomy")) {
      const auto pts = as_points(*ost, l.at("osteotomy"));
      if (pts.size() != 3) fail(l.at("osteotomy"), "expected exactly 3 points");
      std::copy(pts.begin(), pts.end(), p.landmarks.osteotomy.begin());
    }
    l.finish();
  }
  o.finish();
  try {
    p.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return p;
}

TrackerModel parse_tracker(const json& v, const std::string& where) {
  Obj o(v, where);
  TrackerModel t;
  t.noise_sigma = number_or(o, "noise_sigma", 0.0);
  t.fov.min = point_or(o, "fov_min", t.fov.min);
  t.fov.max = point_or(o, "fov_max", t.fov.max);
  o.finish();
  try {
    t.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return t;
}

RobotModel parse_robot(const json& v, const std::string& where) {
  Obj o(v, where);
  RobotModel r;
  r.pose_bias = transform_or(o, "pose_bias", FrameTag::Tool, FrameTag::Tool);
  r.jitter_sigma_trans = number_or(o, "jitter_sigma_trans", 0.0);
  r.jitter_sigma_rot = number_or(o, "jitter_sigma_rot", 0.0);
  if (const json* ab = o.get("angle_bias")) r.angle_bias = as_angles(*ab, o.at("angle_bias"));
  o.finish();
  try {
    r.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return r;
}

PositioningTest parse_test1(const json& v, const std::string& where, const Phantom& phantom) {
  Obj o(v, where);
  PositioningTest t;
  if (const json* g = o.get("grid")) {
    if (!g->is_array() || g->size() != 3) fail(o.at("grid"), "expected [nx, ny, nz]");
    std::size_t dims[3];
    for (int i = 0; i < 3; ++i) {
      if (!(*g)[i].is_number_integer() || (*g)[i].get<std::int64_t>() < 1) fail(o.at("grid"), "entries must be integers >= 1");
      dims[i] = (*g)[i].get<std::size_t>();
    }
    t.grid = {dims[0], dims[1], dims[2]};
  }
  if (t.grid.count() < 4) fail(o.at("grid"), "grid must have at least 4 positions");
  t.step = number_or(o, "step", t.step);
  if (!(t.step > 0.0)) fail(o.at("step"), "must be positive");
  t.start = transform_or(o, "start", FrameTag::Tool, FrameTag::Base);
  t.beta = number_or(o, "beta", t.beta);
  if (!(t.beta > 0.0)) fail(o.at("beta"), "must be positive");
  t.max_rounds = count_or(o, "max_rounds", t.max_rounds, 1);
  t.patient_body = string_or(o, "patient_body", t.patient_body);
  try {
    if (phantom.body(t.patient_body).frame != FrameTag::Patient) fail(o.at("patient_body"), "body must be in the Patient frame");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigParse) throw;
    fail(o.at("patient_body"), e.what());
  }
  t.points_per_ball = count_or(o, "points_per_ball", t.points_per_ball, 20);
  t.link_radius = number_or(o, "link_radius", t.link_radius);
  if (!(t.link_radius > 0.0)) fail(o.at("link_radius"), "must be positive");
  t.pic_pose = transform_or(o, "pic_pose", FrameTag::Patient, FrameTag::Pic);
  t.targets = as_points(o.need("targets"), o.at("targets"));
  if (t.targets.empty()) fail(o.at("targets"), "at least one target is required");
  o.finish();
  return t;
}

AlignmentTest parse_test2(const json& v, const std::string& where, const Phantom& phantom) {
  Obj o(v, where);
  AlignmentTest t;
  if (const json* d = o.get("desired")) t.desired = as_angles(*d, o.at("desired"));
  if (!in_domain(t.desired)) fail(o.at("desired"), "angles outside abduction [0, 90], anteversion (-90, 90)");
  t.options.tolerance = number_or(o, "tolerance", t.options.tolerance);
  if (!(t.options.tolerance > 0.0)) fail(o.at("tolerance"), "must be positive");
  t.options.max_iters = count_or(o, "max_iters", t.options.max_iters, 1);
  t.options.tool_position = point_or(o, "tool_position", t.options.tool_position);
  t.options.tool_body = string_or(o, "tool_body", t.options.tool_body);
  t.options.patient_body = string_or(o, "patient_body", t.options.patient_body);
  if (const json* z = o.get("safe_zone")) {
    Obj s(*z, o.at("safe_zone"));
    auto& zone = t.options.zone;
    zone.abduction_center = number_or(s, "abduction_center", zone.abduction_center);
    zone.abduction_half_width = number_or(s, "abduction_half_width", zone.abduction_half_width);
    zone.anteversion_center = number_or(s, "anteversion_center", zone.anteversion_center);
    zone.anteversion_half_width = number_or(s, "anteversion_half_width", zone.anteversion_half_width);
    s.finish();
  }
  o.finish();
  for (const auto& [key, name, frame] : {std::tuple{"tool_body", t.options.tool_body, FrameTag::Tool},
                                         std::tuple{"patient_body", t.options.patient_body, FrameTag::Patient}}) {
    try {
      if (phantom.body(name).frame != frame) fail(o.at(key), "body '" + name + "' is in the wrong frame");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigParse) throw;
      fail(o.at(key), e.what());
    }
  }
  return t;
}

GrindState parse_state(const std::string& s, const std::string& where) {
  for (auto st : {GrindState::Complete, GrindState::EmergencyStopped, GrindState::Advancing, GrindState::Grinding,
                  GrindState::Idle}) {
    if (s == to_string(st)) return st;
  }
  fail(where, "unknown grind state '" + s + "'");
}

EffectorTest parse_test3(const json& v, const std::string& where, const std::filesystem::path& base_dir) {
  Obj o(v, where);
  EffectorTest t;
  if (const json* c = o.get("controller")) {
    Obj cc(*c, o.at("controller"));
    auto& cfg = t.controller;
    cfg.pressure_threshold = number_or(cc, "pressure_threshold", cfg.pressure_threshold);
    cfg.contact_threshold = number_or(cc, "contact_threshold", cfg.contact_threshold);
    cfg.feed_per_tick = number_or(cc, "feed_per_tick", cfg.feed_per_tick);
    cfg.target_depth = number_or(cc, "target_depth", cfg.target_depth);
    cfg.tick_period_ms = number_or(cc, "tick_period_ms", cfg.tick_period_ms);
    cc.finish();
    try {
      cfg.validate();
    } catch (const Error& e) {
      fail(o.at("controller"), e.what());
    }
  }
  if (const json* ps = o.get("profiles")) {
    if (!ps->is_array()) fail(o.at("profiles"), "expected an array");
    for (std::size_t i = 0; i < ps->size(); ++i) {
      const std::string pw = o.at("profiles") + "[" + std::to_string(i) + "]";
      Obj p((*ps)[i], pw);
      PressureProfile prof;
      prof.name = string_or(p, "name", "");
      if (prof.name.empty()) fail(p.at("name"), "required non-empty string");
      const json* csv = p.get("csv");
      const json* model = p.get("contact_model");
      if ((csv != nullptr) == (model != nullptr)) fail(pw, "give exactly one of 'csv' or 'contact_model'");
      if (csv) {
        if (!csv->is_string()) fail(p.at("csv"), "expected a path string");
        const auto path = base_dir / csv->get<std::string>();
        try {
          prof.samples = read_pressure_csv(path);
        } catch (const Error& e) {
          fail(p.at("csv"), e.what());
        }
      } else {
        Obj m(*model, p.at("contact_model"));
        ContactModel cm;
        cm.approach_mm = number_or(m, "approach_mm", cm.approach_mm);
        cm.stiffness = number_or(m, "stiffness", cm.stiffness);
        cm.saturation = number_or(m, "saturation", cm.saturation);
        cm.feed_per_tick = number_or(m, "feed_per_tick", t.controller.feed_per_tick);
        cm.ticks = count_or(m, "ticks", cm.ticks, 1);
        if (const json* sp = m.get("spike")) {
          Obj s(*sp, m.at("spike"));
          ContactModel::Spike spike;
          spike.tick = static_cast<std::int64_t>(count_or(s, "tick", 0));
          spike.width = static_cast<std::int64_t>(count_or(s, "width", 1, 1));
          spike.force = number_or(s, "force", spike.force);
          s.finish();
          cm.spike = spike;
        }
        m.finish();
        if (!(cm.feed_per_tick > 0.0) || cm.stiffness < 0.0 || cm.saturation < 0.0) {
          fail(p.at("contact_model"), "feed must be positive, stiffness and saturation non-negative");
        }
        prof.samples = synthesize_profile(cm);
      }
      if (const json* ex = p.get("expect")) {
        if (!ex->is_string()) fail(p.at("expect"), "expected a state name");
        prof.expect = parse_state(ex->get<std::string>(), p.at("expect"));
      }
      p.finish();
      for (std::size_t k = 0; k < prof.samples.size(); ++k) {
        if (prof.samples[k].tick != static_cast<std::int64_t>(k) || !(prof.samples[k].force >= 0.0)) {
          fail(pw, "profile ticks must run 0, 1, 2, ... with non-negative force (sample " + std::to_string(k) + ")");
        }
      }
      t.profiles.push_back(std::move(prof));
    }
  }
  t.random_profiles = count_or(o, "random_profiles", t.random_profiles);
  t.random_length = count_or(o, "random_length", t.random_length, 1);
  o.finish();
  return t;
}

MeasurementTest parse_test4(const json& v, const std::string& where) {
  Obj o(v, where);
  MeasurementTest t;
  if (const json* hs = o.get("heads")) {
    if (!hs->is_array() || hs->empty()) fail(o.at("heads"), "expected a non-empty array");
    for (std::size_t i = 0; i < hs->size(); ++i) {
      Obj h((*hs)[i], o.at("heads") + "[" + std::to_string(i) + "]");
      HeadSetup setup;
      setup.head.id = string_or(h, "id", "");
      if (setup.head.id.empty()) fail(h.at("id"), "required non-empty string");
      setup.head.size = as_number(h.need("size"), h.at("size"));
      setup.head.radius = number_or(h, "radius", setup.head.size / 2.0);
      setup.center_height = as_number(h.need("center_height"), h.at("center_height"));
      h.finish();
      if (!(setup.head.radius > 0.0)) fail(h.at("radius"), "must be positive");
      t.heads.push_back(setup);
    }
  } else {
    for (const auto& head : default_head_catalog()) t.heads.push_back({head, 5.0});
  }
  t.planned_e0 = number_or(o, "planned_e0", t.planned_e0);
  if (!(t.planned_e0 >= 0.0)) fail(o.at("planned_e0"), "must be >= 0");
  t.planned_radius = number_or(o, "planned_radius", t.planned_radius);
  if (const json* s = o.get("limb_shifts")) {
    if (!s->is_array() || s->empty()) fail(o.at("limb_shifts"), "expected a non-empty array of mm");
    t.limb_shifts.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      const double shift = as_number((*s)[i], o.at("limb_shifts") + "[" + std::to_string(i) + "]");
      if (shift < 0.0) fail(o.at("limb_shifts"), "shifts must be >= 0");
      t.limb_shifts.push_back(shift);
    }
    if (t.limb_shifts.front() != 0.0) fail(o.at("limb_shifts"), "the first shift must be 0 (baseline)");
  }
  o.finish();
  return t;
}

Bound parse_bound(const json& v, const std::string& where) {
  Obj o(v, where);
  Bound b;
  b.test = string_or(o, "test", "");
  b.name = string_or(o, "name", "");
  b.variation = string_or(o, "variation", "");
  b.stat = string_or(o, "stat", b.stat);
  if (b.test.empty() || b.name.empty()) fail(where, "'test' and 'name' are required");
  if (b.stat != "mean" && b.stat != "sd" && b.stat != "max") fail(o.at("stat"), "expected mean, sd or max");
  if (const json* mn = o.get("min")) b.min = as_number(*mn, o.at("min"));
  if (const json* mx = o.get("max")) b.max = as_number(*mx, o.at("max"));
  if (const json* r = o.get("reference")) b.reference = as_number(*r, o.at("reference"));
  if (!b.min && !b.max) fail(where, "a bound needs 'min', 'max' or both");
  o.finish();
  return b;
}

}  // namespace

const std::vector<TestInfo>& available_tests() {
  static const std::vector<TestInfo> tests{
      {"test1", "hand-eye calibration, image registration and tip positioning accuracy"},
      {"test2", "grinding-angle measurement with optical feedback alignment"},
      {"test3", "end-effector pressure safety controller over pressure profiles"},
      {"test4", "probe measurement of femoral neck length, head selection and leg length"},
  };
  return tests;
}

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir,
                        std::string_view source_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigParse, std::string(source_name) + ": " + e.what());
  }

  try {
    Obj o(root, "");
    Scenario s;
    s.name = string_or(o, "name", "");
    if (s.name.empty()) fail("name", "required non-empty string");
    if (s.name.find_first_of("/\\ ") != std::string::npos) fail("name", "must not contain spaces or path separators");
    const json& seed = o.need("seed");
    if (!seed.is_number_unsigned()) fail("seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
    s.repeats = count_or(o, "repeats", 1, 1);

    const json& tests = o.need("tests");
    if (!tests.is_array() || tests.empty()) fail("tests", "expected a non-empty array of test names");
    for (const auto& t : tests) {
      if (!t.is_string()) fail("tests", "expected strings");
      const auto name = t.get<std::string>();
      const auto& known = available_tests();
      if (std::none_of(known.begin(), known.end(), [&](const TestInfo& i) { return i.name == name; })) {
        fail("tests", "unknown test '" + name + "'");
      }
      if (std::find(s.tests.begin(), s.tests.end(), name) != s.tests.end()) fail("tests", "duplicate test '" + name + "'");
      s.tests.push_back(name);
    }

    if (const json* p = o.get("phantom")) s.phantom = parse_phantom(*p, "phantom");
    if (const json* t = o.get("tracker")) s.tracker = parse_tracker(*t, "tracker");
    if (const json* r = o.get("robot")) s.robot = parse_robot(*r, "robot");

    auto wants = [&](std::string_view name) { return std::find(s.tests.begin(), s.tests.end(), name) != s.tests.end(); };
    auto section = [&](std::string_view key) -> const json* {
      const json* v = o.get(key);
      if (!v && wants(key)) fail(std::string(key), "section required because the test is listed in 'tests'");
      return v;
    };
    if (const json* t = section("test1")) s.test1 = parse_test1(*t, "test1", s.phantom);
    if (const json* t = section("test2")) s.test2 = parse_test2(*t, "test2", s.phantom);
    if (const json* t = section("test3")) s.test3 = parse_test3(*t, "test3", base_dir);
    if (const json* t = section("test4")) s.test4 = parse_test4(*t, "test4");

    if (const json* b = o.get("bounds")) {
      if (!b->is_array()) fail("bounds", "expected an array");
      for (std::size_t i = 0; i < b->size(); ++i) s.bounds.push_back(parse_bound((*b)[i], "bounds[" + std::to_string(i) + "]"));
    }
    o.finish();
    return s;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigParse) {
      throw Error(ErrorCode::ConfigParse, std::string(source_name) + ": " + e.message());
    }
    throw;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string(source_name) + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.parent_path(), path.string());
}

}  // namespace hipnav
