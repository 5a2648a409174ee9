#include "certmap/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>

namespace certmap {

namespace {

[[noreturn]] void fail(const std::string& path, const YAML::Node& node, const std::string& why) {
  const int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
  raise(Errc::scenario_error, path + ":" + std::to_string(line) + ": " + why);
}

Eigen::Vector3d vec3(const std::string& path, const YAML::Node& node, const char* what) {
  if (!node || !node.IsSequence() || node.size() != 3) {
    fail(path, node, std::string(what) + " must be a 3-element list");
  }
  return Eigen::Vector3d(node[0].as<double>(), node[1].as<double>(), node[2].as<double>());
}

Rotation rotation_from_node(const std::string& path, const YAML::Node& node) {
  if (node["quaternion"]) {
    const YAML::Node q = node["quaternion"];
    if (!q.IsSequence() || q.size() != 4) fail(path, q, "quaternion must be [x, y, z, w]");
    return quat_to_rotation(UnitQuaternion(q[0].as<double>(), q[1].as<double>(),
                                           q[2].as<double>(), q[3].as<double>()));
  }
  if (node["rpy_deg"]) {
    const Eigen::Vector3d rpy = vec3(path, node["rpy_deg"], "rpy_deg") * (M_PI / 180.0);
    const Eigen::AngleAxisd rz(rpy.z(), Eigen::Vector3d::UnitZ());
    const Eigen::AngleAxisd ry(rpy.y(), Eigen::Vector3d::UnitY());
    const Eigen::AngleAxisd rx(rpy.x(), Eigen::Vector3d::UnitX());
    return Rotation::from_matrix((rz * ry * rx).toRotationMatrix());
  }
  return Rotation();
}

}  // namespace

void Scenario::validate() const {
  camera.validate();
  scene.validate();
  trajectory.validate();
  noise.validate();
  if (!(duration > 0.0)) raise(Errc::scenario_error, "duration must be positive");
  if (feature_count < 4) raise(Errc::scenario_error, "feature_count must be >= 4");
  if (!(grid_resolution > 0.0)) raise(Errc::scenario_error, "grid resolution must be positive");
  if ((grid_dims.array() < 1).any()) raise(Errc::scenario_error, "grid dims must be positive");
  if (!(graph_fraction > 0.0 && graph_fraction <= 1.0)) {
    raise(Errc::scenario_error, "graph fraction must be in (0, 1]");
  }
  if (bound_iterations < 1) raise(Errc::scenario_error, "bound iterations must be >= 1");
  if (!(esdf_period > 0.0)) raise(Errc::scenario_error, "esdf period must be positive");
  gnc.validate();
}

Scenario load_scenario(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    raise(Errc::scenario_error, "cannot open scenario file: " + path);
  } catch (const YAML::ParserException& e) {
    raise(Errc::scenario_error,
          path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }

  Scenario sc;
  try {
    sc.name = root["name"] ? root["name"].as<std::string>() : "unnamed";
    if (root["seed"]) sc.seed = root["seed"].as<std::uint64_t>();
    if (root["frame_rate"]) sc.frame_rate = root["frame_rate"].as<double>();
    if (root["duration"]) sc.duration = root["duration"].as<double>();
    if (root["feature_count"]) sc.feature_count = root["feature_count"].as<int>();

    const YAML::Node cam = root["camera"];
    if (!cam) fail(path, root, "missing camera section");
    sc.camera.fx = cam["fx"].as<double>();
    sc.camera.fy = cam["fy"].as<double>();
    sc.camera.cx = cam["cx"].as<double>();
    sc.camera.cy = cam["cy"].as<double>();
    sc.camera.width = cam["width"].as<int>();
    sc.camera.height = cam["height"].as<int>();
    sc.camera.min_depth = cam["min_depth"].as<double>();
    sc.camera.max_depth = cam["max_depth"].as<double>();

    const YAML::Node scene = root["scene"];
    if (!scene || !scene.IsSequence()) fail(path, root, "missing scene primitive list");
    for (const YAML::Node& prim : scene) {
      if (prim["sphere"]) {
        Sphere s;
        s.center = vec3(path, prim["sphere"]["center"], "sphere center");
        s.radius = prim["sphere"]["radius"].as<double>();
        sc.scene.primitives.push_back(s);
      } else if (prim["box"]) {
        AxisBox b;
        b.min = vec3(path, prim["box"]["min"], "box min");
        b.max = vec3(path, prim["box"]["max"], "box max");
        sc.scene.primitives.push_back(b);
      } else if (prim["plane"]) {
        Plane p;
        p.normal = vec3(path, prim["plane"]["normal"], "plane normal").normalized();
        p.offset = prim["plane"]["offset"].as<double>();
        sc.scene.primitives.push_back(p);
      } else {
        fail(path, prim, "unknown primitive (expected sphere, box, or plane)");
      }
    }

    const YAML::Node traj = root["trajectory"];
    if (!traj || !traj.IsSequence()) fail(path, root, "missing trajectory keyframe list");
    for (const YAML::Node& kf : traj) {
      TrajectoryKeyframe key;
      key.time = kf["time"].as<double>();
      key.pose.translation = vec3(path, kf["position"], "keyframe position");
      key.pose.rotation = rotation_from_node(path, kf);
      sc.trajectory.keyframes.push_back(key);
    }
    sc.trajectory.frame_rate = sc.frame_rate;

    if (const YAML::Node noise = root["noise"]) {
      if (noise["delta_fraction"]) sc.noise.delta_fraction = noise["delta_fraction"].as<double>();
      if (noise["delta_floor"]) sc.noise.delta_floor = noise["delta_floor"].as<double>();
      if (noise["outlier_rate"]) sc.noise.outlier_rate = noise["outlier_rate"].as<double>();
      if (noise["outlier_magnitude"]) {
        sc.noise.outlier_magnitude = noise["outlier_magnitude"].as<double>();
      }
    }

    const YAML::Node grid = root["grid"];
    if (!grid) fail(path, root, "missing grid section");
    sc.grid_origin = vec3(path, grid["origin"], "grid origin");
    sc.grid_resolution = grid["resolution"].as<double>();
    const YAML::Node dims = grid["dims"];
    if (!dims || !dims.IsSequence() || dims.size() != 3) {
      fail(path, grid, "grid dims must be a 3-element list");
    }
    sc.grid_dims = Eigen::Vector3i(dims[0].as<int>(), dims[1].as<int>(), dims[2].as<int>());

    if (root["esdf_period"]) sc.esdf_period = root["esdf_period"].as<double>();
    if (root["deflation"]) sc.deflation = root["deflation"].as<bool>();
    if (const YAML::Node reg = root["registration"]) {
      if (reg["fraction"]) sc.graph_fraction = reg["fraction"].as<double>();
      if (reg["iterations"]) sc.bound_iterations = reg["iterations"].as<int>();
      if (const YAML::Node gnc = reg["gnc"]) {
        if (gnc["max_iterations"]) sc.gnc.max_iterations = gnc["max_iterations"].as<int>();
        if (gnc["mu_update_factor"]) sc.gnc.mu_update_factor = gnc["mu_update_factor"].as<double>();
        if (gnc["convergence_tol"]) sc.gnc.convergence_tol = gnc["convergence_tol"].as<double>();
        if (gnc["noise_multiplier"]) sc.gnc.noise_multiplier = gnc["noise_multiplier"].as<double>();
      }
    }
    if (const YAML::Node slices = root["slice_z"]) {
      for (const YAML::Node& z : slices) sc.slice_z.push_back(z.as<double>());
    }
  } catch (const YAML::Exception& e) {
    raise(Errc::scenario_error, path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }

  try {
    sc.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::scenario_error) throw;
    raise(Errc::scenario_error, path + ": " + e.what());
  }
  return sc;
}

}  // namespace certmap
