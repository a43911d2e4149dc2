#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "semmap/cli.hpp"
#include "semmap/geometry.hpp"
#include "semmap/headpose.hpp"
#include "semmap/io.hpp"
#include "semmap/pipeline.hpp"
#include "semmap/semantic_map.hpp"
#include "semmap/tracker2d.hpp"
#include "semmap/willingness.hpp"

namespace py = pybind11;
using namespace semmap;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Pixels = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using RectTuple = std::tuple<double, double, double, double>;

PointCloud to_cloud(const Points& pts, Frame frame = Frame::World) {
  PointCloud c(frame);
  c.points.reserve(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) c.points.emplace_back(pts.row(i).transpose());
  return c;
}

Points to_array(const PointCloud& c) {
  Points out(static_cast<Eigen::Index>(c.size()), 3);
  for (std::size_t i = 0; i < c.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = c.points[i].transpose();
  return out;
}

Rect to_rect(const RectTuple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)}; }
RectTuple from_rect(const Rect& r) { return {r.x_min, r.y_min, r.x_max, r.y_max}; }

DepthImage to_depth(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "depth must be a 2-D array (height, width)");
  DepthImage d(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), d.data.begin());
  return d;
}

py::dict object_dict(const SemanticObject& o) {
  py::dict d;
  d["id"] = o.id;
  d["class"] = o.class_label;
  d["centroid"] = o.centroid;
  d["aabb_min"] = o.aabb.min;
  d["aabb_max"] = o.aabb.max;
  d["num_points"] = o.world.size();
  d["num_observations"] = o.observations.size();
  return d;
}

}  // namespace

PYBIND11_MODULE(_semmap, m) {
  m.doc() = "Semantic object mapping, head pose and interaction willingness.";

  py::enum_<ErrorCode> codes(m, "ErrorCode");
  for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
    const auto c = static_cast<ErrorCode>(i);
    codes.value(std::string(to_string(c)).c_str(), c);
  }
  py::exception<Error>(m, "SemmapError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = py::module_::import("semmap._semmap").attr("SemmapError");
      py::object exc = type(e.what());
      exc.attr("code") = py::cast(e.code());
      exc.attr("detail") = e.detail();
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  // geometry
  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx") = 500.0, py::arg("fy") = 500.0, py::arg("cx") = 320.0, py::arg("cy") = 240.0,
           py::arg("width") = 640, py::arg("height") = 480)
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("__repr__", [](const CameraIntrinsics& k) {
        std::ostringstream os;
        os << "CameraIntrinsics(fx=" << k.fx << ", fy=" << k.fy << ", cx=" << k.cx << ", cy=" << k.cy
           << ", width=" << k.width << ", height=" << k.height << ")";
        return os.str();
      });

  py::class_<RigidPose>(m, "RigidPose")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_static("identity", &RigidPose::identity)
      .def_static("from_translation", &RigidPose::from_translation, py::arg("t"))
      .def_static("look_at", &RigidPose::look_at, py::arg("position"), py::arg("target"))
      .def_property_readonly("rotation", &RigidPose::rotation)
      .def_property_readonly("translation", &RigidPose::translation)
      .def("apply", &RigidPose::apply, py::arg("point"))
      .def("inverse", &RigidPose::inverse)
      .def("__mul__", &RigidPose::operator*)
      .def("max_abs_diff", &RigidPose::max_abs_diff);

  m.def(
      "project",
      [](const Vec3& p, const RigidPose& pose, const CameraIntrinsics& k) {
        const auto r = project(p, pose, k);
        return std::make_tuple(r.u, r.v, r.depth);
      },
      py::arg("point"), py::arg("pose"), py::arg("intrinsics"), "World point to (u, v, depth).");
  m.def("backproject", &backproject, py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("pose"),
        py::arg("intrinsics"));
  m.def(
      "extract_object_cloud",
      [](const RectTuple& bbox, const py::array_t<float, py::array::c_style | py::array::forcecast>& depth,
         const RigidPose& pose, const CameraIntrinsics& k, int stride) {
        ExtractionOptions opts;
        opts.stride = stride;
        return to_array(extract_object_cloud(to_rect(bbox), to_depth(depth), pose, k, opts));
      },
      py::arg("bbox"), py::arg("depth"), py::arg("pose"), py::arg("intrinsics"), py::arg("stride") = 4,
      "Cut the depth-band cuboid under a bbox; returns world points (N, 3).");
  m.def(
      "voxel_downsample", [](const Points& pts, double leaf) { return to_array(voxel_downsample(to_cloud(pts), leaf)); },
      py::arg("points"), py::arg("leaf"));

  // tracker
  m.def(
      "iou", [](const RectTuple& a, const RectTuple& b) { return iou(to_rect(a), to_rect(b)); }, py::arg("a"),
      py::arg("b"));

  py::class_<Detection2D>(m, "Detection2D")
      .def(py::init([](const RectTuple& bbox, std::string label, double score, const std::string& kind) {
             Detection2D d;
             d.bbox = to_rect(bbox);
             d.class_label = std::move(label);
             d.score = score;
             d.kind = detection_kind_from_string(kind);
             return d;
           }),
           py::arg("bbox"), py::arg("class_label"), py::arg("score") = 1.0, py::arg("kind") = "object")
      .def_property_readonly("bbox", [](const Detection2D& d) { return from_rect(d.bbox); })
      .def_readonly("class_label", &Detection2D::class_label)
      .def_readonly("score", &Detection2D::score);

  py::class_<IouTracker>(m, "IouTracker")
      .def(py::init([](double iou_threshold, int min_length, int ttl) {
             TrackerConfig c{iou_threshold, min_length, ttl};
             c.validate();
             return IouTracker(c);
           }),
           py::arg("iou_threshold") = 0.5, py::arg("min_length") = 5, py::arg("ttl") = 3)
      .def(
          "step",
          [](IouTracker& t, const std::vector<Detection2D>& dets, FrameId frame) {
            const auto s = t.step(dets, frame);
            py::list confirmations;
            for (const auto& c : s.confirmations) confirmations.append(py::make_tuple(c.track_id, c.detection_index));
            py::dict d;
            d["confirmations"] = confirmations;
            d["assignments"] = s.assignments;
            d["dropped"] = s.dropped;
            return d;
          },
          py::arg("detections"), py::arg("frame"),
          "Returns {confirmations: [(track_id, detection_index)], assignments, dropped}.")
      .def_property_readonly("track_ids", [](const IouTracker& t) {
        std::vector<TrackId> ids;
        for (const auto& tr : t.tracks()) ids.push_back(tr.id);
        return ids;
      });

  // semantic map
  m.def(
      "chamfer_distance", [](const Points& a, const Points& b) { return chamfer_distance(to_cloud(a), to_cloud(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "overlap_ratio",
      [](const Points& a, const Points& b, double radius) { return overlap_ratio(to_cloud(a), to_cloud(b), radius); },
      py::arg("a"), py::arg("b"), py::arg("radius") = 0.05);

  py::class_<MapConfig>(m, "MapConfig")
      .def(py::init<>())
      .def_readwrite("assoc_threshold", &MapConfig::assoc_threshold)
      .def_readwrite("merge_overlap_ratio", &MapConfig::merge_overlap_ratio)
      .def_readwrite("overlap_radius", &MapConfig::overlap_radius)
      .def_readwrite("voxel_leaf", &MapConfig::voxel_leaf)
      .def_readwrite("max_object_points", &MapConfig::max_object_points);

  py::class_<SemanticMap>(m, "SemanticMap")
      .def(py::init([](const MapConfig& c) {
             c.validate();
             return SemanticMap(c);
           }),
           py::arg("config") = MapConfig{})
      .def(
          "add_keyframe",
          [](SemanticMap& map, KeyframeId id, const RigidPose& pose, std::optional<FrameId> frame) {
            map.add_keyframe({id, pose, frame.value_or(id)});
          },
          py::arg("id"), py::arg("pose"), py::arg("frame") = py::none())
      .def(
          "keyframe_pose", [](const SemanticMap& map, KeyframeId id) { return map.keyframe(id).pose; }, py::arg("id"))
      .def(
          "associate",
          [](const SemanticMap& map, const Points& pts, const std::string& label) {
            return map.associate(to_cloud(pts), label);
          },
          py::arg("points"), py::arg("class_label"))
      .def(
          "register_candidate",
          [](SemanticMap& map, const Points& pts, const std::string& label, KeyframeId kf) {
            const auto r = map.register_candidate(to_cloud(pts), label, kf);
            return py::make_tuple(r.object, r.created);
          },
          py::arg("points"), py::arg("class_label"), py::arg("keyframe"), "Returns (object_id, created).")
      .def(
          "apply_trajectory_correction",
          [](SemanticMap& map, const std::vector<std::pair<KeyframeId, RigidPose>>& corrected) {
            const auto r = map.apply_trajectory_correction(corrected);
            py::dict d;
            d["merged"] = r.merged;
            d["objects_before"] = r.objects_before;
            d["objects_after"] = r.objects_after;
            return d;
          },
          py::arg("corrected"))
      .def("objects",
           [](const SemanticMap& map) {
             py::list out;
             for (const auto& [id, o] : map.objects()) out.append(object_dict(o));
             return out;
           })
      .def(
          "object_points", [](const SemanticMap& map, ObjectId id) { return to_array(map.object(id).world); },
          py::arg("id"))
      .def("to_json", [](const SemanticMap& map) { return io::map_to_json(map).dump(); })
      .def("__len__", &SemanticMap::size);

  // head pose
  py::class_<FaceModel3D>(m, "FaceModel3D")
      .def(py::init([](std::vector<std::string> names, const Points& pts) {
             FaceModel3D f{std::move(names), to_cloud(pts).points};
             f.validate();
             return f;
           }),
           py::arg("names"), py::arg("points"))
      .def_static("generic_six_point", &FaceModel3D::generic_six_point)
      .def_static("load", &FaceModel3D::load, py::arg("path"))
      .def_readonly("names", &FaceModel3D::names)
      .def_property_readonly("points", [](const FaceModel3D& f) { return to_array(PointCloud(Frame::World, f.points)); });

  py::class_<HeadPose>(m, "HeadPose")
      .def(py::init([](double yaw, double pitch, double roll) {
             HeadPose p;
             p.rotation = rotation_from_euler(yaw, pitch, roll);
             p.yaw = yaw;
             p.pitch = pitch;
             p.roll = roll;
             return p;
           }),
           py::arg("yaw") = 0.0, py::arg("pitch") = 0.0, py::arg("roll") = 0.0)
      .def_readonly("rotation", &HeadPose::rotation)
      .def_readonly("translation", &HeadPose::translation)
      .def_readonly("yaw", &HeadPose::yaw)
      .def_readonly("pitch", &HeadPose::pitch)
      .def_readonly("roll", &HeadPose::roll)
      .def_readonly("rms_residual", &HeadPose::rms_residual)
      .def_readonly("iterations", &HeadPose::iterations);

  m.def(
      "solve_head_pose",
      [](const std::vector<std::string>& names, const Pixels& image, const CameraIntrinsics& k,
         const std::optional<FaceModel3D>& model) {
        LandmarkSet2D obs;
        obs.names = names;
        for (Eigen::Index i = 0; i < image.rows(); ++i) obs.points.emplace_back(image.row(i).transpose());
        return lm_solve_pose(obs, model.value_or(FaceModel3D::generic_six_point()), k);
      },
      py::arg("names"), py::arg("image_points"), py::arg("intrinsics"), py::arg("model") = py::none(),
      "Levenberg-Marquardt head pose from named 2-D landmarks.");
  m.def(
      "euler_from_rotation",
      [](const Mat3& r) {
        const auto e = euler_from_rotation(r);
        return std::make_tuple(e.yaw, e.pitch, e.roll);
      },
      py::arg("rotation"), "Returns (yaw, pitch, roll) in degrees for R = Ry(yaw) Rx(pitch) Rz(roll).");
  m.def("rotation_from_euler", &rotation_from_euler, py::arg("yaw"), py::arg("pitch"), py::arg("roll"));
  m.def("is_attending", &is_attending, py::arg("pose"), py::arg("cone_deg") = 15.0);

  // willingness
  py::class_<WillingnessConfig>(m, "WillingnessConfig")
      .def(py::init([](double up, double down, double reset) {
             WillingnessConfig c{up, down, reset};
             c.validate();
             return c;
           }),
           py::arg("rate_up") = 1.0 / 3.0, py::arg("rate_down") = 1.0 / 9.0, py::arg("reset_level") = 0.5)
      .def_readonly("rate_up", &WillingnessConfig::rate_up)
      .def_readonly("rate_down", &WillingnessConfig::rate_down)
      .def_readonly("reset_level", &WillingnessConfig::reset_level);

  py::class_<WillingnessState>(m, "WillingnessState")
      .def_static("initial", &WillingnessState::initial, py::arg("config") = WillingnessConfig{}, py::arg("t") = 0.0)
      .def_readonly("value", &WillingnessState::value)
      .def_readonly("triggered", &WillingnessState::triggered)
      .def_readonly("last_update", &WillingnessState::last_update);
  m.def("update_willingness", &update, py::arg("state"), py::arg("attending"), py::arg("dt"));

  py::class_<PersonWillingnessMap>(m, "PersonWillingnessMap")
      .def(py::init<WillingnessConfig>(), py::arg("config") = WillingnessConfig{})
      .def("step_frame", &PersonWillingnessMap::step_frame, py::arg("observations"), py::arg("t_now"),
           "Observations are (person_id, attending) pairs; returns ids that triggered this step.")
      .def("erase", &PersonWillingnessMap::erase, py::arg("id"))
      .def("values", [](const PersonWillingnessMap& pm) {
        std::map<PersonId, double> out;
        for (const auto& [id, s] : pm.states()) out[id] = s.value;
        return out;
      });

  // end to end
  m.def(
      "_run_scenario_json",
      [](const std::filesystem::path& scenario, const std::optional<std::filesystem::path>& config,
         std::optional<std::uint64_t> seed) {
        Scenario s = io::load_scenario(scenario);
        if (seed) s.seed = *seed;
        const PipelineConfig c = config ? io::load_pipeline_config(*config) : PipelineConfig{};
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(s, c);
        }
        std::vector<std::string> events;
        for (const auto& e : r.events) events.push_back(io::to_json(e).dump());
        return py::make_tuple(io::map_to_json(r.map).dump(), io::to_json(r.metrics).dump(), events);
      },
      py::arg("scenario"), py::arg("config") = py::none(), py::arg("seed") = py::none());
  m.def(
      "cli_main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "semmap");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
