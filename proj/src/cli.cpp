#include "semmap/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "semmap/io.hpp"
#include "semmap/pipeline.hpp"
#include "semmap/ply.hpp"

namespace semmap::cli {

namespace {

enum class LogLevel { Off = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  const char* env = std::getenv("SEMMAP_LOG");
  if (env == nullptr) return LogLevel::Warn;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  if (v == "off" || v == "quiet") return LogLevel::Off;
  return LogLevel::Warn;
}

void log(std::ostream& err, LogLevel level, const std::string& msg) {
  if (level <= log_level()) err << "semmap: " << msg << '\n';
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return kConfigError;
    case ErrorCode::SchemaError: return kSchemaError;
    case ErrorCode::DegenerateConfiguration: return kDegenerate;
    case ErrorCode::ClockWentBackwards: return kClockBackwards;
    default: return kFailure;
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream is(io::read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

io::json parse_line(const std::string& line, std::size_t lineno, const std::filesystem::path& path) {
  try {
    return io::json::parse(line);
  } catch (const io::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

// Writes every file or none: contents go to temporaries first, then get renamed.
void write_all(const std::filesystem::path& dir, const std::map<std::filesystem::path, std::string>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> staged;
  const auto cleanup = [&] {
    for (const auto& p : staged) std::filesystem::remove(p, ec);
  };
  for (const auto& [rel, content] : files) {
    const auto target = dir / rel;
    std::filesystem::create_directories(target.parent_path(), ec);
    const auto tmp = std::filesystem::path(target.string() + ".partial");
    staged.push_back(tmp);
    std::ofstream os(tmp, std::ios::binary);
    os << content;
    if (!os) {
      cleanup();
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
  }
  for (const auto& [rel, content] : files) {
    const auto target = dir / rel;
    std::filesystem::rename(target.string() + ".partial", target, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorCode::IoError, "cannot finalize " + target.string() + ": " + ec.message());
    }
  }
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  PipelineConfig config;
  try {
    config = args.config ? io::load_pipeline_config(*args.config) : PipelineConfig{};
  } catch (const Error& e) {
    err << "semmap run: config error: " << e.detail() << '\n';
    return kConfigError;
  }
  try {
    scenario = io::load_scenario(args.scenario);
  } catch (const Error& e) {
    err << "semmap run: scenario error: " << e.detail() << '\n';
    return kSchemaError;
  }
  if (args.seed) scenario.seed = *args.seed;

  try {
    log(err, LogLevel::Info, "running " + std::to_string(scenario.frame_count()) + " frames, seed " +
                                 std::to_string(scenario.seed));
    const RunResult result = run_scenario(scenario, config);

    std::map<std::filesystem::path, std::string> files;
    files["map.json"] = io::map_to_json(result.map).dump(2) + "\n";
    files["metrics.json"] = io::to_json(result.metrics).dump(2) + "\n";
    std::string events;
    for (const auto& ev : result.events) events += io::to_json(ev).dump() + "\n";
    files["events.jsonl"] = std::move(events);
    if (args.export_ply) {
      for (const auto& [id, obj] : result.map.objects()) {
        std::ostringstream ply_text;
        ply::write(ply_text, obj.world);
        files[std::filesystem::path("objects") / ("object_" + std::to_string(id) + ".ply")] = ply_text.str();
      }
    }
    write_all(args.out_dir, files);
    out << "registered " << result.metrics.registered_count << " objects (" << result.metrics.duplicate_count
        << " duplicates), precision " << result.metrics.precision << ", recall " << result.metrics.recall << '\n';
    return kOk;
  } catch (const Error& e) {
    err << "semmap run: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
}

int cmd_headpose(const HeadposeArgs& args, std::ostream& out, std::ostream& err) {
  std::string output;
  std::int64_t frame = -1;
  try {
    const CameraIntrinsics k = io::intrinsics_from_json(
        io::json::parse(io::read_text(args.intrinsics), nullptr, true));
    const FaceModel3D model = args.model ? FaceModel3D::load(*args.model)
                                         : FaceModel3D::generic_six_point();
    const auto lines = read_lines(args.landmarks);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const LandmarkSet2D lm = io::landmarks_from_json(parse_line(lines[i], i + 1, args.landmarks));
      frame = lm.frame;
      for (const auto& p : lm.points) {
        if (!k.contains(p.x(), p.y())) {
          throw Error(ErrorCode::SchemaError, "landmark outside the image in frame " + std::to_string(lm.frame));
        }
      }
      const HeadPose pose = lm_solve_pose(lm, model, k);
      log(err, LogLevel::Debug, "frame " + std::to_string(lm.frame) + ": " + std::to_string(pose.iterations) +
                                    " iterations");
      output += io::json{{"frame", lm.frame},
                         {"face_id", lm.face_id},
                         {"yaw", pose.yaw},
                         {"pitch", pose.pitch},
                         {"roll", pose.roll},
                         {"rms", pose.rms_residual}}
                    .dump() +
                "\n";
    }
  } catch (const io::json::exception& e) {
    err << "semmap headpose: " << e.what() << '\n';
    return kSchemaError;
  } catch (const Error& e) {
    err << "semmap headpose: ";
    if (e.code() == ErrorCode::DegenerateConfiguration) err << "frame " << frame << ": ";
    err << e.what() << '\n';
    return exit_code_for(e.code());
  }
  out << output;
  return kOk;
}

int cmd_willingness(const WillingnessArgs& args, std::ostream& out, std::ostream& err) {
  PipelineConfig config;
  try {
    if (args.config) config = io::load_pipeline_config(*args.config);
  } catch (const Error& e) {
    err << "semmap willingness: config error: " << e.detail() << '\n';
    return kConfigError;
  }
  std::string output;
  io::json triggers = io::json::array();
  try {
    PersonWillingnessMap persons(config.willingness);
    const auto lines = read_lines(args.timeline);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const io::TimelineStep step = io::timeline_step_from_json(parse_line(lines[i], i + 1, args.timeline));
      const auto fired = persons.step_frame(step.persons, step.t);
      for (const auto& [id, state] : persons.states()) {
        output += io::json{{"t", step.t}, {"id", id}, {"value", state.value}, {"triggered", state.triggered}}.dump() +
                  "\n";
      }
      for (const PersonId id : fired) triggers.push_back({{"t", step.t}, {"id", id}});
    }
  } catch (const Error& e) {
    err << "semmap willingness: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  out << output << io::json{{"summary", {{"triggers", triggers}}}}.dump() << '\n';
  return kOk;
}

int main(int argc, char** argv) {
  CLI::App app{"Semantic object mapping and interaction-willingness pipeline"};
  app.require_subcommand(1);

  RunArgs run;
  std::string run_config, scenario, out_dir;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a simulated scenario through the full pipeline");
  run_cmd->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--config", run_config, "Pipeline configuration JSON");
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--export-ply", run.export_ply, "Write one PLY per map object");

  HeadposeArgs hp;
  std::string landmarks, model, intrinsics;
  auto* hp_cmd = app.add_subcommand("headpose", "Estimate head poses from landmark lines");
  hp_cmd->add_option("--landmarks", landmarks, "Landmark JSON-lines file")->required();
  hp_cmd->add_option("--model", model, "Face model JSON (default: built-in 6-point model)");
  hp_cmd->add_option("--intrinsics", intrinsics, "Camera intrinsics JSON")->required();

  WillingnessArgs wl;
  std::string timeline, wl_config;
  auto* wl_cmd = app.add_subcommand("willingness", "Integrate attention timelines into willingness");
  wl_cmd->add_option("--timeline", timeline, "Timeline JSON-lines file")->required();
  wl_cmd->add_option("--config", wl_config, "Pipeline configuration JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      run.scenario = scenario;
      run.out_dir = out_dir;
      if (!run_config.empty()) run.config = run_config;
      if (*seed_opt) run.seed = seed;
      return cmd_run(run, std::cout, std::cerr);
    }
    if (*hp_cmd) {
      hp.landmarks = landmarks;
      hp.intrinsics = intrinsics;
      if (!model.empty()) hp.model = model;
      return cmd_headpose(hp, std::cout, std::cerr);
    }
    wl.timeline = timeline;
    if (!wl_config.empty()) wl.config = wl_config;
    return cmd_willingness(wl, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "semmap: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace semmap::cli
