#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "demos.hpp"
#include "kinesim/kinematics.hpp"
#include "kinesim/live_server.hpp"
#include "kinesim/pedestrians.hpp"
#include "kinesim/serialization.hpp"

namespace kinesim::cli {

namespace {

std::atomic<bool> g_shutdown{false};

struct Failure {
  int code;
  std::string kind;
  std::string message;
  Json extra = Json::object();
};

std::vector<double> parse_numbers(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    double v = 0;
    const auto r = std::from_chars(first, last, v);
    if (first == last || r.ec != std::errc() || r.ptr != last || !std::isfinite(v)) {
      throw InvalidArgument(std::string(flag) + ": '" + text.substr(pos, end - pos) + "' is not a number");
    }
    out.push_back(v);
    if (end == text.size()) return out;
    pos = end + 1;
  }
}

VecX to_vec(const std::vector<double>& v) { return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size())); }

VecX joint_values(const RobotModel& robot, const std::string& text, const char* flag) {
  const VecX q = to_vec(parse_numbers(text, flag));
  if (q.size() != static_cast<Eigen::Index>(robot.dof())) {
    throw InvalidArgument(std::string(flag) + ": robot '" + robot.name() + "' expects " + std::to_string(robot.dof()) +
                          " joint values, got " + std::to_string(q.size()));
  }
  robot.check_config(q);
  return q;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!(f << bytes) || !f.flush()) throw EnvironmentError("cannot write '" + path + "'");
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// "x.html" writes the page only, "x.json" the document only; any other name
// is a stem for both "<stem>.scene.json" and "<stem>.html".
void write_outputs(const SceneDocument& doc, const std::string& out_path, const std::string& bundle_path,
                   std::ostream& out) {
  const bool html_only = ends_with(out_path, ".html");
  const bool json_only = ends_with(out_path, ".json");
  if (!html_only) {
    const std::string path = json_only ? out_path : out_path + ".scene.json";
    write_file(path, to_json(doc));
    out << path << "\n";
  }
  if (!json_only) {
    const std::string bundle = bundle_path.empty() ? std::string(fallback_viewer_bundle()) : read_file(bundle_path);
    const std::string path = html_only ? out_path : out_path + ".html";
    write_file(path, export_html(doc, bundle));
    out << path << "\n";
  }
}

RoomSpec parse_room(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw InvalidArgument("--room: expected WxH, got '" + text + "'");
  const auto w = parse_numbers(text.substr(0, x), "--room");
  const auto h = parse_numbers(text.substr(x + 1), "--room");
  if (w.size() != 1 || h.size() != 1 || w[0] <= 0 || h[0] <= 0) {
    throw InvalidArgument("--room: expected positive WxH, got '" + text + "'");
  }
  return {w[0], h[0]};
}

void report(const Failure& f, bool json, std::ostream& err) {
  if (json) {
    Json j = f.extra;
    j["code"] = f.code;
    j["error"] = f.kind;
    j["message"] = f.message;
    err << write_canonical(j) << "\n";
  } else {
    err << "kinesim: error: " << f.message << "\n";
  }
}

struct Options {
  std::string robot;
  std::string q;
  std::string target;
  std::string q0;
  bool position_only{false};
  std::uint64_t seed{0};
  std::string demo_kind;
  std::string out;
  std::size_t n{30};
  std::string room{"8x8"};
  double door{1.2};
  double dt{0.01};
  double t_end{120.0};
  std::size_t stride{kDefaultRecordStride};
  std::string csv;
  std::string shape{"ball:0.1"};
  std::string doc;
  std::string host{"127.0.0.1"};
  int port{8765};
  double rate{20.0};
  std::string bundle;
};

int cmd_fk(const Options& o, std::ostream& out) {
  const RobotModel robot = create_robot(o.robot);
  out << write_canonical(htm_value(fkm(robot, joint_values(robot, o.q, "--q")))) << "\n";
  return kOk;
}

int cmd_ik(const Options& o, std::ostream& out) {
  const RobotModel robot = create_robot(o.robot);
  const std::vector<double> t = parse_numbers(o.target, "--target");
  if (t.size() != 16) throw InvalidArgument("--target: expected 16 values, got " + std::to_string(t.size()));
  Htm target;
  for (int i = 0; i < 16; ++i) target(i / 4, i % 4) = t[static_cast<std::size_t>(i)];
  require_valid_htm(target, "--target");
  const VecX q0 = o.q0.empty() ? robot.q() : joint_values(robot, o.q0, "--q0");
  IkParams params;
  params.seed = o.seed;
  if (o.position_only) params.task = IkTask::position;
  const IkResult r = ikm(robot, target, q0, params);
  out << write_canonical({{"q", vec_value(r.q)},
                          {"iterations", r.iterations},
                          {"restarts", r.restarts_used},
                          {"pos_error", r.pos_error},
                          {"ori_error", r.ori_error}})
      << "\n";
  return kOk;
}

int cmd_demo(const Options& o, std::ostream& out) {
  SceneDocument doc;
  if (o.demo_kind == "dh") doc = demos::dh_walkthrough();
  else if (o.demo_kind == "ik") doc = demos::ik_sequence(o.seed);
  else doc = demos::pick_and_place();
  write_outputs(doc, o.out.empty() ? "demo_" + o.demo_kind : o.out, o.bundle, out);
  return kOk;
}

int cmd_evacuate(const Options& o, std::ostream& out, std::ostream& err) {
  if (!(o.dt > 0) || !(o.t_end >= 0)) throw InvalidArgument("--dt must be positive and --t-end non-negative");
  if (o.stride == 0) throw InvalidArgument("--stride must be at least 1");
  CrowdWorld world = make_evacuation(o.n, parse_room(o.room), o.door, o.seed);
  const CrowdWorld initial = world;
  const CrowdRecording rec = record_crowd(world, o.dt, o.t_end, o.stride);
  write_outputs(crowd_document(initial, rec), o.out, o.bundle, out);
  if (o.n == 0) out << "no pedestrians; walls only\n";
  else out << rec.exits.size() << " of " << o.n << " pedestrians left by t = " << format_number(rec.t_end) << " s\n";
  if (rec.exits.size() != o.n) err << "warning: " << o.n - rec.exits.size() << " pedestrians still inside\n";
  return kOk;
}

int cmd_animate_csv(const Options& o, std::ostream& out, std::ostream& err) {
  const Shape shape = parse_shape_spec(o.shape);
  const SceneDocument doc = import_trajectory_csv(read_file(o.csv), shape);
  if (doc.objects().empty()) err << "warning: '" << o.csv << "' has no trajectory rows; writing an empty document\n";
  write_outputs(doc, o.out, o.bundle, out);
  return kOk;
}

int cmd_serve(const Options& o, std::ostream& out, const ServingHook& on_serving) {
  if (o.port < 0 || o.port > 65535) throw InvalidArgument("--port must lie in [0, 65535]");
  std::string bytes = read_file(o.doc);
  SceneDocument doc = from_json(bytes);
  LiveOptions lo;
  lo.host = o.host;
  lo.port = static_cast<std::uint16_t>(o.port);
  lo.frame_rate_hz = o.rate;
  if (!o.bundle.empty()) lo.viewer_bundle = read_file(o.bundle);
  lo.doc_bytes = std::move(bytes);
  LiveServer server(LiveState(std::move(doc)), std::move(lo));
  out << "serving http://" << o.host << ":" << server.port() << "/" << std::endl;
  if (on_serving) on_serving(server.port());
  while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  g_shutdown = false;
  server.stop();
  return kOk;
}

}  // namespace

void request_shutdown() { g_shutdown = true; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const ServingHook& on_serving) {
  bool json_errors = false;
  for (const auto& a : args) json_errors = json_errors || a == "--json-errors";

  Options o;
  CLI::App app{"kinesim: robot kinematics, crowds and browser scenes", "kinesim"};
  app.add_flag("--json-errors", json_errors, "Report errors on stderr as one line of JSON");
  app.require_subcommand(1);

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  auto robot_opt = [&](CLI::App* s) {
    s->add_option("--robot", o.robot, "Robot name")->required()->check(CLI::IsMember(robot_names()));
  };
  auto bundle_opt = [&](CLI::App* s) {
    s->add_option("--viewer-bundle", o.bundle, "Viewer script to inline instead of the built-in one");
  };

  CLI::App* fk = sub("fk", "Print the end-effector pose for a configuration");
  robot_opt(fk);
  fk->add_option("--q", o.q, "Joint values, comma separated")->required();

  CLI::App* ik = sub("ik", "Solve for a configuration reaching a pose");
  robot_opt(ik);
  ik->add_option("--target", o.target, "16 comma-separated values, row-major 4x4")->required();
  ik->add_option("--q0", o.q0, "Initial guess (default: home configuration)");
  ik->add_option("--seed", o.seed, "Seed for random restarts");
  ik->add_flag("--position-only", o.position_only, "Ignore orientation");

  CLI::App* demo = sub("demo", "Write a demo scene (.scene.json and .html)");
  demo->add_option("kind", o.demo_kind, "dh, ik or pickplace")->required()->check(CLI::IsMember({"dh", "ik", "pickplace"}));
  demo->add_option("--out", o.out, "Output stem or file (default: demo_<kind>)");
  demo->add_option("--seed", o.seed, "Seed for the ik demo targets");
  bundle_opt(demo);

  CLI::App* evac = sub("evacuate", "Simulate pedestrians leaving a room");
  evac->add_option("--n", o.n, "Number of pedestrians")->capture_default_str();
  evac->add_option("--room", o.room, "Room size WxH in metres")->capture_default_str();
  evac->add_option("--door", o.door, "Door width in metres")->capture_default_str();
  evac->add_option("--seed", o.seed, "Placement seed")->capture_default_str();
  evac->add_option("--dt", o.dt, "Integration step in seconds")->capture_default_str();
  evac->add_option("--t-end", o.t_end, "Time limit in seconds")->capture_default_str();
  evac->add_option("--stride", o.stride, "Steps per keyframe")->capture_default_str();
  evac->add_option("--out", o.out, "Output stem or file")->required();
  bundle_opt(evac);

  CLI::App* csv = sub("animate-csv", "Turn a trajectory CSV into a scene");
  csv->add_option("--csv", o.csv, "Input CSV (t,id,x,y,z,qw,qx,qy,qz)")->required();
  csv->add_option("--out", o.out, "Output stem or file")->required();
  csv->add_option("--shape", o.shape, "ball:R, box:W:H:D, cylinder:R:H, cone:R:H or frame:L")->capture_default_str();
  bundle_opt(csv);

  CLI::App* serve = sub("serve", "Serve a document with live control");
  serve->add_option("--doc", o.doc, "Scene document (.scene.json)")->required();
  serve->add_option("--port", o.port, "TCP port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", o.host, "Listen address")->capture_default_str();
  serve->add_option("--rate", o.rate, "Frames per second")->capture_default_str();
  bundle_opt(serve);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report({kUsage, "usage", e.what()}, json_errors, err);
    return kUsage;
  }

  try {
    if (fk->parsed()) return cmd_fk(o, out);
    if (ik->parsed()) return cmd_ik(o, out);
    if (demo->parsed()) return cmd_demo(o, out);
    if (evac->parsed()) return cmd_evacuate(o, out, err);
    if (csv->parsed()) return cmd_animate_csv(o, out, err);
    return cmd_serve(o, out, on_serving);
  } catch (const IkFailure& e) {
    Failure f{kSolver, "ik-failure", e.what()};
    f.extra["best_q"] = vec_value(e.best_q());
    f.extra["pos_error"] = e.pos_error();
    f.extra["ori_error"] = e.ori_error();
    report(f, json_errors, err);
    if (!json_errors) {
      err << "best residual: position " << format_number(e.pos_error()) << " m, orientation "
          << format_number(e.ori_error()) << " rad\n";
    }
    return kSolver;
  } catch (const NumericError& e) {
    report({kSolver, "solver", e.what()}, json_errors, err);
    return kSolver;
  } catch (const SingularMatrix& e) {
    report({kSolver, "solver", e.what()}, json_errors, err);
    return kSolver;
  } catch (const EnvironmentError& e) {
    report({kEnvironment, "environment", e.what()}, json_errors, err);
    return kEnvironment;
  } catch (const CsvError& e) {
    Failure f{kUsage, "csv", e.what()};
    f.extra["line"] = e.line();
    report(f, json_errors, err);
    return kUsage;
  } catch (const Error& e) {
    report({kUsage, "usage", e.what()}, json_errors, err);
    return kUsage;
  }
}

}  // namespace kinesim::cli
