#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "cli.hpp"
#include "demos.hpp"
#include "kinesim/serialization.hpp"
#include "live_client.hpp"
#include "test_support.hpp"

using namespace kinesim;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const cli::ServingHook& hook = {}) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err, hook);
  return {code, out.str(), err.str()};
}

struct TempDir {
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("kinesim_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  fs::path path;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) { std::ofstream(path, std::ios::binary) << bytes; }

std::string join(const VecX& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v(i));
  return s;
}

std::string join(const Htm& h) {
  std::string s;
  for (int i = 0; i < 16; ++i) s += (i ? "," : "") + format_number(h(i / 4, i % 4));
  return s;
}

Htm htm_out(const std::string& text) { return htm_from_value(Json::parse(text), "$"); }

bool is_single_json_line(const std::string& text) {
  if (text.empty() || text.back() != '\n') return false;
  if (text.find('\n') != text.size() - 1) return false;
  return Json::accept(text);
}

}  // namespace

TEST_CASE("fk prints the end-effector pose") {
  const Run r = run({"fk", "--robot", "planar2r", "--q", "0,0"});
  REQUIRE(r.code == 0);
  const Htm h = htm_out(r.out);
  CHECK(h(0, 3) == doctest::Approx(2.0));
  CHECK(h(1, 3) == doctest::Approx(0.0));
  CHECK(h(2, 3) == doctest::Approx(0.0));

  std::mt19937_64 rng(11);
  const RobotModel robot = create_generic_6r();
  for (int i = 0; i < 20; ++i) {
    const VecX q = testing::random_config(robot, rng);
    const Run ri = run({"fk", "--robot", "generic6r", "--q", join(q)});
    REQUIRE(ri.code == 0);
    CHECK((htm_out(ri.out) - fkm(robot, q)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("fk usage errors exit with 2") {
  CHECK(run({"fk", "--robot", "hexapod", "--q", "0"}).code == 2);
  const Run r = run({"fk", "--robot", "planar2r", "--q", "0,0,0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("expects 2 joint values") != std::string::npos);
  CHECK(run({"fk", "--robot", "planar2r", "--q", "0,abc"}).code == 2);
  CHECK(run({"fk", "--robot", "planar2r"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"teleport"}).code == 2);
}

TEST_CASE("json errors are one line on stderr") {
  const Run r = run({"--json-errors", "fk", "--robot", "planar2r", "--q", "1"});
  CHECK(r.code == 2);
  REQUIRE(is_single_json_line(r.err));
  const Json j = Json::parse(r.err);
  CHECK(j["code"] == 2);
  CHECK(j["message"].get<std::string>().find("expects 2") != std::string::npos);

  const Run after = run({"fk", "--robot", "nope", "--q", "1", "--json-errors"});
  CHECK(after.code == 2);
  CHECK(is_single_json_line(after.err));
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("ik reaches the pose of a known configuration") {
  std::mt19937_64 rng(5);
  const RobotModel robot = create_generic_6r();
  for (int i = 0; i < 10; ++i) {
    const VecX q = testing::random_config(robot, rng);
    const Htm target = fkm(robot, q);
    const Run r = run({"ik", "--robot", "generic6r", "--target", join(target), "--seed", "7"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    const VecX sol = vec_from_value(j["q"], "q");
    const TaskError e = task_error(robot, sol, target);
    CHECK(e.position_norm() < 1e-4);
    CHECK(e.orientation_norm() < 1e-3);
    CHECK(robot.within_limits(sol));
    CHECK(run({"ik", "--robot", "generic6r", "--target", join(target), "--seed", "7"}).out == r.out);
  }
}

TEST_CASE("unreachable ik exits with 3 and the best residual") {
  const std::string far = join(Htm(trn(5.0, 0.0, 0.0)));
  const Run r = run({"ik", "--robot", "planar2r", "--target", far});
  CHECK(r.code == 3);
  CHECK(r.err.find("best residual") != std::string::npos);

  const Run j = run({"ik", "--robot", "planar2r", "--target", far, "--json-errors", "--seed", "4"});
  CHECK(j.code == 3);
  REQUIRE(is_single_json_line(j.err));
  const Json e = Json::parse(j.err);
  CHECK(e["error"] == "ik-failure");
  CHECK(e["pos_error"].get<double>() == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(run({"ik", "--robot", "planar2r", "--target", far, "--json-errors", "--seed", "4"}).err == j.err);

  CHECK(run({"ik", "--robot", "planar2r", "--target", "1,0,0"}).code == 2);
  CHECK(run({"ik", "--robot", "planar2r", "--target", join(Htm(2.0 * Htm::Identity()))}).code == 2);
}

TEST_CASE("demo dh has one frame per link and a self-contained page") {
  TempDir dir;
  const Run r = run({"demo", "dh", "--out", dir / "dh"});
  REQUIRE(r.code == 0);
  const SceneDocument doc = from_json(slurp(dir / "dh.scene.json"));
  const RobotModel& robot = doc.robot("arm").model;
  std::size_t frames = 0;
  for (const auto& [id, obj] : doc.objects()) frames += std::holds_alternative<Frame>(obj.shape);
  CHECK(frames == robot.dof());
  CHECK(doc.objects().size() == robot.dof());

  for (double t : {0.0, 1.3, 7.05, doc.duration()}) {
    const VecX q = config_at(doc, "arm", t);
    for (std::size_t i = 1; i <= robot.dof(); ++i) {
      CHECK((pose_at(doc, "frame" + std::to_string(i), t) - fkm(robot, q, i)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  const std::string html = slurp(dir / "dh.html");
  CHECK(find_external_references(html).empty());
  CHECK(embedded_document(html) == to_json(doc));
}

TEST_CASE("demo pickplace carries the crate at eef times grasp") {
  TempDir dir;
  REQUIRE(run({"demo", "pickplace", "--out", dir / "pp.scene.json"}).code == 0);
  CHECK(!fs::exists(dir / "pp.scene.json.html"));
  const SceneDocument doc = from_json(slurp(dir / "pp.scene.json"));
  const RobotModel& robot = doc.robot("arm").model;

  // Grasp recorded at the moment of attachment.
  const Htm start = doc.object("crate").initial_pose;
  const Htm grasp = inv_htm(fkm(robot, config_at(doc, "arm", demos::kCarryStart))) * start;
  RobotModel oracle = robot;
  oracle.set_config(config_at(doc, "arm", demos::kCarryStart));
  oracle.attach("crate", start);

  int checked = 0;
  for (double t = demos::kCarryStart; t <= demos::kCarryEnd + 1e-12; t += 0.05) {
    const VecX q = config_at(doc, "arm", t);
    const Htm expected = fkm(robot, q) * grasp;
    CHECK((pose_at(doc, "crate", t) - expected).cwiseAbs().maxCoeff() < 1e-9);
    oracle.set_config(q);
    CHECK((oracle.attachment("crate").world_pose - expected).cwiseAbs().maxCoeff() < 1e-9);
    ++checked;
  }
  CHECK(checked >= 40);
  // Before the grab and after the release the crate stays put.
  CHECK(pose_at(doc, "crate", 1.0) == start);
  CHECK(pose_at(doc, "crate", doc.duration()) == pose_at(doc, "crate", demos::kCarryEnd));
}

TEST_CASE("demo ik follows its seed") {
  TempDir dir;
  REQUIRE(run({"demo", "ik", "--seed", "3", "--out", dir / "a"}).code == 0);
  REQUIRE(run({"demo", "ik", "--seed", "3", "--out", dir / "b"}).code == 0);
  REQUIRE(run({"demo", "ik", "--seed", "4", "--out", dir / "c"}).code == 0);
  CHECK(slurp(dir / "a.scene.json") == slurp(dir / "b.scene.json"));
  CHECK(slurp(dir / "a.scene.json") != slurp(dir / "c.scene.json"));

  const SceneDocument doc = from_json(slurp(dir / "a.scene.json"));
  const RobotModel& robot = doc.robot("arm").model;
  for (int k = 1; k <= 4; ++k) {
    const double t = k * demos::kSegment;
    const TaskError e = task_error(robot, config_at(doc, "arm", t), doc.object("target" + std::to_string(k)).initial_pose);
    CHECK(e.position_norm() < 1e-4);
  }
  CHECK(run({"demo", "walk"}).code == 2);
}

TEST_CASE("evacuate with no pedestrians writes the walls only") {
  TempDir dir;
  REQUIRE(run({"evacuate", "--n", "0", "--out", dir / "empty"}).code == 0);
  const SceneDocument doc = from_json(slurp(dir / "empty.scene.json"));
  CHECK(doc.objects().size() == 4);
  for (const auto& [id, obj] : doc.objects()) {
    CHECK(id.rfind("wall", 0) == 0);
    CHECK(std::holds_alternative<Box>(obj.shape));
  }
  CHECK(doc.tracks().empty());
}

TEST_CASE("evacuate runs to completion and is reproducible") {
  TempDir dir;
  const auto t0 = std::chrono::steady_clock::now();
  const Run a = run({"evacuate", "--n", "30", "--room", "8x8", "--door", "1.2", "--seed", "42", "--out", dir / "a"});
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(a.code == 0);
  CHECK(a.out.find("30 of 30 pedestrians left") != std::string::npos);
  CHECK(a.err.empty());
  CHECK(elapsed < 60.0);

  REQUIRE(run({"evacuate", "--n", "30", "--room", "8x8", "--door", "1.2", "--seed", "42", "--out", dir / "b"}).code == 0);
  CHECK(slurp(dir / "a.scene.json") == slurp(dir / "b.scene.json"));
  CHECK(slurp(dir / "a.html") == slurp(dir / "b.html"));

  const SceneDocument doc = from_json(slurp(dir / "a.scene.json"));
  CHECK(doc.objects().size() == 34);
  CHECK(find_external_references(slurp(dir / "a.html")).empty());

  CHECK(run({"evacuate", "--n", "5", "--room", "8", "--out", dir / "x"}).code == 2);
  CHECK(run({"evacuate", "--n", "5", "--door", "0.3", "--out", dir / "x"}).code == 2);
  CHECK(run({"evacuate", "--n", "5000", "--room", "2x2", "--out", dir / "x"}).code == 2);
}

TEST_CASE("animate-csv turns the drone fixture into three objects") {
  TempDir dir;
  const std::string fixture = std::string(KINESIM_TEST_DATA) + "/drones.csv";
  const Run r = run({"animate-csv", "--csv", fixture, "--out", dir / "drones", "--shape", "box:0.3:0.3:0.1"});
  REQUIRE(r.code == 0);
  const SceneDocument doc = from_json(slurp(dir / "drones.scene.json"));
  CHECK(doc.objects().size() == 3);
  for (const auto& [id, obj] : doc.objects()) CHECK(obj.shape == Shape(Box{0.3, 0.3, 0.1}));
  CHECK(doc.tracks().size() == 3);
  CHECK(doc.duration() == doctest::Approx(9.9));
}

TEST_CASE("animate-csv reports bad rows and empty files") {
  TempDir dir;
  const std::string header = "t,id,x,y,z,qw,qx,qy,qz\n";
  spit(dir / "bad.csv", header + "0,a,0,0,0,1,0,0,0\n0.1,a,0,zero,0,1,0,0,0\n");
  const Run bad = run({"animate-csv", "--csv", dir / "bad.csv", "--out", dir / "bad"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 3") != std::string::npos);
  const Run bad_json = run({"animate-csv", "--csv", dir / "bad.csv", "--out", dir / "bad", "--json-errors"});
  REQUIRE(is_single_json_line(bad_json.err));
  CHECK(Json::parse(bad_json.err)["line"] == 3);

  spit(dir / "empty.csv", header);
  const Run empty = run({"animate-csv", "--csv", dir / "empty.csv", "--out", dir / "empty"});
  CHECK(empty.code == 0);
  CHECK(empty.err.find("warning") != std::string::npos);
  CHECK(from_json(slurp(dir / "empty.scene.json")) == SceneDocument{});

  CHECK(run({"animate-csv", "--csv", dir / "missing.csv", "--out", dir / "m"}).code == 4);
  CHECK(run({"animate-csv", "--csv", dir / "empty.csv", "--out", dir / "e", "--shape", "blob"}).code == 2);
}

TEST_CASE("serve hands out the input bytes and a live session") {
  TempDir dir;
  SceneDocument doc;
  doc.add_robot({"arm", create_planar_2r(), LinkStyle::primitive_chain, {}});
  doc.set_duration(3.0);
  // Pretty-printed on purpose: /doc must echo the file, not re-encode it.
  const std::string bytes = Json::parse(to_json(doc)).dump(2);
  spit(dir / "doc.json", bytes);

  std::promise<std::uint16_t> port;
  auto served = std::async(std::launch::async, [&] {
    return run({"serve", "--doc", dir / "doc.json", "--port", "0"},
               [&](std::uint16_t p) { port.set_value(p); });
  });
  auto port_future = port.get_future();
  REQUIRE(port_future.wait_for(std::chrono::seconds(5)) == std::future_status::ready);
  const std::uint16_t p = port_future.get();

  const auto reply = testing::http_get(p, "/doc");
  CHECK(reply.status == 200);
  CHECK(reply.body == bytes);
  {
    testing::LiveClient client(p);
    const auto hello = client.next_of("hello");
    REQUIRE(hello);
    CHECK(document_from_value((*hello)["document"]) == doc);
  }

  // Busy port while the first server is still up.
  const Run busy = run({"serve", "--doc", dir / "doc.json", "--port", std::to_string(p), "--json-errors"});
  CHECK(busy.code == 4);
  CHECK(is_single_json_line(busy.err));

  cli::request_shutdown();
  REQUIRE(served.wait_for(std::chrono::seconds(5)) == std::future_status::ready);
  const Run r = served.get();
  CHECK(r.code == 0);
  CHECK(r.out.find("serving http://127.0.0.1:" + std::to_string(p)) == 0);

  CHECK(run({"serve", "--doc", dir / "nope.json", "--port", "0"}).code == 4);
  spit(dir / "broken.json", "{\"_version\":\"kinesim-doc/1\"}");
  CHECK(run({"serve", "--doc", dir / "broken.json", "--port", "0"}).code == 2);
}
